// Copyright 2026 The Verijar Authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "verijar/fixtures.hpp"

#include <algorithm>
#include <ctime>

#include "verijar/archive.hpp"
#include "verijar/classcanon.hpp"

namespace verijar::fixtures {

using classfile::AttrInfo;
using classfile::ClassModel;
using classfile::CpEntry;
using classfile::CpTag;
using classfile::MemberInfo;
using patterns::PatternId;

// ---------------------------------------------------------------------------
// ClassBuilder
// ---------------------------------------------------------------------------

ClassBuilder::ClassBuilder(const std::string& class_name, uint16_t major) {
  model_.major_version = major;
  model_.minor_version = 0;
  model_.pool.resize(1);
  model_.access_flags = 0x0021;  // public super
  model_.this_class = klass(class_name);
  model_.super_class = klass("java/lang/Object");
}

uint16_t ClassBuilder::add_entry(CpEntry e, const std::string& key, bool dedup) {
  if (dedup) {
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }
  if (model_.pool.size() >= 0xfffe) throw Error("fixture pool overflow");
  uint16_t idx = uint16_t(model_.pool.size());
  bool wide = e.tag == CpTag::Long || e.tag == CpTag::Double;
  model_.pool.push_back(std::move(e));
  if (wide) {
    CpEntry ph;
    ph.phantom = true;
    model_.pool.push_back(ph);
  }
  if (dedup) cache_[key] = idx;
  return idx;
}

uint16_t ClassBuilder::utf8(std::string_view s) {
  CpEntry e;
  e.tag = CpTag::Utf8;
  e.utf8 = to_bytes(s);
  return add_entry(std::move(e), "u:" + std::string(s), true);
}

uint16_t ClassBuilder::utf8_dup(std::string_view s) {
  CpEntry e;
  e.tag = CpTag::Utf8;
  e.utf8 = to_bytes(s);
  return add_entry(std::move(e), "", false);
}

uint16_t ClassBuilder::klass(std::string_view name) {
  uint16_t n = utf8(name);
  CpEntry e;
  e.tag = CpTag::Class;
  e.ref1 = n;
  return add_entry(std::move(e), "c:" + std::string(name), true);
}

uint16_t ClassBuilder::nat(std::string_view name, std::string_view desc) {
  uint16_t n = utf8(name);
  uint16_t d = utf8(desc);
  CpEntry e;
  e.tag = CpTag::NameAndType;
  e.ref1 = n;
  e.ref2 = d;
  return add_entry(std::move(e), "n:" + std::string(name) + ":" + std::string(desc), true);
}

uint16_t ClassBuilder::methodref(std::string_view cls, std::string_view name,
                                 std::string_view desc) {
  uint16_t c = klass(cls);
  uint16_t n = nat(name, desc);
  CpEntry e;
  e.tag = CpTag::Methodref;
  e.ref1 = c;
  e.ref2 = n;
  return add_entry(std::move(e),
                   "m:" + std::string(cls) + "." + std::string(name) + std::string(desc), true);
}

uint16_t ClassBuilder::fieldref(std::string_view cls, std::string_view name,
                                std::string_view desc) {
  uint16_t c = klass(cls);
  uint16_t n = nat(name, desc);
  CpEntry e;
  e.tag = CpTag::Fieldref;
  e.ref1 = c;
  e.ref2 = n;
  return add_entry(std::move(e),
                   "f:" + std::string(cls) + "." + std::string(name) + std::string(desc), true);
}

uint16_t ClassBuilder::string_const(std::string_view s) {
  uint16_t u = utf8(s);
  CpEntry e;
  e.tag = CpTag::String;
  e.ref1 = u;
  return add_entry(std::move(e), "s:" + std::string(s), true);
}

uint16_t ClassBuilder::int_const(int32_t v) {
  CpEntry e;
  e.tag = CpTag::Integer;
  e.u32 = uint32_t(v);
  return add_entry(std::move(e), "i:" + std::to_string(v), true);
}

uint16_t ClassBuilder::long_const(int64_t v) {
  CpEntry e;
  e.tag = CpTag::Long;
  e.u64 = uint64_t(v);
  return add_entry(std::move(e), "l:" + std::to_string(v), true);
}

void ClassBuilder::add_field(uint16_t flags, std::string_view name, std::string_view desc) {
  MemberInfo m;
  m.access_flags = flags;
  m.name_index = utf8(name);
  m.descriptor_index = utf8(desc);
  model_.fields.push_back(std::move(m));
}

void ClassBuilder::add_method(uint16_t flags, std::string_view name, std::string_view desc,
                              Bytes code_attr_body) {
  MemberInfo m;
  m.access_flags = flags;
  m.name_index = utf8(name);
  m.descriptor_index = utf8(desc);
  m.attributes.push_back(attr("Code", std::move(code_attr_body)));
  model_.methods.push_back(std::move(m));
}

void ClassBuilder::add_method_bare(uint16_t flags, std::string_view name,
                                   std::string_view desc) {
  MemberInfo m;
  m.access_flags = flags;
  m.name_index = utf8(name);
  m.descriptor_index = utf8(desc);
  model_.methods.push_back(std::move(m));
}

void ClassBuilder::add_class_attr(std::string_view name, Bytes body) {
  model_.attributes.push_back(attr(name, std::move(body)));
}

void ClassBuilder::add_method_attr(size_t method_index, std::string_view name, Bytes body) {
  model_.methods.at(method_index).attributes.push_back(attr(name, std::move(body)));
}

AttrInfo ClassBuilder::attr(std::string_view name, Bytes body) {
  AttrInfo a;
  a.name_index = utf8(name);
  a.name = std::string(name);
  a.body = std::move(body);
  return a;
}

Bytes ClassBuilder::code_body(uint16_t max_stack, uint16_t max_locals, const Bytes& code,
                              const std::vector<AttrInfo>& sub_attrs) {
  ByteWriter w;
  w.u16be(max_stack);
  w.u16be(max_locals);
  w.u32be(uint32_t(code.size()));
  w.raw(code);
  w.u16be(0);  // exception table
  w.u16be(uint16_t(sub_attrs.size()));
  for (const AttrInfo& a : sub_attrs) {
    w.u16be(a.name_index);
    w.u32be(uint32_t(a.body.size()));
    w.raw(a.body);
  }
  return w.take();
}

ClassModel ClassBuilder::build() { return model_; }

// ---------------------------------------------------------------------------
// CodeWriter
// ---------------------------------------------------------------------------

CodeWriter& CodeWriter::plain(uint8_t op) {
  out_.push_back(op);
  return *this;
}

CodeWriter& CodeWriter::slot_op(uint8_t op, int slot) {
  if (slot > 0xff) throw Error("fixture slot out of range");
  out_.push_back(op);
  out_.push_back(uint8_t(slot));
  return *this;
}

CodeWriter& CodeWriter::cp_op(uint8_t op, uint16_t index) {
  if (op == 18) {
    if (index > 0xff) throw Error("fixture ldc index out of range");
    out_.push_back(op);
    out_.push_back(uint8_t(index));
    return *this;
  }
  out_.push_back(op);
  out_.push_back(uint8_t(index >> 8));
  out_.push_back(uint8_t(index));
  return *this;
}

CodeWriter& CodeWriter::branch(uint8_t op, int16_t rel) {
  out_.push_back(op);
  out_.push_back(uint8_t(uint16_t(rel) >> 8));
  out_.push_back(uint8_t(uint16_t(rel)));
  return *this;
}

CodeWriter& CodeWriter::iinc(int slot, int8_t delta) {
  out_.push_back(132);
  out_.push_back(uint8_t(slot));
  out_.push_back(uint8_t(delta));
  return *this;
}

// ---------------------------------------------------------------------------
// Shared fixture scaffolding
// ---------------------------------------------------------------------------

namespace {

std::string date_words(int64_t epoch, const std::string& zone) {
  static const char* kDays[] = {"Sun", "Mon", "Tue", "Wed", "Thu", "Fri", "Sat"};
  static const char* kMonths[] = {"Jan", "Feb", "Mar", "Apr", "May", "Jun",
                                  "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};
  time_t t = time_t(epoch);
  struct tm tm_buf;
  gmtime_r(&t, &tm_buf);
  char buf[96];
  snprintf(buf, sizeof(buf), "%s %s %02d %02d:%02d:%02d %s %04d", kDays[tm_buf.tm_wday],
           kMonths[tm_buf.tm_mon], tm_buf.tm_mday, tm_buf.tm_hour, tm_buf.tm_min,
           tm_buf.tm_sec, zone.c_str(), tm_buf.tm_year + 1900);
  return buf;
}

std::string date_iso(int64_t epoch) {
  time_t t = time_t(epoch);
  struct tm tm_buf;
  gmtime_r(&t, &tm_buf);
  char buf[64];
  snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.000Z", tm_buf.tm_year + 1900,
           tm_buf.tm_mon + 1, tm_buf.tm_mday, tm_buf.tm_hour, tm_buf.tm_min, tm_buf.tm_sec);
  return buf;
}

Bytes crlf_join(const std::vector<std::string>& lines) {
  std::string out;
  for (const std::string& l : lines) {
    out += l;
    out += "\r\n";
  }
  return to_bytes(out);
}

Bytes lf_join(const std::vector<std::string>& lines) {
  std::string out;
  for (const std::string& l : lines) {
    out += l;
    out += "\n";
  }
  return to_bytes(out);
}

// Per-pair deterministic context.
struct Ctx {
  FixtureSpec spec;
  Rng rng;
  int64_t base_epoch;
  std::string pkg;

  explicit Ctx(const FixtureSpec& s)
      : spec(s), rng(s.seed * 1000003 + uint64_t(int(s.pattern))),
        base_epoch(1609459200 + int64_t(rng.below(40000000))),  // within 2021
        pkg("com/example") {}
};

Bytes manifest_bytes(const std::vector<std::pair<std::string, std::string>>& extra) {
  std::vector<std::string> lines = {"Manifest-Version: 1.0",
                                    "Created-By: Apache Maven 3.6.0"};
  for (const auto& [k, v] : extra) lines.push_back(k + ": " + v);
  lines.push_back("");
  return crlf_join(lines);
}

Bytes properties_bytes(Ctx& c, const std::string& date_line) {
  return lf_join({"#Generated by Maven", "# " + date_line,
                  "version=1.0." + std::to_string(c.rng.below(100)),
                  "groupId=com.example", "artifactId=app"});
}

// A plain two-method class, identical across the pair unless varied.
ClassModel basic_class(const std::string& name, Ctx& c, uint64_t salt) {
  (void)c;
  ClassBuilder b(name);
  uint16_t init_ref = b.methodref("java/lang/Object", "<init>", "()V");
  {
    CodeWriter cw;
    cw.slot_op(25, 0).cp_op(183, init_ref).plain(177);  // aload_0 invokespecial return
    b.add_method(0x0001, "<init>", "()V", b.code_body(1, 1, cw.take()));
  }
  {
    CodeWriter cw;
    int k = int(3 + (salt % 5));
    cw.plain(uint8_t(3 + k % 6)).slot_op(54, 1).slot_op(21, 1).plain(172);
    b.add_method(0x0009, "value", "()I", b.code_body(1, 2, cw.take()));
  }
  b.add_class_attr("SourceFile", [&] {
    ByteWriter w;
    w.u16be(b.utf8("App.java"));
    return w.take();
  }());
  return b.build();
}

struct JarSpec {
  std::vector<std::pair<std::string, Bytes>> files;
  archive::DosTime mtime;
};

Bytes pack(const JarSpec& spec) {
  archive::PackageModel pkg = archive::make_package(spec.files, spec.mtime);
  return archive::write_plain(pkg);
}

// Base payload common to both pair members. The class bytes are passed in so
// class-level patterns can vary them.
JarSpec base_jar(Ctx& c, const Bytes& bar_class, const Bytes& baz_class,
                 const std::string& date_line) {
  JarSpec j;
  j.mtime = archive::DosTime::from_unix(c.base_epoch);
  j.files = {
      {"META-INF/MANIFEST.MF",
       manifest_bytes({{"Built-By", "runner"}, {"Build-Jdk", "1.8.0_292"}})},
      {c.pkg + "/Bar.class", bar_class},
      {c.pkg + "/Baz.class", baz_class},
      {"META-INF/maven/com.example/app/pom.properties", properties_bytes(c, date_line)},
  };
  for (int i = 0; i + 4 < c.spec.archive_entries; ++i) {
    j.files.emplace_back("resources/data" + std::to_string(i) + ".txt",
                         lf_join({"resource " + std::to_string(c.rng.below(1000))}));
  }
  return j;
}

void replace_file(JarSpec& j, const std::string& name, Bytes payload) {
  for (auto& [n, p] : j.files) {
    if (n == name) {
      p = std::move(payload);
      return;
    }
  }
  j.files.emplace_back(name, std::move(payload));
}

// ---------------------------------------------------------------------------
// Class variants per pattern
// ---------------------------------------------------------------------------

Bytes lnt_body(ClassBuilder& b, const std::vector<std::pair<uint16_t, uint16_t>>& rows) {
  (void)b;
  ByteWriter w;
  w.u16be(uint16_t(rows.size()));
  for (auto [pc, line] : rows) {
    w.u16be(pc);
    w.u16be(line);
  }
  return w.take();
}

// P5: identical code, shifted line numbers.
ClassModel p5_class(const std::string& name, Ctx& c, uint16_t line_base) {
  ClassBuilder b(name);
  uint16_t init_ref = b.methodref("java/lang/Object", "<init>", "()V");
  {
    CodeWriter cw;
    cw.slot_op(25, 0).cp_op(183, init_ref).plain(177);
    AttrInfo lnt = b.attr("LineNumberTable", lnt_body(b, {{0, line_base}}));
    b.add_method(0x0001, "<init>", "()V", b.code_body(1, 1, cw.take(), {lnt}));
  }
  {
    CodeWriter cw;
    cw.plain(4).slot_op(54, 1).slot_op(21, 1).plain(172);
    AttrInfo lnt = b.attr("LineNumberTable",
                          lnt_body(b, {{0, uint16_t(line_base + 2)},
                                       {1, uint16_t(line_base + 3)},
                                       {3, uint16_t(line_base + 4)}}));
    b.add_method(0x0009, "compute", "()I", b.code_body(1, 2, cw.take(), {lnt}));
  }
  (void)c;
  return b.build();
}

// P6: same logical class; the B side gets duplicated pool entries and a
// random pool permutation.
ClassModel p6_class_base(const std::string& name, Ctx& c) {
  ClassBuilder b(name);
  uint16_t init_ref = b.methodref("java/lang/Object", "<init>", "()V");
  {
    CodeWriter cw;
    cw.slot_op(25, 0).cp_op(183, init_ref).plain(177);
    b.add_method(0x0001, "<init>", "()V", b.code_body(1, 1, cw.take()));
  }
  uint16_t close_ref = b.methodref("java/io/InputStream", "close", "()V");
  uint16_t greet = b.string_const("greeting-" + std::to_string(c.rng.below(50)));
  uint16_t big = b.int_const(int32_t(100000 + c.rng.below(1000)));
  {
    CodeWriter cw;
    cw.slot_op(25, 0).cp_op(182, close_ref).cp_op(18, greet).plain(87);  // pop
    cw.cp_op(19, big).plain(87).plain(177);
    b.add_method(0x0001, "touch", "(Ljava/io/InputStream;)V",
                 b.code_body(2, 1, cw.take()));
  }
  // Extra pooled values so permutations have room to act.
  for (int i = 0; i < c.spec.pool_entries / 3; ++i) {
    b.string_const("pool-filler-" + std::to_string(i));
  }
  return b.build();
}

std::vector<uint16_t> shuffled_pool_order(const ClassModel& m, Rng& rng) {
  std::vector<uint16_t> order;
  for (uint16_t i = 1; i < m.pool.size(); ++i) {
    if (!m.pool[i].phantom) order.push_back(i);
  }
  rng.shuffle(order);
  return order;
}

ClassModel p6_variant(const ClassModel& base, Ctx& c) {
  // Duplicate a Utf8 entry referenced by some other entry, rewire that
  // reference to the copy, then permute the whole pool.
  ClassModel work = base;
  std::vector<std::pair<uint16_t, int>> ref_sites;  // (entry index, which ref)
  for (uint16_t i = 1; i < work.pool.size(); ++i) {
    const CpEntry& e = work.pool[i];
    if (e.phantom) continue;
    if (e.tag == CpTag::Class || e.tag == CpTag::String) ref_sites.emplace_back(i, 1);
    if (e.tag == CpTag::NameAndType) {
      ref_sites.emplace_back(i, 1);
      ref_sites.emplace_back(i, 2);
    }
  }
  int dups = 1 + int(c.rng.below(2));
  for (int d = 0; d < dups && !ref_sites.empty(); ++d) {
    auto [site, which] = ref_sites[c.rng.below(ref_sites.size())];
    CpEntry& host = work.pool[site];
    uint16_t target = which == 1 ? host.ref1 : host.ref2;
    CpEntry copy = work.pool[target];
    work.pool.push_back(copy);
    uint16_t copy_idx = uint16_t(work.pool.size() - 1);
    if (which == 1) {
      work.pool[site].ref1 = copy_idx;
    } else {
      work.pool[site].ref2 = copy_idx;
    }
  }
  for (int attempt = 0; attempt < 16; ++attempt) {
    std::vector<uint16_t> order = shuffled_pool_order(work, c.rng);
    classfile::PoolPermuteResult r = classfile::permute_pool(work, order);
    if (r.ok) return r.model;
  }
  return work;  // duplicates alone still exercise the axis
}

// P7: bijectively renumbered non-parameter slots, with LocalVariableTable and
// a full-frame StackMapTable kept consistent.
ClassModel p7_class(const std::string& name, Ctx& c, bool variant) {
  // Pick per-pair slot assignments; the pair shares rng state, so draw both
  // sides' numbers regardless of which side we emit.
  int a1 = 1, a2 = 2, a3 = 3;
  std::vector<int> pool_slots = {1, 2, 3, 4, 5, 6, 7};
  c.rng.shuffle(pool_slots);
  int b1 = pool_slots[0], b2 = pool_slots[1], b3 = pool_slots[2];
  int wa = 1 + int(c.rng.below(3));      // wide pair start, side A
  int wb = 4 + int(c.rng.below(3));      // wide pair start, side B
  int L1 = variant ? b1 : a1;
  int L2 = variant ? b2 : a2;
  int L3 = variant ? b3 : a3;
  int W = variant ? wb : wa;
  const uint16_t kMaxLocals = 10;

  ClassBuilder b(name);
  uint16_t init_ref = b.methodref("java/lang/Object", "<init>", "()V");
  {
    CodeWriter cw;
    cw.slot_op(25, 0).cp_op(183, init_ref).plain(177);
    b.add_method(0x0001, "<init>", "()V", b.code_body(1, 1, cw.take()));
  }
  {
    // static int calc(int): branch forces a stack map frame.
    CodeWriter cw;
    cw.plain(5);              // 0: iconst_2
    cw.slot_op(54, L1);       // 1: istore L1
    cw.slot_op(21, 0);        // 3: iload_0 (parameter)
    cw.branch(154, 21 - 5);   // 5: ifne -> 21
    cw.plain(6);              // 8: iconst_3
    cw.slot_op(54, L2);       // 9: istore L2
    cw.slot_op(21, L2);       // 11: iload L2
    cw.slot_op(21, L1);       // 13: iload L1
    cw.plain(96);             // 15: iadd
    cw.slot_op(54, L3);       // 16: istore L3
    cw.slot_op(21, L3);       // 18: iload L3
    cw.plain(172);            // 20: ireturn
    cw.slot_op(21, L1);       // 21: iload L1
    cw.plain(172);            // 23: ireturn
    Bytes code = cw.take();

    // Full frame at offset 21: parameter plus L1, gaps as top.
    ByteWriter smt;
    smt.u16be(1);
    smt.u8(255);
    smt.u16be(21);
    smt.u16be(uint16_t(L1 + 1));
    for (int s = 0; s <= L1; ++s) smt.u8(s == 0 || s == L1 ? 1 : 0);  // Integer or Top
    smt.u16be(0);
    AttrInfo smt_attr = b.attr("StackMapTable", smt.take());

    ByteWriter lvt;
    lvt.u16be(3);
    auto lvt_row = [&](const char* nm, int slot) {
      lvt.u16be(0);
      lvt.u16be(uint16_t(code.size()));
      lvt.u16be(b.utf8(nm));
      lvt.u16be(b.utf8("I"));
      lvt.u16be(uint16_t(slot));
    };
    lvt_row("a", L1);
    lvt_row("b", L2);
    lvt_row("c", L3);
    AttrInfo lvt_attr = b.attr("LocalVariableTable", lvt.take());

    b.add_method(0x0009, "calc", "(I)I",
                 b.code_body(2, kMaxLocals, code, {smt_attr, lvt_attr}));
  }
  {
    // static int wide(long is stored in a renumbered pair).
    CodeWriter cw;
    cw.plain(10);             // lconst_1
    cw.slot_op(55, W);        // lstore W
    cw.slot_op(22, W);        // lload W
    cw.plain(136);            // l2i
    cw.plain(172);            // ireturn
    Bytes code = cw.take();
    ByteWriter lvt;
    lvt.u16be(1);
    lvt.u16be(0);
    lvt.u16be(uint16_t(code.size()));
    lvt.u16be(b.utf8("w"));
    lvt.u16be(b.utf8("J"));
    lvt.u16be(uint16_t(W));
    AttrInfo lvt_attr = b.attr("LocalVariableTable", lvt.take());
    b.add_method(0x0009, "widen", "()I", b.code_body(2, kMaxLocals, code, {lvt_attr}));
  }
  return b.build();
}

// P9: permuted InnerClasses entries.
ClassModel p9_class(const std::string& name, Ctx& c, bool variant) {
  ClassBuilder b(name);
  uint16_t init_ref = b.methodref("java/lang/Object", "<init>", "()V");
  CodeWriter cw;
  cw.slot_op(25, 0).cp_op(183, init_ref).plain(177);
  b.add_method(0x0001, "<init>", "()V", b.code_body(1, 1, cw.take()));

  struct Inner {
    uint16_t info, outer, name_idx;
  };
  std::vector<Inner> inners;
  for (const char* nm : {"Foo", "Bar", "Baz", "Qux"}) {
    Inner in;
    in.info = b.klass(name + "$" + nm);
    in.outer = b.klass(name);
    in.name_idx = b.utf8(nm);
    inners.push_back(in);
  }
  std::vector<size_t> order = {0, 1, 2, 3};
  std::vector<size_t> order_b = order;
  while (order_b == order) c.rng.shuffle(order_b);
  const std::vector<size_t>& use = variant ? order_b : order;
  ByteWriter w;
  w.u16be(uint16_t(use.size()));
  for (size_t i : use) {
    w.u16be(inners[i].info);
    w.u16be(inners[i].outer);
    w.u16be(inners[i].name_idx);
    w.u16be(0x0009);
  }
  b.add_class_attr("InnerClasses", w.take());
  return b.build();
}

// P10: permuted method order.
ClassModel p10_class(const std::string& name, Ctx& c, bool variant) {
  ClassBuilder b(name);
  uint16_t init_ref = b.methodref("java/lang/Object", "<init>", "()V");
  CodeWriter cw;
  cw.slot_op(25, 0).cp_op(183, init_ref).plain(177);
  b.add_method(0x0001, "<init>", "()V", b.code_body(1, 1, cw.take()));
  int n = std::max(3, c.spec.methods);
  static const char* kNames[] = {"withAuthInfoObject", "withAPIServiceObject",
                                 "withResourceRequirementObject", "withWatchEvent",
                                 "withStatusObject", "withPodTemplate"};
  for (int i = 0; i < n && i < 6; ++i) {
    CodeWriter mw;
    mw.plain(uint8_t(3 + i % 6)).plain(172);
    b.add_method(0x0001, kNames[i], "()I", b.code_body(1, 1, mw.take()));
  }
  ClassModel m = b.build();
  if (variant) {
    std::vector<MemberInfo> methods = m.methods;
    std::vector<size_t> order(methods.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::vector<size_t> shuffled = order;
    while (shuffled == order) c.rng.shuffle(shuffled);
    m.methods.clear();
    for (size_t i : shuffled) m.methods.push_back(methods[i]);
  } else {
    // Keep the rng in the same state on both sides.
    std::vector<size_t> order(m.methods.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::vector<size_t> shuffled = order;
    while (shuffled == order) c.rng.shuffle(shuffled);
  }
  return m;
}

// P14: lambda bodies keep their content; the numeric ids swap.
ClassModel p14_class(const std::string& name, Ctx& c, bool variant) {
  int k1 = 10 + int(c.rng.below(40));
  int k2 = 60 + int(c.rng.below(40));
  // Body X gets id 0 on side A and id 1 on side B; body Y the other way.
  std::string x_name = variant ? "lambda$run$1" : "lambda$run$0";
  std::string y_name = variant ? "lambda$run$0" : "lambda$run$1";

  ClassBuilder b(name);
  uint16_t init_ref = b.methodref("java/lang/Object", "<init>", "()V");
  {
    CodeWriter cw;
    cw.slot_op(25, 0).cp_op(183, init_ref).plain(177);
    b.add_method(0x0001, "<init>", "()V", b.code_body(1, 1, cw.take()));
  }
  uint16_t ref_x = b.methodref(name, x_name, "()I");
  uint16_t ref_y = b.methodref(name, y_name, "()I");
  {
    CodeWriter cw;
    cw.cp_op(184, ref_x).cp_op(184, ref_y).plain(96).plain(172);
    b.add_method(0x0009, "run", "()I", b.code_body(2, 0, cw.take()));
  }
  {
    CodeWriter cw;
    cw.plain(16).plain(uint8_t(k1));  // bipush k1 (body X)
    Bytes code = cw.take();
    code.push_back(172);
    b.add_method(0x100a, x_name, "()I", b.code_body(1, 0, code));
  }
  {
    CodeWriter cw;
    cw.plain(16).plain(uint8_t(k2));  // bipush k2 (body Y)
    Bytes code = cw.take();
    code.push_back(172);
    b.add_method(0x100a, y_name, "()I", b.code_body(1, 0, code));
  }
  return b.build();
}

}  // namespace

// ---------------------------------------------------------------------------
// random_class
// ---------------------------------------------------------------------------

classfile::ClassModel random_class(Rng& rng, const std::string& name, int methods,
                                   int pool_entries) {
  ClassBuilder b(name);
  uint16_t init_ref = b.methodref("java/lang/Object", "<init>", "()V");
  {
    CodeWriter cw;
    cw.slot_op(25, 0).cp_op(183, init_ref).plain(177);
    std::vector<AttrInfo> subs;
    if (rng.coin()) {
      ByteWriter lnt;
      lnt.u16be(1);
      lnt.u16be(0);
      lnt.u16be(uint16_t(1 + rng.below(200)));
      subs.push_back(b.attr("LineNumberTable", lnt.take()));
    }
    b.add_method(0x0001, "<init>", "()V", b.code_body(1, 1, cw.take(), subs));
  }
  int nf = int(rng.below(3));
  for (int i = 0; i < nf; ++i) {
    b.add_field(0x0002, "field" + std::to_string(i), rng.coin() ? "I" : "J");
  }
  for (int i = 0; i < std::max(1, methods); ++i) {
    CodeWriter cw;
    int slot = 1 + int(rng.below(4));
    int loads = 1 + int(rng.below(3));
    cw.plain(uint8_t(3 + rng.below(6)));
    cw.slot_op(54, slot);
    for (int k = 0; k < loads; ++k) cw.slot_op(21, slot);
    for (int k = 1; k < loads; ++k) cw.plain(96);
    if (rng.coin()) {
      uint16_t s = b.string_const("msg-" + std::to_string(rng.below(1000)));
      cw.cp_op(18, s).plain(87);
    }
    cw.plain(172);
    b.add_method(0x0009, "m" + std::to_string(i), "()I",
                 b.code_body(3, uint16_t(slot + 2), cw.take()));
  }
  for (int i = 0; i < pool_entries / 2; ++i) {
    if (rng.coin()) {
      b.string_const("extra-" + std::to_string(rng.below(500)));
    } else {
      b.long_const(int64_t(rng.next() & 0xffffff));
    }
  }
  if (rng.coin()) {
    ByteWriter sf;
    sf.u16be(b.utf8("App.java"));
    b.add_class_attr("SourceFile", sf.take());
  }
  return b.build();
}

// ---------------------------------------------------------------------------
// generate_pair
// ---------------------------------------------------------------------------

FixturePair generate_pair(const FixtureSpec& spec) {
  if (spec.pattern == PatternId::Unknown) {
    throw Error("fixtures exist only for known patterns");
  }
  Ctx c(spec);
  std::string fixed_date = date_words(c.base_epoch, "UTC");
  Bytes baz = classfile::serialize_class(basic_class(c.pkg + "/Baz", c, spec.seed));

  FixturePair out;
  out.label = spec.pattern;

  switch (spec.pattern) {
    case PatternId::P1: {
      int64_t t_a = c.base_epoch + int64_t(c.rng.below(3600));
      int64_t t_b = t_a + 2 + int64_t(c.rng.below(7200));
      Bytes bar = classfile::serialize_class(basic_class(c.pkg + "/Bar", c, spec.seed));
      JarSpec a = base_jar(c, bar, baz, date_words(t_a, "EDT"));
      JarSpec b = a;
      for (auto& [n, p] : b.files) {
        if (n == "META-INF/maven/com.example/app/pom.properties") {
          std::string content = to_string(as_span(p));
          std::string from = date_words(t_a, "EDT");
          std::string to = date_words(t_b, "EDT");
          size_t pos = content.find(from);
          if (pos != std::string::npos) content.replace(pos, from.size(), to);
          p = to_bytes(content);
        }
      }
      auto xml = [](int64_t t) {
        return to_bytes("<properties>\n  <entry key=\"created\">" + date_iso(t) +
                        "</entry>\n</properties>\n");
      };
      a.files.emplace_back("META-INF/vault/properties.xml", xml(t_a));
      b.files.emplace_back("META-INF/vault/properties.xml", xml(t_b));
      a.mtime = archive::DosTime::from_unix(t_a);
      b.mtime = archive::DosTime::from_unix(t_b);
      out.a = pack(a);
      out.b = pack(b);
      break;
    }
    case PatternId::P2: {
      Bytes bar = classfile::serialize_class(basic_class(c.pkg + "/Bar", c, spec.seed));
      int patch_a = 200 + int(c.rng.below(100));
      int patch_b = patch_a;
      while (patch_b == patch_a) patch_b = 200 + int(c.rng.below(100));
      JarSpec a = base_jar(c, bar, baz, fixed_date);
      JarSpec b = a;
      replace_file(a, "META-INF/MANIFEST.MF",
                   manifest_bytes({{"Built-By", "runner"},
                                   {"Build-Jdk", "1.8.0_" + std::to_string(patch_a)}}));
      replace_file(b, "META-INF/MANIFEST.MF",
                   manifest_bytes({{"Built-By", "runner"},
                                   {"Build-Jdk", "1.8.0_" + std::to_string(patch_b)}}));
      out.a = pack(a);
      out.b = pack(b);
      break;
    }
    case PatternId::P3: {
      Bytes bar = classfile::serialize_class(basic_class(c.pkg + "/Bar", c, spec.seed));
      char commit[20];
      snprintf(commit, sizeof(commit), "%08llx", (unsigned long long)(c.rng.next() & 0xffffffff));
      auto git_json = [&](const std::string& ahead) {
        return lf_join({"{", "  \"git.branch\": \"master\"",
                        std::string("  \"git.commit.id.abbrev\": \"") + commit + "\"",
                        "  \"git.local.branch.ahead\": \"" + ahead + "\"", "}"});
      };
      JarSpec a = base_jar(c, bar, baz, fixed_date);
      JarSpec b = a;
      a.files.emplace_back("classes/git.json", git_json("0"));
      b.files.emplace_back("classes/git.json", git_json("NO_REMOTE"));
      out.a = pack(a);
      out.b = pack(b);
      break;
    }
    case PatternId::P4: {
      Bytes bar = classfile::serialize_class(basic_class(c.pkg + "/Bar", c, spec.seed));
      static const char* kUsers[] = {"runner", "?", "jenkins", "builder", "ci"};
      size_t u_a = c.rng.below(5);
      size_t u_b = u_a;
      while (u_b == u_a) u_b = c.rng.below(5);
      JarSpec a = base_jar(c, bar, baz, fixed_date);
      JarSpec b = a;
      replace_file(a, "META-INF/MANIFEST.MF",
                   manifest_bytes({{"Built-By", kUsers[u_a]}, {"Build-Jdk", "1.8.0_292"}}));
      replace_file(b, "META-INF/MANIFEST.MF",
                   manifest_bytes({{"Built-By", kUsers[u_b]}, {"Build-Jdk", "1.8.0_292"}}));
      out.a = pack(a);
      out.b = pack(b);
      break;
    }
    case PatternId::P5: {
      uint16_t base = uint16_t(20 + c.rng.below(40));
      Bytes bar_a = classfile::serialize_class(p5_class(c.pkg + "/Bar", c, base));
      Bytes bar_b = classfile::serialize_class(p5_class(c.pkg + "/Bar", c, base + 1));
      JarSpec a = base_jar(c, bar_a, baz, fixed_date);
      JarSpec b = a;
      replace_file(b, c.pkg + "/Bar.class", bar_b);
      out.a = pack(a);
      out.b = pack(b);
      break;
    }
    case PatternId::P6: {
      ClassModel base = p6_class_base(c.pkg + "/Bar", c);
      Bytes bar_a = classfile::serialize_class(base);
      Bytes bar_b = classfile::serialize_class(p6_variant(base, c));
      JarSpec a = base_jar(c, bar_a, baz, fixed_date);
      JarSpec b = a;
      replace_file(b, c.pkg + "/Bar.class", bar_b);
      out.a = pack(a);
      out.b = pack(b);
      break;
    }
    case PatternId::P7: {
      Bytes bar_a = classfile::serialize_class(p7_class(c.pkg + "/Bar", c, false));
      // A second context replays the same draw sequence for the variant side.
      Ctx c2(spec);
      Bytes bar_b = classfile::serialize_class(p7_class(c2.pkg + "/Bar", c2, true));
      JarSpec a = base_jar(c, bar_a, baz, fixed_date);
      JarSpec b = a;
      replace_file(b, c.pkg + "/Bar.class", bar_b);
      out.a = pack(a);
      out.b = pack(b);
      break;
    }
    case PatternId::P8: {
      Bytes bar = classfile::serialize_class(basic_class(c.pkg + "/Bar", c, spec.seed));
      std::vector<std::string> docs = {
          "<a href=\"com/sun/source/tree.html\">com.sun.source.tree</a>",
          "<a href=\"com/sun/source/doctree.html\">com.sun.source.doctree</a>",
          "<a href=\"com/sun/source/util.html\">com.sun.source.util</a>",
      };
      for (int i = 0; i < 3; ++i) {
        docs.push_back("<a href=\"pkg" + std::to_string(c.rng.below(100)) + ".html\">pkg" +
                       std::to_string(i) + "</a>");
      }
      std::vector<std::string> docs_b = docs;
      while (docs_b == docs) c.rng.shuffle(docs_b);
      auto page = [](const std::vector<std::string>& body) {
        std::vector<std::string> lines = {"<html><body>"};
        lines.insert(lines.end(), body.begin(), body.end());
        lines.push_back("</body></html>");
        return lf_join(lines);
      };
      JarSpec a = base_jar(c, bar, baz, fixed_date);
      JarSpec b = a;
      a.files.emplace_back("apidocs/index.html", page(docs));
      b.files.emplace_back("apidocs/index.html", page(docs_b));
      out.a = pack(a);
      out.b = pack(b);
      break;
    }
    case PatternId::P9: {
      // A second context replays the same draw sequence for the variant side.
      Ctx c2(spec);
      Bytes bar_a = classfile::serialize_class(p9_class(c.pkg + "/Bar", c, false));
      Bytes bar_b = classfile::serialize_class(p9_class(c2.pkg + "/Bar", c2, true));
      JarSpec a = base_jar(c, bar_a, baz, fixed_date);
      JarSpec b = a;
      replace_file(b, c.pkg + "/Bar.class", bar_b);
      out.a = pack(a);
      out.b = pack(b);
      break;
    }
    case PatternId::P10: {
      // A second context replays the same draw sequence for the variant side.
      Ctx c2(spec);
      Bytes bar_a = classfile::serialize_class(p10_class(c.pkg + "/Bar", c, false));
      Bytes bar_b = classfile::serialize_class(p10_class(c2.pkg + "/Bar", c2, true));
      JarSpec a = base_jar(c, bar_a, baz, fixed_date);
      JarSpec b = a;
      replace_file(b, c.pkg + "/Bar.class", bar_b);
      out.a = pack(a);
      out.b = pack(b);
      break;
    }
    case PatternId::P11: {
      Bytes bar = classfile::serialize_class(basic_class(c.pkg + "/Bar", c, spec.seed));
      JarSpec a = base_jar(c, bar, baz, fixed_date);
      JarSpec b = a;
      std::vector<std::pair<std::string, Bytes>> files_b = a.files;
      while (files_b == a.files) c.rng.shuffle(files_b);
      b.files = std::move(files_b);
      out.a = pack(a);
      out.b = pack(b);
      break;
    }
    case PatternId::P12: {
      Bytes bar = classfile::serialize_class(basic_class(c.pkg + "/Bar", c, spec.seed));
      std::vector<std::string> elems = {
          "com.codahale.metrics.health;uses:=\"com.codahale.metrics,com.codahale.core\";"
          "version=\"4.2.1\"",
          "com.codahale.metrics.health.annotation;version=\"4.2.1\"",
          "com.example.api;uses:=\"com.example.spi,com.example.util\";version=\"1.0\"",
      };
      std::vector<std::string> elems_b = elems;
      while (elems_b == elems) c.rng.shuffle(elems_b);
      auto join = [](const std::vector<std::string>& v) {
        std::string out;
        for (size_t i = 0; i < v.size(); ++i) {
          if (i) out += ",";
          out += v[i];
        }
        return out;
      };
      JarSpec a = base_jar(c, bar, baz, fixed_date);
      JarSpec b = a;
      replace_file(a, "META-INF/MANIFEST.MF",
                   manifest_bytes({{"Built-By", "runner"},
                                   {"Build-Jdk", "1.8.0_292"},
                                   {"Export-Package", join(elems)}}));
      replace_file(b, "META-INF/MANIFEST.MF",
                   manifest_bytes({{"Built-By", "runner"},
                                   {"Build-Jdk", "1.8.0_292"},
                                   {"Export-Package", join(elems_b)}}));
      out.a = pack(a);
      out.b = pack(b);
      break;
    }
    case PatternId::P13: {
      Bytes bar = classfile::serialize_class(basic_class(c.pkg + "/Bar", c, spec.seed));
      std::vector<std::string> src = {
          "package org.apache.jsp;", "",
          "public final class IndexJsp {",
          "  private static java.util.Map<java.lang.String,java.lang.Long> _jspx_dependants;",
          "}"};
      std::vector<std::string> src_b = {
          "package org.apache.jsp;", "",
          "public final class IndexJsp {",
          "  private static java.util.Map<java.lang.String,java.lang.Long> _jspx_dependants;",
          "  static { _jspx_dependants = new java.util.HashMap<java.lang.String,java.lang.Long>(2);",
          "    _jspx_dependants.put(\"dep1.jar\", Long.valueOf(" +
              std::to_string(1000 + c.rng.below(5000)) + "L));",
          "    _jspx_dependants.put(\"dep2.jar\", Long.valueOf(" +
              std::to_string(1000 + c.rng.below(5000)) + "L)); }",
          "}"};
      JarSpec a = base_jar(c, bar, baz, fixed_date);
      JarSpec b = a;
      a.files.emplace_back("WEB-INF/src/IndexJsp.java", lf_join(src));
      b.files.emplace_back("WEB-INF/src/IndexJsp.java", lf_join(src_b));
      out.a = pack(a);
      out.b = pack(b);
      break;
    }
    case PatternId::P14: {
      // A second context replays the same draw sequence for the variant side.
      Ctx c2(spec);
      Bytes bar_a = classfile::serialize_class(p14_class(c.pkg + "/Bar", c, false));
      Bytes bar_b = classfile::serialize_class(p14_class(c2.pkg + "/Bar", c2, true));
      JarSpec a = base_jar(c, bar_a, baz, fixed_date);
      JarSpec b = a;
      replace_file(b, c.pkg + "/Bar.class", bar_b);
      out.a = pack(a);
      out.b = pack(b);
      break;
    }
    case PatternId::Unknown:
      break;
  }
  return out;
}

}  // namespace verijar::fixtures
