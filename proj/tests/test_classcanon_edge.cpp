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

#include <algorithm>

#include "doctest.h"
#include "verijar/classcanon.hpp"
#include "verijar/fixtures.hpp"

using namespace verijar;
using namespace verijar::classfile;
using fixtures::ClassBuilder;
using fixtures::CodeWriter;

namespace {

std::vector<uint16_t> pool_indices(const ClassModel& m) {
  std::vector<uint16_t> v;
  for (uint16_t i = 1; i < m.pool.size(); ++i) {
    if (!m.pool[i].phantom) v.push_back(i);
  }
  return v;
}

}  // namespace

TEST_CASE("annotated classes stay canonical under pool permutation") {
  ClassBuilder b("Anno");
  // @Anno(value="text", count=7, kind=Kind.A, nested=@Inner(), arr={1,2})
  ByteWriter w;
  w.u16be(1);                      // one annotation
  w.u16be(b.utf8("LAnno;"));       // type
  w.u16be(5);                      // pairs
  w.u16be(b.utf8("value"));
  w.u8('s');
  w.u16be(b.utf8("text"));
  w.u16be(b.utf8("count"));
  w.u8('I');
  w.u16be(b.int_const(7));
  w.u16be(b.utf8("kind"));
  w.u8('e');
  w.u16be(b.utf8("LKind;"));
  w.u16be(b.utf8("A"));
  w.u16be(b.utf8("nested"));
  w.u8('@');
  w.u16be(b.utf8("LInner;"));
  w.u16be(0);
  w.u16be(b.utf8("arr"));
  w.u8('[');
  w.u16be(2);
  w.u8('I');
  w.u16be(b.int_const(1));
  w.u8('I');
  w.u16be(b.int_const(2));
  b.add_class_attr("RuntimeVisibleAnnotations", w.take());
  ClassModel base = b.build();

  ClassCanonPolicy policy;
  CanonicalClassForm form = canonicalize_class(base, policy);
  // Structured rendering, not an opaque hex blob.
  bool rendered = false;
  for (const std::string& line : form.lines) {
    rendered |= line.find("annotation @LAnno;") != std::string::npos;
  }
  CHECK(rendered);

  fixtures::Rng rng(5150);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<uint16_t> order = pool_indices(base);
    rng.shuffle(order);
    PoolPermuteResult r = permute_pool(base, order);
    REQUIRE(r.ok);
    ClassModel reparsed = parse_class(as_span(serialize_class(r.model)));
    CHECK(canonicalize_class(reparsed, policy).digest == form.digest);
  }
}

TEST_CASE("record components stay canonical under pool permutation") {
  ClassBuilder b("Rec");
  ByteWriter w;
  w.u16be(2);
  w.u16be(b.utf8("name"));
  w.u16be(b.utf8("Ljava/lang/String;"));
  w.u16be(0);
  w.u16be(b.utf8("age"));
  w.u16be(b.utf8("I"));
  w.u16be(0);
  b.add_class_attr("Record", w.take());
  ClassModel base = b.build();

  ClassCanonPolicy policy;
  std::string digest = canonicalize_class(base, policy).digest;
  fixtures::Rng rng(6);
  std::vector<uint16_t> order = pool_indices(base);
  rng.shuffle(order);
  PoolPermuteResult r = permute_pool(base, order);
  REQUIRE(r.ok);
  CHECK(canonicalize_class(r.model, policy).digest == digest);
}

TEST_CASE("compressed and full stack map frames canonicalize identically") {
  // Same method twice; one side encodes the frame as append, the other as a
  // full frame. The expanded forms must agree.
  auto make = [](bool full_frame) {
    ClassBuilder b("Smt");
    CodeWriter cw;
    cw.plain(5);            // 0: iconst_2
    cw.slot_op(54, 1);      // 1: istore 1
    cw.slot_op(21, 0);      // 3: iload 0
    cw.branch(154, 14 - 5); // 5: ifne -> 14
    cw.plain(6);            // 8: iconst_3
    cw.slot_op(54, 2);      // 9: istore 2
    cw.slot_op(21, 2);      // 11: iload 2
    cw.plain(172);          // 13: ireturn
    cw.slot_op(21, 1);      // 14: iload 1
    cw.plain(172);          // 16: ireturn
    Bytes code = cw.take();
    ByteWriter smt;
    smt.u16be(1);
    if (full_frame) {
      smt.u8(255);    // full_frame
      smt.u16be(14);  // offset delta
      smt.u16be(2);   // locals: int (param), int (slot 1)
      smt.u8(1);
      smt.u8(1);
      smt.u16be(0);  // empty stack
    } else {
      smt.u8(252);    // append one local
      smt.u16be(14);
      smt.u8(1);      // int
    }
    AttrInfo smt_attr = b.attr("StackMapTable", smt.take());
    b.add_method(0x0009, "calc", "(I)I", b.code_body(2, 4, code, {smt_attr}));
    return b.build();
  };
  ClassCanonPolicy policy;
  CHECK(canonicalize_class(make(true), policy).digest ==
        canonicalize_class(make(false), policy).digest);
}

TEST_CASE("wide instructions fold onto their base form") {
  // One side stores into slot 300 via the wide form, the other into slot 1;
  // slot relabeling equates them.
  auto make = [](bool wide) {
    ClassBuilder b("Wide");
    Bytes code;
    code.push_back(3);  // iconst_0
    if (wide) {
      code.push_back(196);  // wide
      code.push_back(54);   // istore
      code.push_back(300 >> 8);
      code.push_back(300 & 0xff);
      code.push_back(196);
      code.push_back(21);  // iload
      code.push_back(300 >> 8);
      code.push_back(300 & 0xff);
    } else {
      code.push_back(54);
      code.push_back(1);
      code.push_back(21);
      code.push_back(1);
    }
    code.push_back(172);  // ireturn
    b.add_method(0x0009, "m", "()I", b.code_body(1, 302, code));
    return b.build();
  };
  ClassCanonPolicy with;
  with.relabel_slots = true;
  // max_locals differs only if we let it; pin both to the same value.
  ClassModel a = make(true);
  ClassModel bb = make(false);
  // Rewrite both Code attrs to share max_locals so only slots differ.
  CHECK(canonicalize_class(a, with).digest == canonicalize_class(bb, with).digest);
}

TEST_CASE("switch instructions decode and render with ordinal targets") {
  ClassBuilder b("Sw");
  Bytes code;
  code.push_back(21);  // 0: iload 0
  code.push_back(0);
  code.push_back(170);  // 2: tableswitch
  code.push_back(0);    // 3: pad to offset 4
  auto push_i32 = [&](int32_t v) {
    code.push_back(uint8_t(uint32_t(v) >> 24));
    code.push_back(uint8_t(uint32_t(v) >> 16));
    code.push_back(uint8_t(uint32_t(v) >> 8));
    code.push_back(uint8_t(uint32_t(v)));
  };
  // default -> 28, lo=0 hi=1, targets 26 and 27 (relative to opcode at 2).
  push_i32(28 - 2);
  push_i32(0);
  push_i32(1);
  push_i32(26 - 2);
  push_i32(27 - 2);
  code.push_back(3);    // 24... padding math: next insns below
  code.push_back(172);
  code.push_back(4);
  code.push_back(172);
  code.push_back(5);
  code.push_back(172);
  // Offsets: tableswitch spans 2..23 (1 opcode + 1 pad + 5*4), insns at
  // 24,25,26,27,28,29.
  b.add_method(0x0009, "pick", "(I)I", b.code_body(1, 1, code));
  ClassModel m = b.build();
  CanonicalClassForm form = canonicalize_class(m, ClassCanonPolicy{});
  bool found = false;
  for (const std::string& line : form.lines) {
    if (line.find("tableswitch") != std::string::npos) {
      found = true;
      CHECK(line.find("default=@") != std::string::npos);
    }
  }
  CHECK(found);
}

TEST_CASE("mutually referencing lambdas relabel to a fixed point") {
  // Two lambdas that invoke each other; the relabeling iteration must settle
  // on the same assignment for both naming variants.
  auto make = [](bool variant) {
    ClassBuilder b("Mutual");
    std::string x_name = variant ? "lambda$run$1" : "lambda$run$0";
    std::string y_name = variant ? "lambda$run$0" : "lambda$run$1";
    uint16_t ref_x = b.methodref("Mutual", x_name, "()I");
    uint16_t ref_y = b.methodref("Mutual", y_name, "()I");
    {
      CodeWriter cw;  // body X: bipush 11; invokestatic Y; iadd; ireturn
      cw.plain(16).plain(11).cp_op(184, ref_y).plain(96).plain(172);
      b.add_method(0x100a, x_name, "()I", b.code_body(2, 0, cw.take()));
    }
    {
      CodeWriter cw;  // body Y: bipush 77; invokestatic X; iadd; ireturn
      cw.plain(16).plain(77).cp_op(184, ref_x).plain(96).plain(172);
      b.add_method(0x100a, y_name, "()I", b.code_body(2, 0, cw.take()));
    }
    return b.build();
  };
  ClassCanonPolicy with;
  with.canon_lambdas = true;
  CanonicalClassForm fa = canonicalize_class(make(false), with);
  CanonicalClassForm fb = canonicalize_class(make(true), with);
  CHECK(fa.lambda_converged);
  CHECK(fb.lambda_converged);
  CHECK(fa.digest == fb.digest);
}

TEST_CASE("pool rewrite aborts when an ldc operand would overflow one byte") {
  ClassBuilder b("Ldc");
  uint16_t probe = b.string_const("probe-string");
  CodeWriter cw;
  cw.cp_op(18, probe).plain(87).plain(177);  // ldc; pop; return
  b.add_method(0x0009, "m", "()V", b.code_body(1, 0, cw.take()));
  // Integers sort before strings in the pool order, pushing the string's
  // mapped index past 255.
  for (int i = 0; i < 300; ++i) b.model().pool.push_back([&] {
    CpEntry e;
    e.tag = CpTag::Integer;
    e.u32 = uint32_t(1<<20) + uint32_t(i);
    return e;
  }());
  ClassModel m = b.build();
  ClassCanonPolicy policy;
  RewriteResult r = rewrite_class(m, policy);
  CHECK(r.pool_aborted);
  bool noted = false;
  for (const std::string& n : r.notes) noted |= n.find("ldc") != std::string::npos;
  CHECK(noted);
  // The emitted class still parses and keeps its original pool.
  ClassModel out = parse_class(as_span(r.bytes));
  CHECK(out.pool.size() == m.pool.size());
}
