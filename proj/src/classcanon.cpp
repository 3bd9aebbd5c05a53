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

#include "verijar/classcanon.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <sstream>

#include "verijar/sha.hpp"

namespace verijar::classfile {

namespace {

// ---------------------------------------------------------------------------
// Bytecode decoding
// ---------------------------------------------------------------------------

enum OpKind : uint8_t {
  K_PLAIN,
  K_CP8,      // ldc
  K_CP16,     // two-byte constant pool operand
  K_CP16_2Z,  // invokedynamic: cp16 + two zero bytes
  K_CP16_U1Z, // invokeinterface: cp16 + count + zero
  K_CP16_U1,  // multianewarray: cp16 + dimensions
  K_SLOT,     // local variable index (u1, u2 under wide)
  K_IINC,
  K_I8,       // bipush
  K_I16,      // sipush
  K_U1,       // newarray atype
  K_BR16,
  K_BR32,
  K_TABLE,
  K_LOOKUP,
  K_WIDE,
  K_BAD,
};

struct OpInfo {
  const char* name;
  OpKind kind;
};

const OpInfo kOps[202] = {
    {"nop", K_PLAIN}, {"aconst_null", K_PLAIN}, {"iconst_m1", K_PLAIN},
    {"iconst_0", K_PLAIN}, {"iconst_1", K_PLAIN}, {"iconst_2", K_PLAIN},
    {"iconst_3", K_PLAIN}, {"iconst_4", K_PLAIN}, {"iconst_5", K_PLAIN},
    {"lconst_0", K_PLAIN}, {"lconst_1", K_PLAIN}, {"fconst_0", K_PLAIN},
    {"fconst_1", K_PLAIN}, {"fconst_2", K_PLAIN}, {"dconst_0", K_PLAIN},
    {"dconst_1", K_PLAIN}, {"bipush", K_I8}, {"sipush", K_I16},
    {"ldc", K_CP8}, {"ldc_w", K_CP16}, {"ldc2_w", K_CP16},
    {"iload", K_SLOT}, {"lload", K_SLOT}, {"fload", K_SLOT},
    {"dload", K_SLOT}, {"aload", K_SLOT},
    {"iload_0", K_PLAIN}, {"iload_1", K_PLAIN}, {"iload_2", K_PLAIN}, {"iload_3", K_PLAIN},
    {"lload_0", K_PLAIN}, {"lload_1", K_PLAIN}, {"lload_2", K_PLAIN}, {"lload_3", K_PLAIN},
    {"fload_0", K_PLAIN}, {"fload_1", K_PLAIN}, {"fload_2", K_PLAIN}, {"fload_3", K_PLAIN},
    {"dload_0", K_PLAIN}, {"dload_1", K_PLAIN}, {"dload_2", K_PLAIN}, {"dload_3", K_PLAIN},
    {"aload_0", K_PLAIN}, {"aload_1", K_PLAIN}, {"aload_2", K_PLAIN}, {"aload_3", K_PLAIN},
    {"iaload", K_PLAIN}, {"laload", K_PLAIN}, {"faload", K_PLAIN}, {"daload", K_PLAIN},
    {"aaload", K_PLAIN}, {"baload", K_PLAIN}, {"caload", K_PLAIN}, {"saload", K_PLAIN},
    {"istore", K_SLOT}, {"lstore", K_SLOT}, {"fstore", K_SLOT},
    {"dstore", K_SLOT}, {"astore", K_SLOT},
    {"istore_0", K_PLAIN}, {"istore_1", K_PLAIN}, {"istore_2", K_PLAIN}, {"istore_3", K_PLAIN},
    {"lstore_0", K_PLAIN}, {"lstore_1", K_PLAIN}, {"lstore_2", K_PLAIN}, {"lstore_3", K_PLAIN},
    {"fstore_0", K_PLAIN}, {"fstore_1", K_PLAIN}, {"fstore_2", K_PLAIN}, {"fstore_3", K_PLAIN},
    {"dstore_0", K_PLAIN}, {"dstore_1", K_PLAIN}, {"dstore_2", K_PLAIN}, {"dstore_3", K_PLAIN},
    {"astore_0", K_PLAIN}, {"astore_1", K_PLAIN}, {"astore_2", K_PLAIN}, {"astore_3", K_PLAIN},
    {"iastore", K_PLAIN}, {"lastore", K_PLAIN}, {"fastore", K_PLAIN}, {"dastore", K_PLAIN},
    {"aastore", K_PLAIN}, {"bastore", K_PLAIN}, {"castore", K_PLAIN}, {"sastore", K_PLAIN},
    {"pop", K_PLAIN}, {"pop2", K_PLAIN}, {"dup", K_PLAIN}, {"dup_x1", K_PLAIN},
    {"dup_x2", K_PLAIN}, {"dup2", K_PLAIN}, {"dup2_x1", K_PLAIN}, {"dup2_x2", K_PLAIN},
    {"swap", K_PLAIN},
    {"iadd", K_PLAIN}, {"ladd", K_PLAIN}, {"fadd", K_PLAIN}, {"dadd", K_PLAIN},
    {"isub", K_PLAIN}, {"lsub", K_PLAIN}, {"fsub", K_PLAIN}, {"dsub", K_PLAIN},
    {"imul", K_PLAIN}, {"lmul", K_PLAIN}, {"fmul", K_PLAIN}, {"dmul", K_PLAIN},
    {"idiv", K_PLAIN}, {"ldiv", K_PLAIN}, {"fdiv", K_PLAIN}, {"ddiv", K_PLAIN},
    {"irem", K_PLAIN}, {"lrem", K_PLAIN}, {"frem", K_PLAIN}, {"drem", K_PLAIN},
    {"ineg", K_PLAIN}, {"lneg", K_PLAIN}, {"fneg", K_PLAIN}, {"dneg", K_PLAIN},
    {"ishl", K_PLAIN}, {"lshl", K_PLAIN}, {"ishr", K_PLAIN}, {"lshr", K_PLAIN},
    {"iushr", K_PLAIN}, {"lushr", K_PLAIN},
    {"iand", K_PLAIN}, {"land", K_PLAIN}, {"ior", K_PLAIN}, {"lor", K_PLAIN},
    {"ixor", K_PLAIN}, {"lxor", K_PLAIN},
    {"iinc", K_IINC},
    {"i2l", K_PLAIN}, {"i2f", K_PLAIN}, {"i2d", K_PLAIN}, {"l2i", K_PLAIN},
    {"l2f", K_PLAIN}, {"l2d", K_PLAIN}, {"f2i", K_PLAIN}, {"f2l", K_PLAIN},
    {"f2d", K_PLAIN}, {"d2i", K_PLAIN}, {"d2l", K_PLAIN}, {"d2f", K_PLAIN},
    {"i2b", K_PLAIN}, {"i2c", K_PLAIN}, {"i2s", K_PLAIN},
    {"lcmp", K_PLAIN}, {"fcmpl", K_PLAIN}, {"fcmpg", K_PLAIN},
    {"dcmpl", K_PLAIN}, {"dcmpg", K_PLAIN},
    {"ifeq", K_BR16}, {"ifne", K_BR16}, {"iflt", K_BR16}, {"ifge", K_BR16},
    {"ifgt", K_BR16}, {"ifle", K_BR16},
    {"if_icmpeq", K_BR16}, {"if_icmpne", K_BR16}, {"if_icmplt", K_BR16},
    {"if_icmpge", K_BR16}, {"if_icmpgt", K_BR16}, {"if_icmple", K_BR16},
    {"if_acmpeq", K_BR16}, {"if_acmpne", K_BR16},
    {"goto", K_BR16}, {"jsr", K_BR16}, {"ret", K_SLOT},
    {"tableswitch", K_TABLE}, {"lookupswitch", K_LOOKUP},
    {"ireturn", K_PLAIN}, {"lreturn", K_PLAIN}, {"freturn", K_PLAIN},
    {"dreturn", K_PLAIN}, {"areturn", K_PLAIN}, {"return", K_PLAIN},
    {"getstatic", K_CP16}, {"putstatic", K_CP16}, {"getfield", K_CP16},
    {"putfield", K_CP16},
    {"invokevirtual", K_CP16}, {"invokespecial", K_CP16}, {"invokestatic", K_CP16},
    {"invokeinterface", K_CP16_U1Z}, {"invokedynamic", K_CP16_2Z},
    {"new", K_CP16}, {"newarray", K_U1}, {"anewarray", K_CP16},
    {"arraylength", K_PLAIN}, {"athrow", K_PLAIN},
    {"checkcast", K_CP16}, {"instanceof", K_CP16},
    {"monitorenter", K_PLAIN}, {"monitorexit", K_PLAIN},
    {"wide", K_WIDE}, {"multianewarray", K_CP16_U1},
    {"ifnull", K_BR16}, {"ifnonnull", K_BR16},
    {"goto_w", K_BR32}, {"jsr_w", K_BR32},
};

struct Insn {
  uint32_t offset = 0;
  uint32_t length = 0;
  uint8_t op = 0;          // base opcode (wide and _n forms folded)
  uint8_t raw_op = 0;      // opcode byte as found
  bool wide = false;
  int32_t slot = -1;       // local variable index, if any
  int32_t imm = 0;         // bipush/sipush/newarray/iinc delta/invokeinterface count
  uint16_t cp = 0;         // constant pool operand, if any
  int32_t branch = -1;     // absolute target offset
  int32_t switch_default = -1;
  int32_t switch_lo = 0, switch_hi = 0;
  std::vector<int32_t> switch_keys;     // lookupswitch match keys
  std::vector<int32_t> switch_targets;  // absolute target offsets
  size_t cp_operand_pos = 0;            // byte position of the cp operand
};

// Folds iload_2 style opcodes onto their base form.
bool implicit_slot(uint8_t op, uint8_t& base, int& slot) {
  if (op >= 26 && op <= 45) {  // *load_n
    base = uint8_t(21 + (op - 26) / 4);
    slot = (op - 26) % 4;
    return true;
  }
  if (op >= 59 && op <= 78) {  // *store_n
    base = uint8_t(54 + (op - 59) / 4);
    slot = (op - 59) % 4;
    return true;
  }
  return false;
}

bool slot_op_is_wide_type(uint8_t base) {
  return base == 22 || base == 24 || base == 55 || base == 57;  // lload dload lstore dstore
}

std::vector<Insn> decode_code(ByteSpan code) {
  std::vector<Insn> out;
  ByteReader r(code);
  while (!r.done()) {
    Insn in;
    in.offset = uint32_t(r.pos());
    uint8_t op = r.u8();
    in.raw_op = op;
    if (op > 201) throw MalformedClass("unknown opcode");
    uint8_t base = op;
    int slot = -1;
    if (implicit_slot(op, base, slot)) {
      in.op = base;
      in.slot = slot;
      in.length = 1;
      out.push_back(in);
      continue;
    }
    OpKind kind = kOps[op].kind;
    if (kind == K_WIDE) {
      uint8_t inner = r.u8();
      if (inner == 132) {  // iinc
        in.op = 132;
        in.wide = true;
        in.slot = r.u16be();
        in.imm = int16_t(r.u16be());
      } else if (kOps[inner].kind == K_SLOT) {
        in.op = inner;
        in.wide = true;
        in.slot = r.u16be();
      } else {
        throw MalformedClass("invalid wide instruction");
      }
      in.length = uint32_t(r.pos()) - in.offset;
      out.push_back(in);
      continue;
    }
    in.op = op;
    switch (kind) {
      case K_PLAIN:
        break;
      case K_CP8:
        in.cp_operand_pos = r.pos();
        in.cp = r.u8();
        break;
      case K_CP16:
        in.cp_operand_pos = r.pos();
        in.cp = r.u16be();
        break;
      case K_CP16_2Z:
        in.cp_operand_pos = r.pos();
        in.cp = r.u16be();
        r.skip(2);
        break;
      case K_CP16_U1Z:
        in.cp_operand_pos = r.pos();
        in.cp = r.u16be();
        in.imm = r.u8();
        r.skip(1);
        break;
      case K_CP16_U1:
        in.cp_operand_pos = r.pos();
        in.cp = r.u16be();
        in.imm = r.u8();
        break;
      case K_SLOT:
        in.slot = r.u8();
        break;
      case K_IINC:
        in.slot = r.u8();
        in.imm = int8_t(r.u8());
        break;
      case K_I8:
        in.imm = int8_t(r.u8());
        break;
      case K_I16:
        in.imm = int16_t(r.u16be());
        break;
      case K_U1:
        in.imm = r.u8();
        break;
      case K_BR16:
        in.branch = int32_t(in.offset) + int16_t(r.u16be());
        break;
      case K_BR32:
        in.branch = int32_t(in.offset) + int32_t(r.u32be());
        break;
      case K_TABLE: {
        while (r.pos() % 4 != 0) r.skip(1);
        in.switch_default = int32_t(in.offset) + int32_t(r.u32be());
        in.switch_lo = int32_t(r.u32be());
        in.switch_hi = int32_t(r.u32be());
        if (in.switch_hi < in.switch_lo) throw MalformedClass("bad tableswitch bounds");
        int64_t n = int64_t(in.switch_hi) - in.switch_lo + 1;
        for (int64_t i = 0; i < n; ++i) {
          in.switch_targets.push_back(int32_t(in.offset) + int32_t(r.u32be()));
        }
        break;
      }
      case K_LOOKUP: {
        while (r.pos() % 4 != 0) r.skip(1);
        in.switch_default = int32_t(in.offset) + int32_t(r.u32be());
        int32_t n = int32_t(r.u32be());
        if (n < 0) throw MalformedClass("bad lookupswitch count");
        for (int32_t i = 0; i < n; ++i) {
          in.switch_keys.push_back(int32_t(r.u32be()));
          in.switch_targets.push_back(int32_t(in.offset) + int32_t(r.u32be()));
        }
        break;
      }
      case K_WIDE:
      case K_BAD:
        throw MalformedClass("unexpected opcode");
    }
    in.length = uint32_t(r.pos()) - in.offset;
    out.push_back(in);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Code attribute
// ---------------------------------------------------------------------------

struct ExcEntry {
  uint16_t start, end, handler, catch_type;
};

struct CodeAttr {
  uint16_t max_stack = 0;
  uint16_t max_locals = 0;
  Bytes code;
  std::vector<ExcEntry> table;
  std::vector<AttrInfo> attrs;
};

CodeAttr parse_code(ByteSpan body, const ClassModel& model) {
  ByteReader r(body);
  CodeAttr c;
  c.max_stack = r.u16be();
  c.max_locals = r.u16be();
  uint32_t code_len = r.u32be();
  c.code = r.take_bytes(code_len);
  uint16_t exc = r.u16be();
  for (uint16_t i = 0; i < exc; ++i) {
    c.table.push_back({r.u16be(), r.u16be(), r.u16be(), r.u16be()});
  }
  uint16_t n = r.u16be();
  for (uint16_t i = 0; i < n; ++i) {
    AttrInfo a;
    a.name_index = r.u16be();
    a.name = model.utf8_at(a.name_index);
    uint32_t len = r.u32be();
    a.body = r.take_bytes(len);
    c.attrs.push_back(std::move(a));
  }
  if (!r.done()) throw MalformedClass("trailing bytes in Code attribute");
  return c;
}

Bytes serialize_code(const CodeAttr& c) {
  ByteWriter w;
  w.u16be(c.max_stack);
  w.u16be(c.max_locals);
  w.u32be(uint32_t(c.code.size()));
  w.raw(c.code);
  w.u16be(uint16_t(c.table.size()));
  for (const ExcEntry& e : c.table) {
    w.u16be(e.start);
    w.u16be(e.end);
    w.u16be(e.handler);
    w.u16be(e.catch_type);
  }
  w.u16be(uint16_t(c.attrs.size()));
  for (const AttrInfo& a : c.attrs) {
    w.u16be(a.name_index);
    w.u32be(uint32_t(a.body.size()));
    w.raw(a.body);
  }
  return w.take();
}

// ---------------------------------------------------------------------------
// Constant resolution
// ---------------------------------------------------------------------------

std::string escape_utf8(ByteSpan raw) {
  std::string out;
  out.reserve(raw.size());
  for (uint8_t c : raw) {
    if (c >= 0x20 && c < 0x7f && c != '\\') {
      out.push_back(char(c));
    } else {
      static const char* kHex = "0123456789abcdef";
      out += "\\x";
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0xf]);
    }
  }
  return out;
}

struct BootstrapEntry {
  uint16_t method_ref;
  std::vector<uint16_t> args;
};

std::vector<BootstrapEntry> parse_bootstrap(const ClassModel& model) {
  std::vector<BootstrapEntry> out;
  const AttrInfo* a = model.find_attr("BootstrapMethods");
  if (!a) return out;
  ByteReader r(as_span(a->body));
  uint16_t n = r.u16be();
  for (uint16_t i = 0; i < n; ++i) {
    BootstrapEntry e;
    e.method_ref = r.u16be();
    uint16_t argc = r.u16be();
    for (uint16_t j = 0; j < argc; ++j) e.args.push_back(r.u16be());
    out.push_back(std::move(e));
  }
  return out;
}

// Renders constants as index-free text. An optional rename map rewrites
// method names owned by this class (used for lambda relabeling).
class Resolver {
 public:
  explicit Resolver(const ClassModel& model,
                    const std::map<std::string, std::string>* rename = nullptr)
      : model_(model), rename_(rename), bootstrap_(parse_bootstrap(model)) {
    this_name_ = model.class_name_at(model.this_class);
  }

  const std::string& this_class_name() const { return this_name_; }

  std::string mapped_name(const std::string& owner, const std::string& name) const {
    if (rename_ && owner == this_name_) {
      auto it = rename_->find(name);
      if (it != rename_->end()) return it->second;
    }
    return name;
  }

  std::string declared_method_name(const std::string& name) const {
    if (rename_) {
      auto it = rename_->find(name);
      if (it != rename_->end()) return it->second;
    }
    return name;
  }

  std::string utf8(uint16_t idx) const {
    const CpEntry& e = model_.cp(idx);
    if (e.tag != CpTag::Utf8) throw MalformedClass("expected Utf8 constant");
    return escape_utf8(as_span(e.utf8));
  }

  std::string resolve(uint16_t idx) const {
    const CpEntry& e = model_.cp(idx);
    char buf[64];
    switch (e.tag) {
      case CpTag::Utf8:
        return "utf8 " + escape_utf8(as_span(e.utf8));
      case CpTag::Integer:
        snprintf(buf, sizeof(buf), "int %d", int32_t(e.u32));
        return buf;
      case CpTag::Float:
        snprintf(buf, sizeof(buf), "float bits=0x%08x", e.u32);
        return buf;
      case CpTag::Long:
        snprintf(buf, sizeof(buf), "long %lld", (long long)int64_t(e.u64));
        return buf;
      case CpTag::Double:
        snprintf(buf, sizeof(buf), "double bits=0x%016llx", (unsigned long long)e.u64);
        return buf;
      case CpTag::Class:
        return "class " + utf8(e.ref1);
      case CpTag::String:
        return "string " + utf8(e.ref1);
      case CpTag::Fieldref:
        return "fieldref " + member_ref(e);
      case CpTag::Methodref:
        return "methodref " + member_ref(e);
      case CpTag::InterfaceMethodref:
        return "interfacemethodref " + member_ref(e);
      case CpTag::NameAndType:
        return "nat " + utf8(e.ref1) + ":" + utf8(e.ref2);
      case CpTag::MethodHandle:
        snprintf(buf, sizeof(buf), "methodhandle kind=%d ", e.mh_kind);
        return buf + resolve(e.ref1);
      case CpTag::MethodType:
        return "methodtype " + utf8(e.ref1);
      case CpTag::Dynamic:
        return "dynamic " + bootstrap_text(e.ref1) + " " + resolve(e.ref2);
      case CpTag::InvokeDynamic:
        return "invokedynamic " + bootstrap_text(e.ref1) + " " + resolve(e.ref2);
      case CpTag::Module:
        return "module " + utf8(e.ref1);
      case CpTag::Package:
        return "package " + utf8(e.ref1);
    }
    return "?";
  }

  std::string class_name(uint16_t idx) const { return model_.class_name_at(idx); }

 private:
  std::string member_ref(const CpEntry& e) const {
    std::string owner = class_name(e.ref1);
    const CpEntry& nat = model_.cp(e.ref2);
    if (nat.tag != CpTag::NameAndType) throw MalformedClass("expected NameAndType");
    std::string name = mapped_name(owner, model_.utf8_at(nat.ref1));
    return escape_utf8(as_span(to_bytes(owner))) + "." + escape_utf8(as_span(to_bytes(name))) +
           ":" + utf8(nat.ref2);
  }

  std::string bootstrap_text(uint16_t bsm_index) const {
    if (bsm_index >= bootstrap_.size()) return "bsm=<missing>";
    const BootstrapEntry& b = bootstrap_[bsm_index];
    std::string out = "bsm={" + resolve(b.method_ref);
    if (!b.args.empty()) {
      out += " args=[";
      for (size_t i = 0; i < b.args.size(); ++i) {
        if (i) out += ", ";
        out += resolve(b.args[i]);
      }
      out += "]";
    }
    return out + "}";
  }

  const ClassModel& model_;
  const std::map<std::string, std::string>* rename_;
  std::vector<BootstrapEntry> bootstrap_;
  std::string this_name_;
};

// ---------------------------------------------------------------------------
// Slot relabeling
// ---------------------------------------------------------------------------

struct SlotMap {
  bool active = false;
  bool fallback = false;
  int params = 0;
  int next = 0;
  std::map<int, int> map;
  std::set<int> taken;

  // Registers a use of `slot` with the given width; returns false on an
  // inconsistent pairing (the caller then falls back to identity).
  bool visit(int slot, int width) {
    if (!active || fallback) return true;
    if (slot < params) {
      return true;  // receiver and parameter slots are fixed
    }
    auto it = map.find(slot);
    if (it != map.end()) {
      if (width == 2) {
        auto second = map.find(slot + 1);
        if (second == map.end()) {
          if (taken.count(it->second + 1)) return false;
          map[slot + 1] = it->second + 1;
          taken.insert(it->second + 1);
        } else if (second->second != it->second + 1) {
          return false;
        }
      }
      return true;
    }
    int assigned = next;
    map[slot] = assigned;
    taken.insert(assigned);
    next += 1;
    if (width == 2) {
      auto second = map.find(slot + 1);
      if (second != map.end()) return second->second == assigned + 1;
      map[slot + 1] = assigned + 1;
      taken.insert(assigned + 1);
      next += 1;
    }
    return true;
  }

  int remap(int slot) {
    if (!active || fallback || slot < params) return slot;
    auto it = map.find(slot);
    if (it != map.end()) return it->second;
    // A slot appearing only in debug tables: extend deterministically.
    int assigned = next++;
    map[slot] = assigned;
    taken.insert(assigned);
    return assigned;
  }
};

// ---------------------------------------------------------------------------
// StackMapTable
// ---------------------------------------------------------------------------

struct VType {
  uint8_t tag = 0;       // verification type tag
  std::string text;      // resolved class name or uninit marker
  int width() const { return (tag == 4 || tag == 3) ? 2 : 1; }  // Long/Double
  bool is_top() const { return tag == 0; }
};

struct SmtFrame {
  uint32_t offset = 0;
  std::vector<VType> locals;
  std::vector<VType> stack;
};

std::string vtype_text(const VType& v) {
  switch (v.tag) {
    case 0: return "top";
    case 1: return "int";
    case 2: return "float";
    case 3: return "double";
    case 4: return "long";
    case 5: return "null";
    case 6: return "uninit_this";
    case 7: return "ref " + v.text;
    case 8: return "uninit@" + v.text;
  }
  return "?";
}

class SmtParser {
 public:
  SmtParser(const ClassModel& model, const std::map<uint32_t, size_t>& insn_index)
      : model_(model), insn_index_(insn_index) {}

  VType read_vtype(ByteReader& r) {
    VType v;
    v.tag = r.u8();
    if (v.tag > 8) throw MalformedClass("invalid verification type tag");
    if (v.tag == 7) {
      v.text = model_.class_name_at(r.u16be());
    } else if (v.tag == 8) {
      uint32_t off = r.u16be();
      auto it = insn_index_.find(off);
      v.text = it != insn_index_.end() ? "insn" + std::to_string(it->second)
                                       : "off" + std::to_string(off);
    }
    return v;
  }

  // Expands the compressed frame sequence into absolute frames.
  std::vector<SmtFrame> expand(ByteSpan body, std::vector<VType> initial_locals) {
    ByteReader r(body);
    uint16_t count = r.u16be();
    std::vector<SmtFrame> frames;
    std::vector<VType> locals = std::move(initial_locals);
    uint32_t offset = 0;
    for (uint16_t i = 0; i < count; ++i) {
      uint8_t type = r.u8();
      uint32_t delta;
      std::vector<VType> stack;
      if (type <= 63) {
        delta = type;
      } else if (type <= 127) {
        delta = type - 64;
        stack.push_back(read_vtype(r));
      } else if (type == 247) {
        delta = r.u16be();
        stack.push_back(read_vtype(r));
      } else if (type >= 248 && type <= 250) {
        delta = r.u16be();
        int chop = 251 - type;
        for (int k = 0; k < chop; ++k) {
          if (locals.empty()) throw MalformedClass("stack map chops past empty locals");
          locals.pop_back();
        }
      } else if (type == 251) {
        delta = r.u16be();
      } else if (type >= 252 && type <= 254) {
        delta = r.u16be();
        int append = type - 251;
        for (int k = 0; k < append; ++k) locals.push_back(read_vtype(r));
      } else if (type == 255) {
        delta = r.u16be();
        uint16_t nlocals = r.u16be();
        locals.clear();
        for (uint16_t k = 0; k < nlocals; ++k) locals.push_back(read_vtype(r));
        uint16_t nstack = r.u16be();
        for (uint16_t k = 0; k < nstack; ++k) stack.push_back(read_vtype(r));
      } else {
        throw MalformedClass("reserved stack map frame type");
      }
      offset = frames.empty() ? delta : offset + delta + 1;
      SmtFrame f;
      f.offset = offset;
      f.locals = locals;
      f.stack = std::move(stack);
      frames.push_back(std::move(f));
    }
    return frames;
  }

 private:
  const ClassModel& model_;
  const std::map<uint32_t, size_t>& insn_index_;
};

std::vector<VType> initial_frame_locals(const ClassModel& model, const MemberInfo& method) {
  std::vector<VType> out;
  std::string name = model.utf8_at(method.name_index);
  std::string desc = model.utf8_at(method.descriptor_index);
  bool is_static = method.access_flags & 0x0008;
  if (!is_static) {
    VType v;
    if (name == "<init>") {
      v.tag = 6;
    } else {
      v.tag = 7;
      v.text = model.this_class_name();
    }
    out.push_back(v);
  }
  size_t i = 1;
  while (i < desc.size() && desc[i] != ')') {
    VType v;
    size_t start = i;
    while (i < desc.size() && desc[i] == '[') ++i;
    bool is_array = i > start;
    char c = desc[i];
    if (c == 'L') {
      size_t end = desc.find(';', i);
      if (end == std::string::npos) throw MalformedClass("invalid descriptor");
      v.tag = 7;
      v.text = is_array ? desc.substr(start, end - start + 1)
                        : desc.substr(i + 1, end - i - 1);
      i = end + 1;
    } else {
      if (is_array) {
        v.tag = 7;
        v.text = desc.substr(start, i - start + 1);
      } else if (c == 'J') {
        v.tag = 4;
      } else if (c == 'D') {
        v.tag = 3;
      } else if (c == 'F') {
        v.tag = 2;
      } else {
        v.tag = 1;  // B C I S Z
      }
      ++i;
    }
    out.push_back(v);
  }
  return out;
}

// Permutes a frame's locals through the slot bijection.
std::vector<VType> permute_locals(const std::vector<VType>& locals, SlotMap& slots,
                                  bool* ok) {
  *ok = true;
  std::vector<std::pair<int, VType>> placed;
  int slot = 0;
  for (const VType& v : locals) {
    if (!v.is_top()) placed.emplace_back(slot, v);
    slot += v.width();
  }
  std::map<int, VType> by_new_slot;
  for (auto& [s, v] : placed) {
    int ns = slots.remap(s);
    if (by_new_slot.count(ns)) {
      *ok = false;
      return locals;
    }
    by_new_slot[ns] = v;
  }
  std::vector<VType> out;
  int cursor = 0;
  for (auto& [ns, v] : by_new_slot) {
    if (ns < cursor) {
      *ok = false;  // a wide value overlaps its neighbor after remapping
      return locals;
    }
    while (cursor < ns) {
      out.push_back(VType{});  // filler
      ++cursor;
    }
    out.push_back(v);
    cursor += v.width();
  }
  return out;
}

std::string join_vtypes(const std::vector<VType>& v) {
  std::string out = "[";
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += vtype_text(v[i]);
  }
  return out + "]";
}

// ---------------------------------------------------------------------------
// Canonical form emission
// ---------------------------------------------------------------------------

struct Emitter {
  CanonicalClassForm form;
  void emit(const std::string& locus, const std::string& line) {
    form.loci.push_back(locus);
    form.lines.push_back(line);
  }
};


class Canonicalizer {
 public:
  Canonicalizer(const ClassModel& model, const ClassCanonPolicy& policy,
                const std::map<std::string, std::string>* rename)
      : model_(model), policy_(policy), res_(model, rename) {}

  CanonicalClassForm run() {
    char buf[96];
    snprintf(buf, sizeof(buf), "class version=%u.%u flags=0x%04x", model_.major_version,
             model_.minor_version, model_.access_flags);
    out_.emit("class", buf);
    out_.emit("class", "this " + res_.class_name(model_.this_class));
    out_.emit("class", model_.super_class
                           ? "super " + res_.class_name(model_.super_class)
                           : "super <none>");
    for (uint16_t i : model_.interfaces) {
      out_.emit("class", "interface " + res_.class_name(i));
    }
    for (const MemberInfo& f : model_.fields) emit_member("field", f);

    std::vector<const MemberInfo*> methods;
    for (const MemberInfo& m : model_.methods) methods.push_back(&m);
    if (policy_.sort_methods) {
      std::stable_sort(methods.begin(), methods.end(),
                       [&](const MemberInfo* a, const MemberInfo* b) {
                         auto key = [&](const MemberInfo* m) {
                           return std::make_pair(
                               res_.declared_method_name(model_.utf8_at(m->name_index)),
                               model_.utf8_at(m->descriptor_index));
                         };
                         return key(a) < key(b);
                       });
    }
    for (const MemberInfo* m : methods) emit_member("method", *m);
    for (const AttrInfo& a : model_.attributes) emit_attr("class", a, nullptr);

    out_.form.digest = digest_lines(out_.form.lines);
    for (std::string& n : notes_) out_.form.notes.push_back(std::move(n));
    return std::move(out_.form);
  }

  // Canonical text of one method only; used to order lambdas by content.
  static std::string method_body_text(const ClassModel& model,
                                      const ClassCanonPolicy& policy,
                                      const std::map<std::string, std::string>* rename,
                                      const MemberInfo& method) {
    Canonicalizer c(model, policy, rename);
    c.emit_member("method", method);
    std::string joined;
    for (const std::string& l : c.out_.form.lines) {
      joined += l;
      joined += '\n';
    }
    return joined;
  }

  static std::string digest_lines(const std::vector<std::string>& lines) {
    std::string joined;
    for (const std::string& l : lines) {
      joined += l;
      joined += '\n';
    }
    return sha256_hex(as_span(std::string_view(joined)));
  }



 private:
  void emit_member(const std::string& kind, const MemberInfo& m) {
    std::string raw_name = model_.utf8_at(m.name_index);
    std::string name = kind == "method" ? res_.declared_method_name(raw_name) : raw_name;
    std::string desc = model_.utf8_at(m.descriptor_index);
    std::string locus = kind + " " + name + ":" + desc;
    char buf[64];
    snprintf(buf, sizeof(buf), " flags=0x%04x", m.access_flags);
    out_.emit(locus, kind + " name=" + escape_utf8(as_span(to_bytes(name))) +
                         " desc=" + escape_utf8(as_span(to_bytes(desc))) + buf);
    for (const AttrInfo& a : m.attributes) emit_attr(locus, a, &m);
  }

  void emit_attr(const std::string& parent, const AttrInfo& a, const MemberInfo* member) {
    std::string locus = parent + " / " + a.name;
    try {
      if (a.name == "Code" && member) {
        emit_code(locus, a, *member);
      } else if (a.name == "InnerClasses") {
        emit_inner_classes(locus, a);
      } else if (a.name == "BootstrapMethods") {
        emit_bootstrap(locus, a);
      } else if (a.name == "ConstantValue") {
        ByteReader r(as_span(a.body));
        out_.emit(locus, "attr ConstantValue " + res_.resolve(r.u16be()));
      } else if (a.name == "Exceptions") {
        ByteReader r(as_span(a.body));
        uint16_t n = r.u16be();
        std::string line = "attr Exceptions";
        for (uint16_t i = 0; i < n; ++i) line += " " + res_.class_name(r.u16be());
        out_.emit(locus, line);
      } else if (a.name == "Signature") {
        ByteReader r(as_span(a.body));
        out_.emit(locus, "attr Signature " + res_.utf8(r.u16be()));
      } else if (a.name == "SourceFile") {
        ByteReader r(as_span(a.body));
        out_.emit(locus, "attr SourceFile " + res_.utf8(r.u16be()));
      } else if (a.name == "EnclosingMethod") {
        ByteReader r(as_span(a.body));
        uint16_t cls = r.u16be();
        uint16_t nat = r.u16be();
        std::string line = "attr EnclosingMethod " + res_.class_name(cls);
        if (nat) line += " " + res_.resolve(nat);
        out_.emit(locus, line);
      } else if (a.name == "NestHost") {
        ByteReader r(as_span(a.body));
        out_.emit(locus, "attr NestHost " + res_.class_name(r.u16be()));
      } else if (a.name == "NestMembers" || a.name == "PermittedSubclasses") {
        ByteReader r(as_span(a.body));
        uint16_t n = r.u16be();
        std::string line = "attr " + a.name;
        for (uint16_t i = 0; i < n; ++i) line += " " + res_.class_name(r.u16be());
        out_.emit(locus, line);
      } else if (a.name == "MethodParameters") {
        ByteReader r(as_span(a.body));
        uint8_t n = r.u8();
        for (uint8_t i = 0; i < n; ++i) {
          uint16_t name = r.u16be();
          uint16_t flags = r.u16be();
          char buf[48];
          snprintf(buf, sizeof(buf), " flags=0x%04x", flags);
          out_.emit(locus, "param " + (name ? res_.utf8(name) : std::string("<anon>")) + buf);
        }
      } else if (a.name == "Synthetic" || a.name == "Deprecated") {
        out_.emit(locus, "attr " + a.name);
      } else if (a.name == "RuntimeVisibleAnnotations" ||
                 a.name == "RuntimeInvisibleAnnotations") {
        ByteReader r(as_span(a.body));
        uint16_t n = r.u16be();
        for (uint16_t i = 0; i < n; ++i) {
          out_.emit(locus, "annotation " + annotation_text(r));
        }
      } else if (a.name == "RuntimeVisibleParameterAnnotations" ||
                 a.name == "RuntimeInvisibleParameterAnnotations") {
        ByteReader r(as_span(a.body));
        uint8_t params = r.u8();
        for (uint8_t p = 0; p < params; ++p) {
          uint16_t n = r.u16be();
          for (uint16_t i = 0; i < n; ++i) {
            out_.emit(locus, "param " + std::to_string(p) + " annotation " +
                                 annotation_text(r));
          }
        }
      } else if (a.name == "RuntimeVisibleTypeAnnotations" ||
                 a.name == "RuntimeInvisibleTypeAnnotations") {
        ByteReader r(as_span(a.body));
        uint16_t n = r.u16be();
        for (uint16_t i = 0; i < n; ++i) {
          std::string target = type_annotation_target(r);
          out_.emit(locus, "type-annotation " + target + " " + annotation_text(r));
        }
      } else if (a.name == "AnnotationDefault") {
        ByteReader r(as_span(a.body));
        out_.emit(locus, "attr AnnotationDefault " + element_value_text(r));
      } else if (a.name == "Record") {
        ByteReader r(as_span(a.body));
        uint16_t n = r.u16be();
        for (uint16_t i = 0; i < n; ++i) {
          uint16_t name_idx = r.u16be();
          uint16_t desc_idx = r.u16be();
          std::string comp_locus =
              locus + " / component " + res_.utf8(name_idx);
          out_.emit(comp_locus, "component " + res_.utf8(name_idx) + ":" +
                                    res_.utf8(desc_idx));
          uint16_t attrs = r.u16be();
          for (uint16_t k = 0; k < attrs; ++k) {
            AttrInfo sub;
            sub.name_index = r.u16be();
            sub.name = model_.utf8_at(sub.name_index);
            uint32_t len = r.u32be();
            sub.body = r.take_bytes(len);
            emit_attr(comp_locus, sub, nullptr);
          }
        }
      } else if (a.name == "LineNumberTable") {
        // Only reachable at class/member level (invalid placement); Code
        // handles the nested case. Treat as opaque.
        out_.emit(locus, "attr LineNumberTable raw=" + hex(as_span(a.body)));
      } else {
        out_.emit(locus, "attr " + a.name + " raw=" + hex(as_span(a.body)));
      }
    } catch (const Error& e) {
      // Resolution failure inside an attribute: keep the raw bytes so the
      // form stays total and the difference still surfaces.
      out_.emit(locus, "attr " + a.name + " unresolved(" + e.what() +
                           ")=" + hex(as_span(a.body)));
    }
  }

  // annotation = type_index (name=value, ...)
  std::string annotation_text(ByteReader& r) {
    std::string out = "@" + res_.utf8(r.u16be()) + "(";
    uint16_t pairs = r.u16be();
    for (uint16_t i = 0; i < pairs; ++i) {
      if (i) out += ", ";
      // Reads sequenced explicitly: both operands pull from the reader.
      std::string name = res_.utf8(r.u16be());
      std::string value = element_value_text(r);
      out += name + "=" + value;
    }
    return out + ")";
  }

  std::string element_value_text(ByteReader& r) {
    uint8_t tag = r.u8();
    switch (tag) {
      case 'B': case 'C': case 'D': case 'F': case 'I': case 'J':
      case 'S': case 'Z':
        return res_.resolve(r.u16be());
      case 's':
        return "\"" + res_.utf8(r.u16be()) + "\"";
      case 'e': {
        std::string type = res_.utf8(r.u16be());
        return "enum " + type + "." + res_.utf8(r.u16be());
      }
      case 'c':
        return "classdesc " + res_.utf8(r.u16be());
      case '@':
        return annotation_text(r);
      case '[': {
        uint16_t n = r.u16be();
        std::string out = "[";
        for (uint16_t i = 0; i < n; ++i) {
          if (i) out += ", ";
          out += element_value_text(r);
        }
        return out + "]";
      }
      default:
        throw MalformedClass("invalid annotation element tag");
    }
  }

  // target_info and type_path carry offsets and path steps, never pool
  // indices; render them verbatim.
  std::string type_annotation_target(ByteReader& r) {
    ByteWriter raw;
    uint8_t target_type = r.u8();
    raw.u8(target_type);
    switch (target_type) {
      case 0x00: case 0x01: case 0x16:
        raw.u8(r.u8());
        break;
      case 0x10: case 0x17: case 0x42: case 0x43: case 0x44: case 0x45: case 0x46:
        raw.u16be(r.u16be());
        break;
      case 0x11: case 0x12:
        raw.u8(r.u8());
        raw.u8(r.u8());
        break;
      case 0x13: case 0x14: case 0x15:
        break;
      case 0x40: case 0x41: {
        uint16_t n = r.u16be();
        raw.u16be(n);
        for (int i = 0; i < int(n) * 3; ++i) raw.u16be(r.u16be());
        break;
      }
      case 0x47: case 0x48: case 0x49: case 0x4a: case 0x4b:
        raw.u16be(r.u16be());
        raw.u8(r.u8());
        break;
      default:
        throw MalformedClass("invalid type annotation target");
    }
    uint8_t path_len = r.u8();
    raw.u8(path_len);
    for (int i = 0; i < int(path_len) * 2; ++i) raw.u8(r.u8());
    return "target=" + hex(as_span(raw.data()));
  }

  void emit_inner_classes(const std::string& locus, const AttrInfo& a) {
    ByteReader r(as_span(a.body));
    uint16_t n = r.u16be();
    struct Row {
      std::string inner, outer, name;
      uint16_t flags;
    };
    std::vector<Row> rows;
    for (uint16_t i = 0; i < n; ++i) {
      Row row;
      uint16_t inner = r.u16be();
      uint16_t outer = r.u16be();
      uint16_t name = r.u16be();
      row.flags = r.u16be();
      row.inner = res_.class_name(inner);
      row.outer = outer ? res_.class_name(outer) : "<none>";
      row.name = name ? res_.utf8(name) : "<anon>";
      rows.push_back(std::move(row));
    }
    if (policy_.sort_inner_classes) {
      std::stable_sort(rows.begin(), rows.end(), [](const Row& x, const Row& y) {
        return std::tie(x.inner, x.outer, x.name, x.flags) <
               std::tie(y.inner, y.outer, y.name, y.flags);
      });
    }
    for (const Row& row : rows) {
      char buf[48];
      snprintf(buf, sizeof(buf), " flags=0x%04x", row.flags);
      out_.emit(locus, "inner " + row.inner + " outer=" + row.outer +
                           " name=" + row.name + buf);
    }
  }

  void emit_bootstrap(const std::string& locus, const AttrInfo& a) {
    ByteReader r(as_span(a.body));
    uint16_t n = r.u16be();
    for (uint16_t i = 0; i < n; ++i) {
      uint16_t mref = r.u16be();
      uint16_t argc = r.u16be();
      std::string line = "bootstrap " + res_.resolve(mref);
      for (uint16_t j = 0; j < argc; ++j) line += " arg=" + res_.resolve(r.u16be());
      out_.emit(locus, line);
    }
  }

  void emit_code(const std::string& locus, const AttrInfo& a, const MemberInfo& method) {
    CodeAttr code = parse_code(as_span(a.body), model_);
    std::vector<Insn> insns = decode_code(as_span(code.code));
    std::map<uint32_t, size_t> index;
    for (size_t i = 0; i < insns.size(); ++i) index[insns[i].offset] = i;
    auto insn_at = [&](int32_t off) -> std::string {
      auto it = index.find(uint32_t(off));
      if (it != index.end()) return "@" + std::to_string(it->second);
      if (uint32_t(off) == code.code.size()) return "@end";
      return "@off" + std::to_string(off);
    };

    SlotMap slots;
    slots.active = policy_.relabel_slots;
    slots.params = param_slot_count(model_.utf8_at(method.descriptor_index),
                                    method.access_flags & 0x0008);
    slots.next = slots.params;
    if (slots.active) {
      bool ok = true;
      for (const Insn& in : insns) {
        if (in.slot >= 0) {
          int width = slot_op_is_wide_type(in.op) ? 2 : 1;
          if (!slots.visit(in.slot, width)) {
            ok = false;
            break;
          }
        }
      }
      if (ok) {
        for (const AttrInfo& sub : code.attrs) {
          if (sub.name != "LocalVariableTable" && sub.name != "LocalVariableTypeTable") {
            continue;
          }
          ByteReader r(as_span(sub.body));
          uint16_t n = r.u16be();
          for (uint16_t i = 0; i < n && ok; ++i) {
            r.skip(4);
            r.skip(2);
            uint16_t desc_idx = r.u16be();
            uint16_t slot = r.u16be();
            std::string d = model_.utf8_at(desc_idx);
            int width = (d == "J" || d == "D") ? 2 : 1;
            ok = slots.visit(slot, width);
          }
          if (!ok) break;
        }
      }
      if (!ok) {
        slots.fallback = true;
        notes_.push_back("slot relabel fallback: " + model_.utf8_at(method.name_index) +
                         model_.utf8_at(method.descriptor_index));
        out_.emit(locus, "note slot-relabel-fallback");
      }
    }

    char buf[64];
    snprintf(buf, sizeof(buf), "attr Code stack=%u locals=%u", code.max_stack,
             code.max_locals);
    out_.emit(locus, buf);
    for (size_t i = 0; i < insns.size(); ++i) {
      const Insn& in = insns[i];
      std::string line = std::to_string(i) + ": ";
      uint8_t op = in.op;
      // ldc/ldc_w load the same constant space; fold the width.
      if (op == 19) op = 18;
      line += kOps[op].name;
      switch (kOps[in.op].kind) {
        case K_PLAIN:
          if (in.slot >= 0) line += " slot=" + std::to_string(slots.remap(in.slot));
          break;
        case K_CP8:
        case K_CP16:
        case K_CP16_2Z:
          line += " " + res_.resolve(in.cp);
          break;
        case K_CP16_U1Z:
          line += " " + res_.resolve(in.cp);  // arg count derives from the descriptor
          break;
        case K_CP16_U1:
          line += " " + res_.resolve(in.cp) + " dims=" + std::to_string(in.imm);
          break;
        case K_SLOT:
          line += " slot=" + std::to_string(slots.remap(in.slot));
          break;
        case K_IINC:
          line += " slot=" + std::to_string(slots.remap(in.slot)) + " by " +
                  std::to_string(in.imm);
          break;
        case K_I8:
        case K_I16:
        case K_U1:
          line += " " + std::to_string(in.imm);
          break;
        case K_BR16:
        case K_BR32:
          line += " " + insn_at(in.branch);
          break;
        case K_TABLE: {
          line += " default=" + insn_at(in.switch_default);
          line += " " + std::to_string(in.switch_lo) + ".." + std::to_string(in.switch_hi) + " [";
          for (size_t k = 0; k < in.switch_targets.size(); ++k) {
            if (k) line += ", ";
            line += insn_at(in.switch_targets[k]);
          }
          line += "]";
          break;
        }
        case K_LOOKUP: {
          line += " default=" + insn_at(in.switch_default) + " {";
          for (size_t k = 0; k < in.switch_keys.size(); ++k) {
            if (k) line += ", ";
            line += std::to_string(in.switch_keys[k]) + ":" + insn_at(in.switch_targets[k]);
          }
          line += "}";
          break;
        }
        default:
          break;
      }
      out_.emit(locus + " / insn " + std::to_string(i), line);
    }
    for (const ExcEntry& e : code.table) {
      std::string line = "catch " + insn_at(e.start) + ".." + insn_at(e.end) + " -> " +
                         insn_at(e.handler) + " type=" +
                         (e.catch_type ? res_.class_name(e.catch_type) : "<any>");
      out_.emit(locus + " / exception-table", line);
    }
    for (const AttrInfo& sub : code.attrs) {
      std::string sub_locus = locus + " / " + sub.name;
      if (sub.name == "LineNumberTable") {
        if (policy_.strip_line_numbers) continue;
        ByteReader r(as_span(sub.body));
        uint16_t n = r.u16be();
        for (uint16_t k = 0; k < n; ++k) {
          uint16_t pc = r.u16be();
          uint16_t ln = r.u16be();
          out_.emit(sub_locus, "line " + insn_at(pc) + " = " + std::to_string(ln));
        }
      } else if (sub.name == "LocalVariableTable" || sub.name == "LocalVariableTypeTable") {
        ByteReader r(as_span(sub.body));
        uint16_t n = r.u16be();
        struct Var {
          std::string start, end, name, desc;
          int slot;
        };
        std::vector<Var> vars;
        for (uint16_t k = 0; k < n; ++k) {
          uint16_t start = r.u16be();
          uint16_t len = r.u16be();
          uint16_t name = r.u16be();
          uint16_t desc = r.u16be();
          uint16_t slot = r.u16be();
          vars.push_back({insn_at(start), insn_at(start + len), res_.utf8(name),
                          res_.utf8(desc), slots.remap(slot)});
        }
        std::stable_sort(vars.begin(), vars.end(), [](const Var& x, const Var& y) {
          return std::tie(x.start, x.end, x.name, x.desc, x.slot) <
                 std::tie(y.start, y.end, y.name, y.desc, y.slot);
        });
        for (const Var& v : vars) {
          out_.emit(sub_locus, "var " + v.name + ":" + v.desc + " slot=" +
                                   std::to_string(v.slot) + " " + v.start + ".." + v.end);
        }
      } else if (sub.name == "StackMapTable") {
        emit_stack_map(sub_locus, sub, method, index, slots);
      } else {
        emit_attr(locus, sub, nullptr);
      }
    }
  }

  void emit_stack_map(const std::string& locus, const AttrInfo& a, const MemberInfo& method,
                      const std::map<uint32_t, size_t>& index, SlotMap& slots) {
    try {
      SmtParser parser(model_, index);
      std::vector<SmtFrame> frames = parser.expand(as_span(a.body),
                                                   initial_frame_locals(model_, method));
      for (const SmtFrame& f : frames) {
        bool ok = true;
        std::vector<VType> locals =
            slots.active && !slots.fallback ? permute_locals(f.locals, slots, &ok) : f.locals;
        if (!ok) {
          slots.fallback = true;
          notes_.push_back("slot relabel fallback (stack map): " +
                           model_.utf8_at(method.name_index));
          out_.emit(locus, "note slot-relabel-fallback");
          locals = f.locals;
        }
        auto it = index.find(f.offset);
        std::string at = it != index.end() ? "@" + std::to_string(it->second)
                                           : "@off" + std::to_string(f.offset);
        out_.emit(locus, "frame " + at + " locals=" + join_vtypes(locals) +
                             " stack=" + join_vtypes(f.stack));
      }
    } catch (const Error&) {
      out_.emit(locus, "attr StackMapTable unresolved=" + hex(as_span(a.body)));
    }
  }

  const ClassModel& model_;
  const ClassCanonPolicy& policy_;
  Resolver res_;
  Emitter out_;
  std::vector<std::string> notes_;
};

// ---------------------------------------------------------------------------
// Lambda relabeling
// ---------------------------------------------------------------------------

struct LambdaInfo {
  size_t method_index;
  std::string name;       // original
  std::string enclosing;  // <m> of lambda$<m>$<k>
  uint64_t ordinal;       // original <k>
};

const std::regex& lambda_pattern() {
  static const std::regex re("^lambda\\$(.*)\\$([0-9]+)$");
  return re;
}

std::vector<LambdaInfo> find_lambdas(const ClassModel& model) {
  std::vector<LambdaInfo> out;
  for (size_t i = 0; i < model.methods.size(); ++i) {
    std::string name = model.utf8_at(model.methods[i].name_index);
    std::smatch m;
    if (std::regex_match(name, m, lambda_pattern())) {
      out.push_back({i, name, m[1].str(), std::stoull(m[2].str())});
    }
  }
  return out;
}

// Computes a rename map assigning per-group indices ordered by body content.
// The ordering refines monotonically: each pass sorts by the previous pass's
// rank first and the content digest under the current renames second, so
// mutually referencing lambdas cannot oscillate. Sets *converged accordingly.
std::map<std::string, std::string> lambda_rename_map(const ClassModel& model,
                                                     const ClassCanonPolicy& policy,
                                                     bool* converged) {
  *converged = true;
  std::vector<LambdaInfo> lambdas = find_lambdas(model);
  if (lambdas.empty()) return {};

  // Erase all indices for the first content digests.
  std::map<std::string, std::string> current;
  std::map<std::string, uint64_t> rank;
  for (const LambdaInfo& l : lambdas) {
    current[l.name] = "lambda$" + l.enclosing + "$#";
    rank[l.name] = 0;
  }
  ClassCanonPolicy body_policy = policy;
  body_policy.canon_lambdas = false;  // the map itself provides the renames

  for (int pass = 0; pass < 8; ++pass) {
    struct Keyed {
      const LambdaInfo* info;
      uint64_t prev_rank;
      std::string digest;
    };
    std::vector<Keyed> keyed;
    for (const LambdaInfo& l : lambdas) {
      std::string text = Canonicalizer::method_body_text(model, body_policy, &current,
                                                         model.methods[l.method_index]);
      keyed.push_back({&l, rank[l.name], sha256_hex(as_span(std::string_view(text)))});
    }
    std::stable_sort(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) {
      return std::tie(a.info->enclosing, a.prev_rank, a.digest, a.info->ordinal) <
             std::tie(b.info->enclosing, b.prev_rank, b.digest, b.info->ordinal);
    });
    std::map<std::string, uint64_t> next_in_group;
    std::map<std::string, std::string> proposed;
    std::map<std::string, uint64_t> new_rank;
    for (const Keyed& k : keyed) {
      uint64_t idx = next_in_group[k.info->enclosing]++;
      proposed[k.info->name] =
          "lambda$" + k.info->enclosing + "$" + std::to_string(idx);
      new_rank[k.info->name] = idx;
    }
    bool stable = proposed == current;
    current = std::move(proposed);
    rank = std::move(new_rank);
    if (stable) return current;
  }
  *converged = false;
  return current;
}

}  // namespace

std::string CanonicalClassForm::text() const {
  std::string out;
  for (const std::string& l : lines) {
    out += l;
    out += '\n';
  }
  return out;
}

CanonicalClassForm canonicalize_class(const ClassModel& model,
                                      const ClassCanonPolicy& policy) {
  std::map<std::string, std::string> rename;
  bool converged = true;
  if (policy.canon_lambdas) {
    rename = lambda_rename_map(model, policy, &converged);
  }
  Canonicalizer c(model, policy, rename.empty() ? nullptr : &rename);
  CanonicalClassForm form = c.run();
  form.lambda_converged = converged;
  if (!converged) form.notes.push_back("lambda relabeling did not converge");
  return form;
}

// ---------------------------------------------------------------------------
// Pool remapping and rewriting
// ---------------------------------------------------------------------------

namespace {

struct UnsupportedAttr : Error {
  using Error::Error;
};
struct LdcOverflow : Error {
  using Error::Error;
};

using IndexMap = std::vector<uint16_t>;  // old index -> new index, [0] = 0

uint16_t mapped(const IndexMap& map, uint16_t old) {
  if (old == 0) return 0;
  if (old >= map.size() || map[old] == 0) {
    throw MalformedClass("constant pool index out of range during rewrite");
  }
  return map[old];
}

Bytes remap_code_bytes(ByteSpan code, const IndexMap& map) {
  Bytes out(code.begin(), code.end());
  std::vector<Insn> insns = decode_code(code);
  for (const Insn& in : insns) {
    OpKind kind = kOps[in.op].kind;
    if (kind == K_CP8) {
      uint16_t nv = mapped(map, in.cp);
      if (nv > 255) throw LdcOverflow("ldc operand exceeds one byte after mapping");
      out[in.cp_operand_pos] = uint8_t(nv);
    } else if (kind == K_CP16 || kind == K_CP16_2Z || kind == K_CP16_U1Z ||
               kind == K_CP16_U1) {
      uint16_t nv = mapped(map, in.cp);
      out[in.cp_operand_pos] = uint8_t(nv >> 8);
      out[in.cp_operand_pos + 1] = uint8_t(nv);
    }
  }
  return out;
}

class AttrRemapper {
 public:
  AttrRemapper(const ClassModel& model, const IndexMap& map) : model_(model), map_(map) {}

  AttrInfo remap(const AttrInfo& a) {
    AttrInfo out = a;
    out.name_index = mapped(map_, a.name_index);
    out.body = remap_body(a.name, as_span(a.body));
    return out;
  }

 private:
  uint16_t m(uint16_t v) { return mapped(map_, v); }
  uint16_t m0(uint16_t v) { return v == 0 ? 0 : mapped(map_, v); }

  Bytes remap_body(const std::string& name, ByteSpan body) {
    ByteReader r(body);
    ByteWriter w;
    if (name == "ConstantValue" || name == "Signature" || name == "SourceFile" ||
        name == "NestHost" || name == "ModuleMainClass") {
      w.u16be(m(r.u16be()));
    } else if (name == "Exceptions" || name == "NestMembers" ||
               name == "PermittedSubclasses" || name == "ModulePackages") {
      uint16_t n = r.u16be();
      w.u16be(n);
      for (uint16_t i = 0; i < n; ++i) w.u16be(m(r.u16be()));
    } else if (name == "InnerClasses") {
      uint16_t n = r.u16be();
      w.u16be(n);
      for (uint16_t i = 0; i < n; ++i) {
        w.u16be(m(r.u16be()));
        w.u16be(m0(r.u16be()));
        w.u16be(m0(r.u16be()));
        w.u16be(r.u16be());
      }
    } else if (name == "EnclosingMethod") {
      w.u16be(m(r.u16be()));
      w.u16be(m0(r.u16be()));
    } else if (name == "Synthetic" || name == "Deprecated" ||
               name == "SourceDebugExtension" || name == "LineNumberTable") {
      return Bytes(body.begin(), body.end());
    } else if (name == "LocalVariableTable" || name == "LocalVariableTypeTable") {
      uint16_t n = r.u16be();
      w.u16be(n);
      for (uint16_t i = 0; i < n; ++i) {
        w.u16be(r.u16be());
        w.u16be(r.u16be());
        w.u16be(m(r.u16be()));
        w.u16be(m(r.u16be()));
        w.u16be(r.u16be());
      }
    } else if (name == "MethodParameters") {
      uint8_t n = r.u8();
      w.u8(n);
      for (uint8_t i = 0; i < n; ++i) {
        w.u16be(m0(r.u16be()));
        w.u16be(r.u16be());
      }
    } else if (name == "BootstrapMethods") {
      uint16_t n = r.u16be();
      w.u16be(n);
      for (uint16_t i = 0; i < n; ++i) {
        w.u16be(m(r.u16be()));
        uint16_t argc = r.u16be();
        w.u16be(argc);
        for (uint16_t j = 0; j < argc; ++j) w.u16be(m(r.u16be()));
      }
    } else if (name == "Record") {
      uint16_t n = r.u16be();
      w.u16be(n);
      for (uint16_t i = 0; i < n; ++i) {
        w.u16be(m(r.u16be()));
        w.u16be(m(r.u16be()));
        remap_attr_list(r, w);
      }
    } else if (name == "Code") {
      uint16_t max_stack = r.u16be();
      uint16_t max_locals = r.u16be();
      w.u16be(max_stack);
      w.u16be(max_locals);
      uint32_t code_len = r.u32be();
      Bytes new_code = remap_code_bytes(r.take(code_len), map_);
      w.u32be(uint32_t(new_code.size()));
      w.raw(new_code);
      uint16_t exc = r.u16be();
      w.u16be(exc);
      for (uint16_t i = 0; i < exc; ++i) {
        w.u16be(r.u16be());
        w.u16be(r.u16be());
        w.u16be(r.u16be());
        w.u16be(m0(r.u16be()));
      }
      remap_attr_list(r, w);
    } else if (name == "StackMapTable") {
      remap_stack_map(r, w);
    } else if (name == "RuntimeVisibleAnnotations" || name == "RuntimeInvisibleAnnotations") {
      uint16_t n = r.u16be();
      w.u16be(n);
      for (uint16_t i = 0; i < n; ++i) remap_annotation(r, w);
    } else if (name == "RuntimeVisibleParameterAnnotations" ||
               name == "RuntimeInvisibleParameterAnnotations") {
      uint8_t np = r.u8();
      w.u8(np);
      for (uint8_t p = 0; p < np; ++p) {
        uint16_t n = r.u16be();
        w.u16be(n);
        for (uint16_t i = 0; i < n; ++i) remap_annotation(r, w);
      }
    } else if (name == "RuntimeVisibleTypeAnnotations" ||
               name == "RuntimeInvisibleTypeAnnotations") {
      uint16_t n = r.u16be();
      w.u16be(n);
      for (uint16_t i = 0; i < n; ++i) remap_type_annotation(r, w);
    } else if (name == "AnnotationDefault") {
      remap_element_value(r, w);
    } else {
      throw UnsupportedAttr("attribute with unknown reference layout: " + name);
    }
    if (!r.done()) throw MalformedClass("trailing bytes in attribute " + name);
    return w.take();
  }

  void remap_attr_list(ByteReader& r, ByteWriter& w) {
    uint16_t n = r.u16be();
    w.u16be(n);
    for (uint16_t i = 0; i < n; ++i) {
      uint16_t name_idx = r.u16be();
      std::string name = model_.utf8_at(name_idx);
      uint32_t len = r.u32be();
      Bytes body = remap_body(name, r.take(len));
      w.u16be(m(name_idx));
      w.u32be(uint32_t(body.size()));
      w.raw(body);
    }
  }

  void remap_vtype(ByteReader& r, ByteWriter& w) {
    uint8_t tag = r.u8();
    w.u8(tag);
    if (tag == 7) {
      w.u16be(m(r.u16be()));
    } else if (tag == 8) {
      w.u16be(r.u16be());
    } else if (tag > 8) {
      throw MalformedClass("invalid verification type tag");
    }
  }

  void remap_stack_map(ByteReader& r, ByteWriter& w) {
    uint16_t count = r.u16be();
    w.u16be(count);
    for (uint16_t i = 0; i < count; ++i) {
      uint8_t type = r.u8();
      w.u8(type);
      if (type <= 63) {
      } else if (type <= 127) {
        remap_vtype(r, w);
      } else if (type == 247) {
        w.u16be(r.u16be());
        remap_vtype(r, w);
      } else if (type >= 248 && type <= 251) {
        w.u16be(r.u16be());
      } else if (type >= 252 && type <= 254) {
        w.u16be(r.u16be());
        for (int k = 0; k < type - 251; ++k) remap_vtype(r, w);
      } else if (type == 255) {
        w.u16be(r.u16be());
        uint16_t nl = r.u16be();
        w.u16be(nl);
        for (uint16_t k = 0; k < nl; ++k) remap_vtype(r, w);
        uint16_t ns = r.u16be();
        w.u16be(ns);
        for (uint16_t k = 0; k < ns; ++k) remap_vtype(r, w);
      } else {
        throw MalformedClass("reserved stack map frame type");
      }
    }
  }

  void remap_annotation(ByteReader& r, ByteWriter& w) {
    w.u16be(m(r.u16be()));  // type
    uint16_t pairs = r.u16be();
    w.u16be(pairs);
    for (uint16_t i = 0; i < pairs; ++i) {
      w.u16be(m(r.u16be()));  // element name
      remap_element_value(r, w);
    }
  }

  void remap_element_value(ByteReader& r, ByteWriter& w) {
    uint8_t tag = r.u8();
    w.u8(tag);
    switch (tag) {
      case 'B': case 'C': case 'D': case 'F': case 'I': case 'J':
      case 'S': case 'Z': case 's': case 'c':
        w.u16be(m(r.u16be()));
        break;
      case 'e':
        w.u16be(m(r.u16be()));
        w.u16be(m(r.u16be()));
        break;
      case '@':
        remap_annotation(r, w);
        break;
      case '[': {
        uint16_t n = r.u16be();
        w.u16be(n);
        for (uint16_t i = 0; i < n; ++i) remap_element_value(r, w);
        break;
      }
      default:
        throw MalformedClass("invalid annotation element tag");
    }
  }

  void remap_type_annotation(ByteReader& r, ByteWriter& w) {
    uint8_t target_type = r.u8();
    w.u8(target_type);
    switch (target_type) {
      case 0x00: case 0x01: case 0x16:
        w.u8(r.u8());
        break;
      case 0x10: case 0x17: case 0x42: case 0x43: case 0x44: case 0x45: case 0x46:
        w.u16be(r.u16be());
        break;
      case 0x11: case 0x12:
        w.u8(r.u8());
        w.u8(r.u8());
        break;
      case 0x13: case 0x14: case 0x15:
        break;
      case 0x40: case 0x41: {
        uint16_t n = r.u16be();
        w.u16be(n);
        for (uint16_t i = 0; i < n; ++i) {
          w.u16be(r.u16be());
          w.u16be(r.u16be());
          w.u16be(r.u16be());
        }
        break;
      }
      case 0x47: case 0x48: case 0x49: case 0x4a: case 0x4b:
        w.u16be(r.u16be());
        w.u8(r.u8());
        break;
      default:
        throw MalformedClass("invalid type annotation target");
    }
    uint8_t path_len = r.u8();
    w.u8(path_len);
    for (uint8_t i = 0; i < path_len; ++i) {
      w.u8(r.u8());
      w.u8(r.u8());
    }
    remap_annotation(r, w);
  }

  const ClassModel& model_;
  const IndexMap& map_;
};

CpEntry remap_entry(const CpEntry& e, const IndexMap& map) {
  CpEntry out = e;
  switch (e.tag) {
    case CpTag::Class:
    case CpTag::String:
    case CpTag::MethodType:
    case CpTag::Module:
    case CpTag::Package:
    case CpTag::MethodHandle:
      out.ref1 = mapped(map, e.ref1);
      break;
    case CpTag::Fieldref:
    case CpTag::Methodref:
    case CpTag::InterfaceMethodref:
    case CpTag::NameAndType:
      out.ref1 = mapped(map, e.ref1);
      out.ref2 = mapped(map, e.ref2);
      break;
    case CpTag::Dynamic:
    case CpTag::InvokeDynamic:
      out.ref2 = mapped(map, e.ref2);  // ref1 indexes BootstrapMethods
      break;
    default:
      break;
  }
  return out;
}

// Applies an old->new index map plus the new pool ordering to the class.
ClassModel apply_pool_map(const ClassModel& model, const IndexMap& map,
                          const std::vector<uint16_t>& new_order) {
  ClassModel out;
  out.minor_version = model.minor_version;
  out.major_version = model.major_version;
  out.access_flags = model.access_flags;
  out.pool.resize(1);
  for (uint16_t old_idx : new_order) {
    const CpEntry& e = model.pool[old_idx];
    out.pool.push_back(remap_entry(e, map));
    if (e.tag == CpTag::Long || e.tag == CpTag::Double) {
      CpEntry ph;
      ph.phantom = true;
      out.pool.push_back(ph);
    }
  }
  out.this_class = mapped(map, model.this_class);
  out.super_class = model.super_class ? mapped(map, model.super_class) : 0;
  for (uint16_t i : model.interfaces) out.interfaces.push_back(mapped(map, i));
  AttrRemapper remapper(model, map);
  auto remap_members = [&](const std::vector<MemberInfo>& in, std::vector<MemberInfo>& dst) {
    for (const MemberInfo& m : in) {
      MemberInfo nm;
      nm.access_flags = m.access_flags;
      nm.name_index = mapped(map, m.name_index);
      nm.descriptor_index = mapped(map, m.descriptor_index);
      for (const AttrInfo& a : m.attributes) nm.attributes.push_back(remapper.remap(a));
      dst.push_back(std::move(nm));
    }
  };
  remap_members(model.fields, out.fields);
  remap_members(model.methods, out.methods);
  for (const AttrInfo& a : model.attributes) out.attributes.push_back(remapper.remap(a));
  return out;
}

std::vector<uint16_t> non_phantom_indices(const ClassModel& model) {
  std::vector<uint16_t> out;
  for (uint16_t i = 1; i < model.pool.size(); ++i) {
    if (!model.pool[i].phantom) out.push_back(i);
  }
  return out;
}

IndexMap build_index_map(const ClassModel& model, const std::vector<uint16_t>& new_order,
                         const std::map<uint16_t, uint16_t>* representative) {
  IndexMap map(model.pool.size(), 0);
  uint16_t next = 1;
  for (uint16_t old_idx : new_order) {
    map[old_idx] = next;
    const CpEntry& e = model.pool[old_idx];
    next += (e.tag == CpTag::Long || e.tag == CpTag::Double) ? 2 : 1;
  }
  if (representative) {
    for (const auto& [dup, rep] : *representative) {
      map[dup] = map[rep];
    }
  }
  return map;
}

}  // namespace

std::vector<std::string> pool_dump(const ClassModel& model) {
  std::vector<std::string> out;
  Resolver res(model);
  for (uint16_t i = 1; i < model.pool.size(); ++i) {
    if (model.pool[i].phantom) continue;
    std::string line = "#" + std::to_string(i) + " = ";
    try {
      line += res.resolve(i);
    } catch (const Error&) {
      line += "<unresolvable>";
    }
    out.push_back(std::move(line));
  }
  return out;
}

PoolPermuteResult permute_pool(const ClassModel& model,
                               const std::vector<uint16_t>& new_order) {
  PoolPermuteResult result;
  try {
    IndexMap map = build_index_map(model, new_order, nullptr);
    for (uint16_t i : non_phantom_indices(model)) {
      if (map[i] == 0) throw Error("pool permutation does not cover every entry");
    }
    result.model = apply_pool_map(model, map, new_order);
    result.ok = true;
  } catch (const Error& e) {
    result.note = e.what();
  }
  return result;
}

RewriteResult rewrite_class(const ClassModel& model, const ClassCanonPolicy& policy) {
  RewriteResult result;
  ClassModel work = model;

  if (policy.strip_line_numbers) {
    for (MemberInfo& m : work.methods) {
      for (AttrInfo& a : m.attributes) {
        if (a.name != "Code") continue;
        CodeAttr code = parse_code(as_span(a.body), work);
        size_t before = code.attrs.size();
        std::erase_if(code.attrs, [](const AttrInfo& s) { return s.name == "LineNumberTable"; });
        if (code.attrs.size() != before) {
          a.body = serialize_code(code);
          result.notes.push_back("stripped LineNumberTable from " +
                                 work.utf8_at(m.name_index));
        }
      }
    }
  }

  if (policy.sort_inner_classes) {
    for (AttrInfo& a : work.attributes) {
      if (a.name != "InnerClasses") continue;
      ByteReader r(as_span(a.body));
      uint16_t n = r.u16be();
      struct Row {
        uint16_t raw[4];
        std::string key;
      };
      std::vector<Row> rows;
      for (uint16_t i = 0; i < n; ++i) {
        Row row;
        for (auto& v : row.raw) v = r.u16be();
        row.key = work.class_name_at(row.raw[0]);
        rows.push_back(std::move(row));
      }
      std::stable_sort(rows.begin(), rows.end(),
                       [](const Row& x, const Row& y) { return x.key < y.key; });
      ByteWriter w;
      w.u16be(n);
      for (const Row& row : rows) {
        for (uint16_t v : row.raw) w.u16be(v);
      }
      Bytes sorted = w.take();
      if (sorted != a.body) {
        a.body = std::move(sorted);
        result.notes.push_back("sorted InnerClasses entries");
      }
    }
  }

  if (policy.sort_methods) {
    bool was_sorted = std::is_sorted(
        work.methods.begin(), work.methods.end(),
        [&](const MemberInfo& x, const MemberInfo& y) {
          return std::make_pair(work.utf8_at(x.name_index), work.utf8_at(x.descriptor_index)) <
                 std::make_pair(work.utf8_at(y.name_index), work.utf8_at(y.descriptor_index));
        });
    if (!was_sorted) {
      std::stable_sort(
          work.methods.begin(), work.methods.end(),
          [&](const MemberInfo& x, const MemberInfo& y) {
            return std::make_pair(work.utf8_at(x.name_index), work.utf8_at(x.descriptor_index)) <
                   std::make_pair(work.utf8_at(y.name_index), work.utf8_at(y.descriptor_index));
          });
      result.notes.push_back("sorted methods by name and descriptor");
    }
  }

  if (policy.dedup_pool) {
    // Structural equality via recursive resolution; survivors sorted by
    // (tag, resolved payload).
    Resolver res(work);
    std::vector<uint16_t> indices = non_phantom_indices(work);
    std::map<std::pair<uint8_t, std::string>, uint16_t> first_of;
    std::map<uint16_t, uint16_t> representative;
    std::vector<std::pair<std::pair<uint8_t, std::string>, uint16_t>> survivors;
    for (uint16_t i : indices) {
      std::pair<uint8_t, std::string> key{uint8_t(work.pool[i].tag), res.resolve(i)};
      auto [it, inserted] = first_of.emplace(key, i);
      if (inserted) {
        survivors.emplace_back(key, i);
      } else {
        representative[i] = it->second;
      }
    }
    std::stable_sort(survivors.begin(), survivors.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<uint16_t> new_order;
    for (const auto& [key, idx] : survivors) new_order.push_back(idx);

    IndexMap map = build_index_map(work, new_order, &representative);
    bool identity = true;
    for (uint16_t i : indices) {
      if (map[i] != i) {
        identity = false;
        break;
      }
    }
    if (!identity) {
      try {
        work = apply_pool_map(work, map, new_order);
        result.pool_rewritten = true;
        result.notes.push_back(representative.empty()
                                   ? "sorted constant pool"
                                   : "deduplicated and sorted constant pool");
      } catch (const LdcOverflow&) {
        result.pool_aborted = true;
        result.notes.push_back(
            "pool rewrite aborted: single-byte ldc operand would overflow; original pool retained");
      } catch (const UnsupportedAttr& e) {
        result.pool_aborted = true;
        result.notes.push_back(std::string("pool rewrite aborted: ") + e.what() +
                               "; original pool retained");
      }
    }
  }

  result.bytes = serialize_class(work);
  result.changed = result.bytes != serialize_class(model);
  return result;
}

}  // namespace verijar::classfile
