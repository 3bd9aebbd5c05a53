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

#include "verijar/classfile.hpp"

#include <algorithm>
#include <set>
#include <utility>

namespace verijar::classfile {

namespace {

constexpr uint32_t kMagic = 0xcafebabe;

bool valid_tag(uint8_t t) {
  switch (t) {
    case 1: case 3: case 4: case 5: case 6: case 7: case 8: case 9:
    case 10: case 11: case 12: case 15: case 16: case 17: case 18:
    case 19: case 20:
      return true;
    default:
      return false;
  }
}

}  // namespace

const char* tag_name(CpTag tag) {
  switch (tag) {
    case CpTag::Utf8: return "utf8";
    case CpTag::Integer: return "int";
    case CpTag::Float: return "float";
    case CpTag::Long: return "long";
    case CpTag::Double: return "double";
    case CpTag::Class: return "class";
    case CpTag::String: return "string";
    case CpTag::Fieldref: return "fieldref";
    case CpTag::Methodref: return "methodref";
    case CpTag::InterfaceMethodref: return "interfacemethodref";
    case CpTag::NameAndType: return "nameandtype";
    case CpTag::MethodHandle: return "methodhandle";
    case CpTag::MethodType: return "methodtype";
    case CpTag::Dynamic: return "dynamic";
    case CpTag::InvokeDynamic: return "invokedynamic";
    case CpTag::Module: return "module";
    case CpTag::Package: return "package";
  }
  return "?";
}

const CpEntry& ClassModel::cp(uint16_t index) const {
  if (index == 0 || index >= pool.size()) {
    throw MalformedClass("constant pool index out of range");
  }
  const CpEntry& e = pool[index];
  if (e.phantom) throw MalformedClass("constant pool index points into a wide entry");
  return e;
}

std::string ClassModel::utf8_at(uint16_t index) const {
  const CpEntry& e = cp(index);
  if (e.tag != CpTag::Utf8) throw MalformedClass("expected Utf8 constant");
  return to_string(as_span(e.utf8));
}

std::string ClassModel::class_name_at(uint16_t index) const {
  const CpEntry& e = cp(index);
  if (e.tag != CpTag::Class) throw MalformedClass("expected Class constant");
  return utf8_at(e.ref1);
}

const AttrInfo* ClassModel::find_attr(std::string_view name) const {
  for (const AttrInfo& a : attributes) {
    if (a.name == name) return &a;
  }
  return nullptr;
}

bool looks_like_class(ByteSpan bytes) {
  return bytes.size() >= 4 && bytes[0] == 0xca && bytes[1] == 0xfe &&
         bytes[2] == 0xba && bytes[3] == 0xbe;
}

namespace {

CpEntry parse_cp_entry(ByteReader& r) {
  CpEntry e;
  uint8_t t = r.u8();
  if (!valid_tag(t)) throw MalformedClass("unknown constant pool tag");
  e.tag = CpTag(t);
  switch (e.tag) {
    case CpTag::Utf8: {
      uint16_t len = r.u16be();
      e.utf8 = r.take_bytes(len);
      break;
    }
    case CpTag::Integer:
    case CpTag::Float:
      e.u32 = r.u32be();
      break;
    case CpTag::Long:
    case CpTag::Double: {
      uint64_t hi = r.u32be();
      e.u64 = hi << 32 | r.u32be();
      break;
    }
    case CpTag::Class:
    case CpTag::String:
    case CpTag::MethodType:
    case CpTag::Module:
    case CpTag::Package:
      e.ref1 = r.u16be();
      break;
    case CpTag::Fieldref:
    case CpTag::Methodref:
    case CpTag::InterfaceMethodref:
    case CpTag::NameAndType:
    case CpTag::Dynamic:
    case CpTag::InvokeDynamic:
      e.ref1 = r.u16be();
      e.ref2 = r.u16be();
      break;
    case CpTag::MethodHandle:
      e.mh_kind = r.u8();
      e.ref1 = r.u16be();
      break;
  }
  return e;
}

std::vector<AttrInfo> parse_attrs(ByteReader& r, const std::vector<CpEntry>& pool) {
  uint16_t count = r.u16be();
  std::vector<AttrInfo> attrs;
  attrs.reserve(count);
  for (uint16_t i = 0; i < count; ++i) {
    AttrInfo a;
    a.name_index = r.u16be();
    if (a.name_index == 0 || a.name_index >= pool.size() ||
        pool[a.name_index].tag != CpTag::Utf8 || pool[a.name_index].phantom) {
      throw MalformedClass("attribute name index is not a Utf8 constant");
    }
    a.name = to_string(as_span(pool[a.name_index].utf8));
    uint32_t len = r.u32be();
    if (len > r.remaining()) throw MalformedClass("truncated attribute");
    a.body = r.take_bytes(len);
    attrs.push_back(std::move(a));
  }
  return attrs;
}

MemberInfo parse_member(ByteReader& r, const std::vector<CpEntry>& pool) {
  MemberInfo m;
  m.access_flags = r.u16be();
  m.name_index = r.u16be();
  m.descriptor_index = r.u16be();
  m.attributes = parse_attrs(r, pool);
  return m;
}

void check_index(const ClassModel& model, uint16_t index, CpTag expected,
                 const char* what) {
  const CpEntry& e = model.cp(index);
  if (e.tag != expected) {
    throw MalformedClass(std::string("expected ") + tag_name(expected) + " for " + what);
  }
}

void validate_pool(const ClassModel& model) {
  const auto& pool = model.pool;
  for (size_t i = 1; i < pool.size(); ++i) {
    const CpEntry& e = pool[i];
    if (e.phantom) continue;
    auto need = [&](uint16_t idx, CpTag tag, const char* what) {
      check_index(model, idx, tag, what);
    };
    switch (e.tag) {
      case CpTag::Class:
      case CpTag::Module:
      case CpTag::Package:
      case CpTag::MethodType:
        need(e.ref1, CpTag::Utf8, tag_name(e.tag));
        break;
      case CpTag::String:
        need(e.ref1, CpTag::Utf8, "String");
        break;
      case CpTag::Fieldref:
      case CpTag::Methodref:
      case CpTag::InterfaceMethodref:
        need(e.ref1, CpTag::Class, "member ref class");
        need(e.ref2, CpTag::NameAndType, "member ref name-and-type");
        break;
      case CpTag::NameAndType:
        need(e.ref1, CpTag::Utf8, "NameAndType name");
        need(e.ref2, CpTag::Utf8, "NameAndType descriptor");
        break;
      case CpTag::MethodHandle: {
        if (e.mh_kind < 1 || e.mh_kind > 9) {
          throw MalformedClass("invalid method handle kind");
        }
        const CpEntry& ref = model.cp(e.ref1);
        if (ref.tag != CpTag::Fieldref && ref.tag != CpTag::Methodref &&
            ref.tag != CpTag::InterfaceMethodref) {
          throw MalformedClass("method handle must reference a member");
        }
        break;
      }
      case CpTag::Dynamic:
      case CpTag::InvokeDynamic:
        // ref1 indexes the BootstrapMethods attribute, validated where used.
        need(e.ref2, CpTag::NameAndType, "dynamic name-and-type");
        break;
      case CpTag::Utf8:
      case CpTag::Integer:
      case CpTag::Float:
      case CpTag::Long:
      case CpTag::Double:
        break;
    }
  }

  // The reference graph over pool entries must be acyclic.
  std::vector<int> state(pool.size(), 0);  // 0 unvisited, 1 in stack, 2 done
  auto edges = [&](uint16_t i, uint16_t out[2]) -> int {
    const CpEntry& e = pool[i];
    switch (e.tag) {
      case CpTag::Class:
      case CpTag::String:
      case CpTag::MethodType:
      case CpTag::Module:
      case CpTag::Package:
      case CpTag::MethodHandle:
        out[0] = e.ref1;
        return 1;
      case CpTag::Fieldref:
      case CpTag::Methodref:
      case CpTag::InterfaceMethodref:
      case CpTag::NameAndType:
        out[0] = e.ref1;
        out[1] = e.ref2;
        return 2;
      case CpTag::Dynamic:
      case CpTag::InvokeDynamic:
        out[0] = e.ref2;  // bootstrap index is not a pool edge
        return 1;
      default:
        return 0;
    }
  };
  // Iterative DFS.
  for (size_t start = 1; start < pool.size(); ++start) {
    if (state[start] != 0 || pool[start].phantom) continue;
    std::vector<std::pair<uint16_t, int>> stack{{uint16_t(start), 0}};
    state[start] = 1;
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      uint16_t out[2];
      int n = edges(node, out);
      if (next >= n) {
        state[node] = 2;
        stack.pop_back();
        continue;
      }
      uint16_t child = out[next++];
      if (child == 0 || child >= pool.size()) {
        throw MalformedClass("constant pool index out of range");
      }
      if (state[child] == 1) throw MalformedClass("constant pool reference cycle");
      if (state[child] == 0) {
        state[child] = 1;
        stack.emplace_back(child, 0);
      }
    }
  }
}

void validate_members(const ClassModel& model) {
  for (const auto* members : {&model.fields, &model.methods}) {
    std::set<std::pair<std::string, std::string>> seen;
    for (const MemberInfo& m : *members) {
      std::string name = model.utf8_at(m.name_index);
      std::string desc = model.utf8_at(m.descriptor_index);
      if (!seen.emplace(name, desc).second) {
        throw MalformedClass("duplicate member name and descriptor: " + name + desc);
      }
    }
  }
}

}  // namespace

ClassModel parse_class(ByteSpan bytes) {
  try {
    ByteReader r(bytes);
    if (r.u32be() != kMagic) throw MalformedClass("bad class file magic");
    ClassModel model;
    model.minor_version = r.u16be();
    model.major_version = r.u16be();
    if (model.major_version < 45 || model.major_version > 61) {
      throw MalformedClass("unsupported class file version");
    }
    uint16_t cp_count = r.u16be();
    if (cp_count == 0) throw MalformedClass("constant pool count must be at least 1");
    model.pool.resize(1);
    for (uint16_t i = 1; i < cp_count; ++i) {
      CpEntry e = parse_cp_entry(r);
      bool wide = (e.tag == CpTag::Long || e.tag == CpTag::Double);
      model.pool.push_back(std::move(e));
      if (wide) {
        if (++i >= cp_count) break;  // trailing wide entry fills the last slot
        CpEntry ph;
        ph.phantom = true;
        model.pool.push_back(ph);
      }
    }
    model.access_flags = r.u16be();
    model.this_class = r.u16be();
    model.super_class = r.u16be();
    uint16_t if_count = r.u16be();
    for (uint16_t i = 0; i < if_count; ++i) model.interfaces.push_back(r.u16be());
    uint16_t field_count = r.u16be();
    for (uint16_t i = 0; i < field_count; ++i) {
      model.fields.push_back(parse_member(r, model.pool));
    }
    uint16_t method_count = r.u16be();
    for (uint16_t i = 0; i < method_count; ++i) {
      model.methods.push_back(parse_member(r, model.pool));
    }
    model.attributes = parse_attrs(r, model.pool);
    if (!r.done()) throw MalformedClass("trailing bytes after class file structure");

    check_index(model, model.this_class, CpTag::Class, "this_class");
    if (model.super_class != 0) {
      check_index(model, model.super_class, CpTag::Class, "super_class");
    }
    for (uint16_t i : model.interfaces) check_index(model, i, CpTag::Class, "interface");
    for (const auto* members : {&model.fields, &model.methods}) {
      for (const MemberInfo& m : *members) {
        check_index(model, m.name_index, CpTag::Utf8, "member name");
        check_index(model, m.descriptor_index, CpTag::Utf8, "member descriptor");
      }
    }
    validate_pool(model);
    validate_members(model);
    return model;
  } catch (const TruncatedInput&) {
    throw MalformedClass("truncated class file");
  }
}

namespace {

void write_cp_entry(ByteWriter& w, const CpEntry& e) {
  w.u8(uint8_t(e.tag));
  switch (e.tag) {
    case CpTag::Utf8:
      w.u16be(uint16_t(e.utf8.size()));
      w.raw(e.utf8);
      break;
    case CpTag::Integer:
    case CpTag::Float:
      w.u32be(e.u32);
      break;
    case CpTag::Long:
    case CpTag::Double:
      w.u32be(uint32_t(e.u64 >> 32));
      w.u32be(uint32_t(e.u64));
      break;
    case CpTag::Class:
    case CpTag::String:
    case CpTag::MethodType:
    case CpTag::Module:
    case CpTag::Package:
      w.u16be(e.ref1);
      break;
    case CpTag::Fieldref:
    case CpTag::Methodref:
    case CpTag::InterfaceMethodref:
    case CpTag::NameAndType:
    case CpTag::Dynamic:
    case CpTag::InvokeDynamic:
      w.u16be(e.ref1);
      w.u16be(e.ref2);
      break;
    case CpTag::MethodHandle:
      w.u8(e.mh_kind);
      w.u16be(e.ref1);
      break;
  }
}

void write_attrs(ByteWriter& w, const std::vector<AttrInfo>& attrs) {
  w.u16be(uint16_t(attrs.size()));
  for (const AttrInfo& a : attrs) {
    w.u16be(a.name_index);
    w.u32be(uint32_t(a.body.size()));
    w.raw(a.body);
  }
}

void write_member(ByteWriter& w, const MemberInfo& m) {
  w.u16be(m.access_flags);
  w.u16be(m.name_index);
  w.u16be(m.descriptor_index);
  write_attrs(w, m.attributes);
}

void write_pool(ByteWriter& w, const std::vector<CpEntry>& pool) {
  w.u16be(uint16_t(pool.size()));
  for (size_t i = 1; i < pool.size(); ++i) {
    if (pool[i].phantom) continue;
    write_cp_entry(w, pool[i]);
  }
}

}  // namespace

Bytes serialize_class(const ClassModel& model) {
  ByteWriter w;
  w.u32be(kMagic);
  w.u16be(model.minor_version);
  w.u16be(model.major_version);
  write_pool(w, model.pool);
  w.u16be(model.access_flags);
  w.u16be(model.this_class);
  w.u16be(model.super_class);
  w.u16be(uint16_t(model.interfaces.size()));
  for (uint16_t i : model.interfaces) w.u16be(i);
  w.u16be(uint16_t(model.fields.size()));
  for (const MemberInfo& m : model.fields) write_member(w, m);
  w.u16be(uint16_t(model.methods.size()));
  for (const MemberInfo& m : model.methods) write_member(w, m);
  write_attrs(w, model.attributes);
  return w.take();
}

Bytes serialized_pool_bytes(const ClassModel& model) {
  ByteWriter w;
  write_pool(w, model.pool);
  return w.take();
}

int param_slot_count(std::string_view descriptor, bool is_static) {
  if (descriptor.empty() || descriptor[0] != '(') {
    throw MalformedClass("invalid method descriptor");
  }
  int slots = is_static ? 0 : 1;
  size_t i = 1;
  bool in_array = false;
  while (i < descriptor.size() && descriptor[i] != ')') {
    char c = descriptor[i];
    if (c == '[') {
      in_array = true;  // arrays are references: one slot whatever the element
      ++i;
      continue;
    }
    if (c == 'L') {
      size_t end = descriptor.find(';', i);
      if (end == std::string_view::npos) throw MalformedClass("invalid method descriptor");
      slots += 1;
      i = end + 1;
    } else if (c == 'J' || c == 'D') {
      slots += in_array ? 1 : 2;
      ++i;
    } else if (c == 'B' || c == 'C' || c == 'F' || c == 'I' || c == 'S' || c == 'Z') {
      slots += 1;
      ++i;
    } else {
      throw MalformedClass("invalid method descriptor");
    }
    in_array = false;
  }
  return slots;
}

}  // namespace verijar::classfile
