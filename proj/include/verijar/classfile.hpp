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
//
// JVM class-file parsing and serialization. The model preserves everything
// needed for byte-exact round trips: constant-pool order, member order,
// attribute order, and raw bodies of attributes.

#ifndef VERIJAR_CLASSFILE_HPP_
#define VERIJAR_CLASSFILE_HPP_

#include <string>
#include <vector>

#include "verijar/common.hpp"

namespace verijar::classfile {

enum class CpTag : uint8_t {
  Utf8 = 1,
  Integer = 3,
  Float = 4,
  Long = 5,
  Double = 6,
  Class = 7,
  String = 8,
  Fieldref = 9,
  Methodref = 10,
  InterfaceMethodref = 11,
  NameAndType = 12,
  MethodHandle = 15,
  MethodType = 16,
  Dynamic = 17,
  InvokeDynamic = 18,
  Module = 19,
  Package = 20,
};

const char* tag_name(CpTag tag);

struct CpEntry {
  CpTag tag = CpTag::Utf8;
  Bytes utf8;           // Utf8 payload, raw modified-UTF-8 bytes
  uint32_t u32 = 0;     // Integer/Float raw bit pattern
  uint64_t u64 = 0;     // Long/Double raw bit pattern
  uint16_t ref1 = 0;    // first index operand (or bootstrap index)
  uint16_t ref2 = 0;    // second index operand
  uint8_t mh_kind = 0;  // MethodHandle reference kind
  bool phantom = false; // unusable slot following a Long/Double entry

  bool operator==(const CpEntry&) const = default;
};

struct AttrInfo {
  uint16_t name_index = 0;
  std::string name;  // resolved for convenience; name_index is authoritative
  Bytes body;
};

struct MemberInfo {
  uint16_t access_flags = 0;
  uint16_t name_index = 0;
  uint16_t descriptor_index = 0;
  std::vector<AttrInfo> attributes;
};

struct ClassModel {
  uint16_t minor_version = 0;
  uint16_t major_version = 52;
  std::vector<CpEntry> pool;  // pool[0] is an unused placeholder
  uint16_t access_flags = 0;
  uint16_t this_class = 0;
  uint16_t super_class = 0;
  std::vector<uint16_t> interfaces;
  std::vector<MemberInfo> fields;
  std::vector<MemberInfo> methods;
  std::vector<AttrInfo> attributes;

  const CpEntry& cp(uint16_t index) const;
  std::string utf8_at(uint16_t index) const;        // Utf8 entry content
  std::string class_name_at(uint16_t index) const;  // via Class -> Utf8
  std::string this_class_name() const { return class_name_at(this_class); }
  const AttrInfo* find_attr(std::string_view name) const;
};

bool looks_like_class(ByteSpan bytes);

// Parses a class file. Unknown attributes are preserved as opaque bytes.
// Validates magic, version range 45..61, pool reference tags and acyclicity,
// and member name+descriptor uniqueness.
ClassModel parse_class(ByteSpan bytes);

// Inverse of parse_class; byte-identical for unmodified models.
Bytes serialize_class(const ClassModel& model);

// The constant pool region exactly as it would serialize (count + entries).
// Used to attribute diffs to pool layout changes.
Bytes serialized_pool_bytes(const ClassModel& model);

// Number of locals occupied by the receiver (if any) plus parameters.
int param_slot_count(std::string_view descriptor, bool is_static);

}  // namespace verijar::classfile

#endif  // VERIJAR_CLASSFILE_HPP_
