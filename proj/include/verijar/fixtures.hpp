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
// Deterministic generator of labeled non-equivalent archive pairs, one per
// known pattern. Each pair diverges only along its labeled axis, making the
// generator an independent oracle for the classifier and the normalizer.

#ifndef VERIJAR_FIXTURES_HPP_
#define VERIJAR_FIXTURES_HPP_

#include <map>
#include <random>
#include <string>
#include <vector>

#include "verijar/classfile.hpp"
#include "verijar/common.hpp"
#include "verijar/patterns.hpp"

namespace verijar::fixtures {

struct FixtureSpec {
  patterns::PatternId pattern = patterns::PatternId::P1;
  uint64_t seed = 0;
  int pool_entries = 12;      // size hint for synthesized pools
  int methods = 4;            // size hint for synthesized classes
  int archive_entries = 6;    // size hint for archive payload count
};

struct FixturePair {
  Bytes a;
  Bytes b;
  patterns::PatternId label;
};

// Same spec, byte-identical pair.
FixturePair generate_pair(const FixtureSpec& spec);

// Deterministic RNG facade over the fixed-algorithm engine; avoids the
// distribution classes, whose output is not pinned by the standard.
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}
  uint64_t next() { return eng_(); }
  uint64_t below(uint64_t n) { return n == 0 ? 0 : next() % n; }
  int range(int lo, int hi) { return lo + int(below(uint64_t(hi - lo + 1))); }
  bool coin() { return next() & 1; }
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

 private:
  std::mt19937_64 eng_;
};

// Assembles valid class files with explicit control over pool layout.
class ClassBuilder {
 public:
  explicit ClassBuilder(const std::string& class_name, uint16_t major = 52);

  // Pooled constants, deduplicated by content.
  uint16_t utf8(std::string_view s);
  uint16_t utf8_dup(std::string_view s);  // force a redundant entry
  uint16_t klass(std::string_view name);
  uint16_t nat(std::string_view name, std::string_view desc);
  uint16_t methodref(std::string_view cls, std::string_view name, std::string_view desc);
  uint16_t fieldref(std::string_view cls, std::string_view name, std::string_view desc);
  uint16_t string_const(std::string_view s);
  uint16_t int_const(int32_t v);
  uint16_t long_const(int64_t v);

  void add_field(uint16_t flags, std::string_view name, std::string_view desc);
  void add_method(uint16_t flags, std::string_view name, std::string_view desc,
                  Bytes code_attr_body);
  void add_method_bare(uint16_t flags, std::string_view name, std::string_view desc);
  void add_class_attr(std::string_view name, Bytes body);
  void add_method_attr(size_t method_index, std::string_view name, Bytes body);

  classfile::AttrInfo attr(std::string_view name, Bytes body);

  // Code attribute body from raw bytecode plus nested attributes.
  Bytes code_body(uint16_t max_stack, uint16_t max_locals, const Bytes& code,
                  const std::vector<classfile::AttrInfo>& sub_attrs = {});

  classfile::ClassModel& model() { return model_; }
  classfile::ClassModel build();

 private:
  classfile::ClassModel model_;
  std::map<std::string, uint16_t> cache_;
  uint16_t add_entry(classfile::CpEntry e, const std::string& key, bool dedup);
};

// Straight-line bytecode assembly with explicit (non-shortened) forms so two
// emissions with different slot numbers keep identical instruction offsets.
class CodeWriter {
 public:
  CodeWriter& plain(uint8_t op);
  CodeWriter& slot_op(uint8_t op, int slot);      // iload/istore family, u1 slot
  CodeWriter& cp_op(uint8_t op, uint16_t index);  // ldc uses u1 when index < 256
  CodeWriter& branch(uint8_t op, int16_t rel);
  CodeWriter& iinc(int slot, int8_t delta);
  size_t offset() const { return out_.size(); }
  Bytes take() { return std::move(out_); }

 private:
  Bytes out_;
};

// A small synthetic class with seed-varied pool and methods; structurally
// valid and round-trip safe. Used to grow the corpus.
classfile::ClassModel random_class(Rng& rng, const std::string& name, int methods,
                                   int pool_entries);

}  // namespace verijar::fixtures

#endif  // VERIJAR_FIXTURES_HPP_
