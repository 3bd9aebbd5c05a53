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

#ifndef VERIJAR_POLICY_HPP_
#define VERIJAR_POLICY_HPP_

#include <set>
#include <string>
#include <vector>

#include "verijar/archive.hpp"
#include "verijar/classcanon.hpp"
#include "verijar/patterns.hpp"
#include "verijar/textrules.hpp"

namespace verijar {

// Shared configuration for comparison and normalization. `enabled` selects
// the interpretable patterns the pipeline may resolve; enabling a pattern
// the toolkit cannot interpret is a load-time error.
struct NormalizePolicy {
  std::set<patterns::PatternId> enabled = patterns::interpretable_patterns();
  archive::CanonicalPolicy archive;
  bool strip_line_numbers = false;  // opt-in resolution for P5
  std::vector<text::TextRule> rules = text::builtin_rules();
  bool parallel = true;
  int nested_depth = 1;

  static NormalizePolicy defaults() { return NormalizePolicy{}; }

  void validate() const;

  bool is_enabled(patterns::PatternId id) const { return enabled.count(id) > 0; }

  // Canonical-comparison axes implied by the enabled set.
  classfile::ClassCanonPolicy class_policy() const;

  // Axes safe for byte-level rewriting (slot renumbering stays compare-only).
  classfile::ClassCanonPolicy rewrite_policy() const;

  NormalizePolicy nested() const {
    NormalizePolicy inner = *this;
    inner.nested_depth = nested_depth - 1;
    return inner;
  }
};

// Parses the plain-text policy file format (key = value lines plus rule
// records). Unknown keys are an error; see the README for the grammar.
NormalizePolicy parse_policy_file(std::string_view content);

}  // namespace verijar

#endif  // VERIJAR_POLICY_HPP_
