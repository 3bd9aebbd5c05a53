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
// Structural comparison of two packages: every difference becomes a Finding
// attributed to a pattern (or UNKNOWN), with resolution state under the
// active policy.

#ifndef VERIJAR_DIFF_HPP_
#define VERIJAR_DIFF_HPP_

#include <map>
#include <string>
#include <vector>

#include "verijar/archive.hpp"
#include "verijar/patterns.hpp"
#include "verijar/policy.hpp"

namespace verijar::diffing {

enum class Resolution { None, Canonicalization, TextRule, EntryReorder };

const char* resolution_name(Resolution r);

struct Finding {
  std::string entry_name;  // "<archive>" for package-level findings
  patterns::PatternId pattern = patterns::PatternId::Unknown;
  std::vector<std::string> locus;
  std::string evidence_left;
  std::string evidence_right;
  Resolution resolved_by = Resolution::None;
  std::string note;
  // All pattern labels that matched before precedence picked one.
  std::vector<patterns::PatternId> candidates;

  bool resolved() const { return resolved_by != Resolution::None; }
};

struct DiffOutcome {
  bool equivalent = true;
  std::vector<Finding> findings;
  std::map<patterns::PatternId, int> stats;

  bool has_unknown() const {
    return stats.count(patterns::PatternId::Unknown) > 0;
  }
};

DiffOutcome compare_packages(const archive::PackageModel& a,
                             const archive::PackageModel& b,
                             const NormalizePolicy& policy);

// Text-payload classification: rule spans, pure line permutations (P8 for
// generated-doc entries), and the UNKNOWN fallback.
std::vector<Finding> classify_text_diff(const std::vector<std::string>& lines_a,
                                        const std::vector<std::string>& lines_b,
                                        std::string_view entry_name,
                                        archive::EntryKind kind,
                                        const NormalizePolicy& policy);

std::vector<std::string> split_text_lines(ByteSpan payload);

}  // namespace verijar::diffing

#endif  // VERIJAR_DIFF_HPP_
