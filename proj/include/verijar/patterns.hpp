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
// The registry of known non-determinism patterns: root cause, mitigation
// strategies, and whether this toolkit can eliminate the difference by
// transparent post-processing.

#ifndef VERIJAR_PATTERNS_HPP_
#define VERIJAR_PATTERNS_HPP_

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "verijar/common.hpp"

namespace verijar::patterns {

enum class PatternId {
  P1 = 1,  // timestamps
  P2,      // JDK version in manifest
  P3,      // git workspace state
  P4,      // user information in manifest
  P5,      // LineNumberTable
  P6,      // constant pool order/duplication
  P7,      // temporary variable slot ids
  P8,      // generated documentation order
  P9,      // inner class order
  P10,     // method order
  P11,     // archive entry order
  P12,     // list-valued manifest properties
  P13,     // JSP precompilation cache fields
  P14,     // lambda method numbering
  Unknown = 99,
};

enum class RootCause {
  Environment,  // RC1
  Jdk,          // RC2
  MultiThread,  // RC3
  OtherTools,   // RC4
  Compound,     // RC5
};

enum class Strategy { Control, Interpretation, Remediation };

struct PatternDescriptor {
  PatternId id;
  RootCause root_cause;
  std::set<Strategy> strategy;
  bool java_specific;
  std::string name;
  std::string summary;
  std::string advice;
  // True when this toolkit can make the difference vanish by normalization.
  bool interpretable_here;
};

// The full validated registry in stable order P1..P14. Registry invariants
// (count, java-specific count, strategy sets) are asserted on first use.
const std::vector<PatternDescriptor>& registry();

const PatternDescriptor& descriptor(PatternId id);

std::string pattern_name(PatternId id);                    // "P1".."P14", "UNKNOWN"
std::optional<PatternId> parse_pattern(std::string_view);  // accepts "P1".."P14"
std::string root_cause_name(RootCause rc);
std::string strategy_name(Strategy s);

const std::set<PatternId>& interpretable_patterns();

// Registry as a JSON document for report embedding (serialized string to
// keep this header light).
std::string registry_json();

}  // namespace verijar::patterns

#endif  // VERIJAR_PATTERNS_HPP_
