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
// Rule-driven classification and normalization of textual payloads. Each
// rule binds a pattern id to an entry-name glob, a regular expression, and
// an action. Replacement rules rewrite the first capture group when the
// expression has one, the whole match otherwise.

#ifndef VERIJAR_TEXTRULES_HPP_
#define VERIJAR_TEXTRULES_HPP_

#include <regex>
#include <string>
#include <vector>

#include "verijar/common.hpp"
#include "verijar/patterns.hpp"

namespace verijar::text {

enum class RuleAction { Classify, ReplaceWithPlaceholder, SortListValue, DropAttribute };

struct TextRule {
  patterns::PatternId id = patterns::PatternId::Unknown;
  std::string file_glob;
  std::string regex_text;
  RuleAction action = RuleAction::Classify;
  std::string placeholder;  // ReplaceWithPlaceholder only
  std::regex regex;         // compiled from regex_text at load time
};

struct RuleHit {
  patterns::PatternId id;
  std::string excerpt;   // the matched text (bounded)
  bool replaced = false;
};

// Glob over entry names: '*' within a segment, '?', '**' across segments.
bool glob_match(std::string_view glob, std::string_view name);

// Manifest attributes whose values record build times (epoch millis or
// dates); classified and normalized as timestamps.
bool timestamp_attribute(std::string_view lower_name);

// The built-in catalog: timestamp placeholders (P1), JDK-version and git
// classification (P2, P3), Built-By handling (P4), manifest list sorting
// (P12), and the JSP cache marker (P13).
const std::vector<TextRule>& builtin_rules();

// One rule per line: `<pattern> | <glob> | <action>[ <placeholder>] | <regex>`.
// Lines starting with '#' and blank lines are skipped. Throws RuleError on
// any malformed record or regex.
std::vector<TextRule> parse_rules(std::string_view text);

struct ApplyResult {
  Bytes payload;
  std::vector<RuleHit> hits;
};

// Applies matching rules to a textual payload. Replacement fires only for
// rules whose pattern is in `enabled`; other matching rules classify.
ApplyResult apply_text_rules(std::string_view entry_name, ByteSpan payload,
                             const std::vector<TextRule>& rules,
                             const std::set<patterns::PatternId>& enabled);

// Replacement across the board regardless of enablement; used to test
// whether two payloads converge under the rule set.
Bytes replace_all_rules(std::string_view entry_name, ByteSpan payload,
                        const std::vector<TextRule>& rules,
                        std::vector<RuleHit>* hits);

}  // namespace verijar::text

#endif  // VERIJAR_TEXTRULES_HPP_
