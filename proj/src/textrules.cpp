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

#include "verijar/textrules.hpp"

#include <algorithm>

namespace verijar::text {

using patterns::PatternId;

bool glob_match(std::string_view glob, std::string_view name) {
  // Iterative matcher with backtracking over '*' and '**'.
  struct State {
    size_t g, n;
  };
  std::vector<State> stack{{0, 0}};
  while (!stack.empty()) {
    auto [g, n] = stack.back();
    stack.pop_back();
    bool dead = false;
    while (!dead) {
      if (g == glob.size()) {
        if (n == name.size()) return true;
        break;
      }
      char c = glob[g];
      if (c == '*') {
        bool dstar = g + 1 < glob.size() && glob[g + 1] == '*';
        size_t next_g = g + (dstar ? 2 : 1);
        // Try consuming 0..k characters; push the longer consumption as a
        // backtrack point.
        if (n < name.size() && (dstar || name[n] != '/')) {
          stack.push_back({g, n + 1});
        }
        g = next_g;
        continue;
      }
      if (n < name.size() && (c == '?' ? name[n] != '/' : glob[g] == name[n])) {
        ++g;
        ++n;
        continue;
      }
      break;
    }
  }
  return false;
}

namespace {

TextRule make_rule(PatternId id, std::string glob, std::string regex_text,
                   RuleAction action, std::string placeholder = "") {
  TextRule r;
  r.id = id;
  r.file_glob = std::move(glob);
  r.regex_text = std::move(regex_text);
  r.action = action;
  r.placeholder = std::move(placeholder);
  try {
    r.regex = std::regex(r.regex_text, std::regex::ECMAScript);
  } catch (const std::regex_error& e) {
    throw RuleError(std::string("rule regex failed to compile: ") + e.what());
  }
  return r;
}

// Day/month-name timestamps as emitted by java.util.Date.toString and the
// maven properties writer: "Sun Sep 18 22:43:23 EDT 2021".
const char* kDateWordsRegex =
    "(?:Mon|Tue|Wed|Thu|Fri|Sat|Sun) "
    "(?:Jan|Feb|Mar|Apr|May|Jun|Jul|Aug|Sep|Oct|Nov|Dec) "
    "[ 0-9][0-9] [0-9]{2}:[0-9]{2}:[0-9]{2}(?: [A-Z]{2,5})? [0-9]{4}";

const char* kIso8601Regex =
    "[0-9]{4}-[0-9]{2}-[0-9]{2}[T ][0-9]{2}:[0-9]{2}:[0-9]{2}"
    "(?:\\.[0-9]{1,9})?(?:Z|[+-][0-9]{2}:?[0-9]{2})?";

}  // namespace

bool timestamp_attribute(std::string_view lower_name) {
  return lower_name == "bnd-lastmodified" || lower_name == "build-time" ||
         lower_name == "build-date" || lower_name == "build-timestamp";
}

const std::vector<TextRule>& builtin_rules() {
  static const std::vector<TextRule> rules = [] {
    std::vector<TextRule> r;
    r.push_back(make_rule(PatternId::P1, "**", kDateWordsRegex,
                          RuleAction::ReplaceWithPlaceholder, "<TIMESTAMP>"));
    r.push_back(make_rule(PatternId::P1, "**", kIso8601Regex,
                          RuleAction::ReplaceWithPlaceholder, "<TIMESTAMP>"));
    // git metadata serialized by build plugins ("git.json", "git.properties").
    r.push_back(make_rule(
        PatternId::P3, "**git.json",
        "\"git\\.[A-Za-z0-9_.\\-]+\"[ \\t]*:[ \\t]*(\"[^\"]*\"|-?[0-9]+|true|false|null)",
        RuleAction::ReplaceWithPlaceholder, "\"<GIT_STATE>\""));
    r.push_back(make_rule(PatternId::P3, "**git.properties",
                          "git\\.[A-Za-z0-9_.\\-]+[ \\t]*[=:][ \\t]*(.+)",
                          RuleAction::ReplaceWithPlaceholder, "<GIT_STATE>"));
    // Manifest attribute rules are matched against the attribute name.
    r.push_back(make_rule(PatternId::P4, "**.MF", "^Buil[dt]-By$", RuleAction::DropAttribute));
    r.push_back(make_rule(PatternId::P2, "**.MF", "^(Build-Jdk|Build-Jdk-Spec|Created-By)$",
                          RuleAction::Classify));
    r.push_back(make_rule(PatternId::P12, "**.MF",
                          "^(Export-Package|Private-Package|Import-Package)$",
                          RuleAction::SortListValue));
    r.push_back(make_rule(PatternId::P13, "**.java", "_jspx_dependants", RuleAction::Classify));
    return r;
  }();
  return rules;
}

std::vector<TextRule> parse_rules(std::string_view content) {
  std::vector<TextRule> out;
  size_t line_no = 0;
  size_t pos = 0;
  while (pos <= content.size()) {
    size_t eol = content.find('\n', pos);
    std::string_view line = content.substr(
        pos, eol == std::string_view::npos ? content.size() - pos : eol - pos);
    pos = eol == std::string_view::npos ? content.size() + 1 : eol + 1;
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) {
      line.remove_suffix(1);
    }
    while (!line.empty() && line.front() == ' ') line.remove_prefix(1);
    if (line.empty() || line[0] == '#') continue;

    auto fail = [&](const std::string& why) {
      throw RuleError("rules line " + std::to_string(line_no) + ": " + why);
    };
    std::vector<std::string> fields;
    size_t start = 0;
    for (int i = 0; i < 3; ++i) {
      size_t bar = line.find('|', start);
      if (bar == std::string_view::npos) fail("expected 4 '|'-separated fields");
      fields.emplace_back(line.substr(start, bar - start));
      start = bar + 1;
    }
    fields.emplace_back(line.substr(start));
    for (std::string& f : fields) {
      while (!f.empty() && f.front() == ' ') f.erase(f.begin());
      while (!f.empty() && f.back() == ' ') f.pop_back();
    }
    auto id = patterns::parse_pattern(fields[0]);
    if (!id) fail("unknown pattern id '" + fields[0] + "'");
    std::string action_word = fields[2];
    std::string placeholder;
    size_t space = action_word.find(' ');
    if (space != std::string::npos) {
      placeholder = action_word.substr(space + 1);
      action_word = action_word.substr(0, space);
    }
    RuleAction action;
    if (action_word == "classify") {
      action = RuleAction::Classify;
    } else if (action_word == "replace") {
      action = RuleAction::ReplaceWithPlaceholder;
      if (placeholder.empty()) fail("replace action requires a placeholder");
    } else if (action_word == "sort-list") {
      action = RuleAction::SortListValue;
    } else if (action_word == "drop-attr") {
      action = RuleAction::DropAttribute;
    } else {
      fail("unknown action '" + action_word + "'");
      return out;  // unreachable
    }
    out.push_back(make_rule(*id, fields[1], fields[3], action, placeholder));
  }
  return out;
}

namespace {

std::string bounded(std::string_view s) {
  constexpr size_t kLimit = 256;
  if (s.size() <= kLimit) return std::string(s);
  return std::string(s.substr(0, kLimit)) + "...";
}

// Replaces the first capture group when present, the whole match otherwise.
std::string replace_matches(const std::string& input, const TextRule& rule,
                            std::vector<RuleHit>* hits, bool* changed) {
  std::string out;
  auto begin = std::sregex_iterator(input.begin(), input.end(), rule.regex);
  auto end = std::sregex_iterator();
  size_t cursor = 0;
  for (auto it = begin; it != end; ++it) {
    const std::smatch& m = *it;
    bool use_group = m.size() > 1 && m[1].matched;
    size_t rep_start = size_t(use_group ? m.position(1) : m.position(0));
    size_t rep_len = size_t(use_group ? m.length(1) : m.length(0));
    if (rep_start < cursor) continue;  // overlapping match after a group replace
    std::string original = input.substr(rep_start, rep_len);
    if (original == rule.placeholder) continue;  // already normalized
    out.append(input, cursor, rep_start - cursor);
    out.append(rule.placeholder);
    cursor = rep_start + rep_len;
    if (hits) hits->push_back({rule.id, bounded(original), true});
    *changed = true;
  }
  if (cursor == 0) return input;
  out.append(input, cursor, input.size() - cursor);
  return out;
}

}  // namespace

ApplyResult apply_text_rules(std::string_view entry_name, ByteSpan payload,
                             const std::vector<TextRule>& rules,
                             const std::set<patterns::PatternId>& enabled) {
  std::string content = to_string(payload);
  std::vector<RuleHit> hits;
  for (const TextRule& rule : rules) {
    if (!glob_match(rule.file_glob, entry_name)) continue;
    if (rule.action == RuleAction::ReplaceWithPlaceholder) {
      if (!enabled.count(rule.id)) {
        // Classification only: record matches without rewriting.
        auto begin = std::cregex_iterator(content.data(), content.data() + content.size(),
                                          rule.regex);
        for (auto it = begin; it != std::cregex_iterator(); ++it) {
          if (it->str(0) == rule.placeholder) continue;
          hits.push_back({rule.id, bounded(it->str(0)), false});
        }
        continue;
      }
      bool changed = false;
      content = replace_matches(content, rule, &hits, &changed);
    } else if (rule.action == RuleAction::Classify) {
      auto begin = std::cregex_iterator(content.data(), content.data() + content.size(),
                                        rule.regex);
      for (auto it = begin; it != std::cregex_iterator(); ++it) {
        hits.push_back({rule.id, bounded(it->str(0)), false});
      }
    }
    // SortListValue and DropAttribute apply to manifests, handled separately.
  }
  return {to_bytes(content), std::move(hits)};
}

Bytes replace_all_rules(std::string_view entry_name, ByteSpan payload,
                        const std::vector<TextRule>& rules, std::vector<RuleHit>* hits) {
  std::string content = to_string(payload);
  for (const TextRule& rule : rules) {
    if (rule.action != RuleAction::ReplaceWithPlaceholder) continue;
    if (!glob_match(rule.file_glob, entry_name)) continue;
    bool changed = false;
    content = replace_matches(content, rule, hits, &changed);
  }
  return to_bytes(content);
}

}  // namespace verijar::text
