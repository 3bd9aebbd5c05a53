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

#include "verijar/patterns.hpp"

#include "json.hpp"

namespace verijar::patterns {

namespace {

using S = Strategy;

std::vector<PatternDescriptor> build_registry() {
  std::vector<PatternDescriptor> r;
  r.push_back({PatternId::P1, RootCause::Environment, {S::Control, S::Interpretation}, false,
               "Timestamp",
               "Time-related information written into file contents by build tools or "
               "recorded in archive entry metadata.",
               "Pin the build clock (SOURCE_DATE_EPOCH or an intercepted time source), or "
               "normalize: replace recorded times with a placeholder and repack entries "
               "with a pinned modification time.",
               true});
  r.push_back({PatternId::P2, RootCause::Environment, {S::Control}, true,
               "JDK version",
               "The JDK release used for the build is written into MANIFEST.MF "
               "(Build-Jdk, Created-By).",
               "Build with one pinned JDK release and record the exact version in the "
               "build specification.",
               false});
  r.push_back({PatternId::P3, RootCause::Environment, {S::Control}, false,
               "Git information",
               "Git workspace state (branch tracking, remotes, dirty flags) serialized "
               "into packaged files such as git.json.",
               "Build from a clean clone with identical remote configuration and record "
               "the commit in the build specification.",
               false});
  r.push_back({PatternId::P4, RootCause::Environment, {S::Remediation, S::Control}, true,
               "User information",
               "The invoking user's name is written into MANIFEST.MF (Built-By).",
               "Set a fixed Built-By value under manifestEntries in the build "
               "configuration, or build inside a consistent environment; the normalizer "
               "can also drop the attribute and record the original value.",
               true});
  r.push_back({PatternId::P5, RootCause::Jdk, {S::Remediation}, true,
               "LineNumberTable",
               "The optional LineNumberTable debug attribute varies across compilations.",
               "Compile with -g:none (or the build tool's equivalent) so line-number "
               "debug info is omitted; stripping can also be enabled during "
               "normalization.",
               false});
  r.push_back({PatternId::P6, RootCause::Jdk, {S::Interpretation}, true,
               "Constant pool",
               "Constant pool entries are duplicated or emitted in a different order, "
               "shifting every index.",
               "Compare index-free canonical forms; rewrite pools by deduplicating and "
               "sorting entries in a deterministic order.",
               true});
  r.push_back({PatternId::P7, RootCause::Jdk, {S::Interpretation}, true,
               "Temporary variables",
               "Temporary local variables receive different slot ids across builds.",
               "Compare canonical forms with non-parameter slots renumbered by first "
               "use; slot ids do not change behavior.",
               true});
  r.push_back({PatternId::P8, RootCause::Jdk, {S::Control}, true,
               "Javadoc order",
               "Generated documentation entries are emitted in a random order by older "
               "javadoc releases.",
               "Upgrade the JDK to 8 b105 or newer so documentation entries are emitted "
               "deterministically.",
               false});
  r.push_back({PatternId::P9, RootCause::Jdk, {S::Interpretation}, true,
               "Inner class order",
               "The InnerClasses attribute lists nested classes in a non-deterministic "
               "order.",
               "Sort inner-class entries by class name during normalization.",
               true});
  r.push_back({PatternId::P10, RootCause::Jdk, {S::Interpretation}, true,
               "Method order",
               "Compiled methods appear in a different order inside the class file.",
               "Sort methods by name and descriptor during normalization.",
               true});
  r.push_back({PatternId::P11, RootCause::MultiThread, {S::Interpretation}, false,
               "Entry order",
               "Archive entries are packaged in thread-completion order.",
               "Repack the deliverable with entries sorted by name and pinned metadata.",
               true});
  r.push_back({PatternId::P12, RootCause::OtherTools, {S::Interpretation}, true,
               "Manifest properties",
               "List-valued manifest attributes (Export-Package, Private-Package, "
               "Import-Package) are emitted in a random element order.",
               "Sort the list elements during normalization.",
               true});
  r.push_back({PatternId::P13, RootCause::OtherTools, {S::Control}, true,
               "JSP compilation",
               "JSP precompilation emits dependency-cache fields (_jspx_dependants) "
               "whose content depends on the engine's caching option.",
               "Disable the JSP engine's caching option so generated sources are stable.",
               false});
  r.push_back({PatternId::P14, RootCause::Compound, {S::Control}, true,
               "Lambda numbering",
               "Synthetic lambda methods (lambda$m$k) receive their numeric ids from "
               "compilation order under older JDKs.",
               "Upgrade the JDK past jdk8-b44 and serialize compilation; canonical "
               "comparison can identify the pattern but rewriting ids is unsafe.",
               false});
  return r;
}

const PatternDescriptor& descriptor_in(const std::vector<PatternDescriptor>& r,
                                       PatternId id) {
  for (const PatternDescriptor& d : r) {
    if (d.id == id) return d;
  }
  throw Error("unknown pattern id");
}

void validate(const std::vector<PatternDescriptor>& r) {
  if (r.size() != 14) throw Error("pattern registry must contain exactly 14 entries");
  int java_specific = 0;
  std::set<PatternId> ids;
  for (const PatternDescriptor& d : r) {
    if (!ids.insert(d.id).second) throw Error("duplicate pattern id in registry");
    if (d.java_specific) ++java_specific;
    if (d.strategy.empty()) throw Error("pattern without a mitigation strategy");
  }
  if (java_specific != 11) throw Error("registry must mark exactly 11 java-specific patterns");
  auto want = [&](PatternId id, std::set<Strategy> s) {
    if (descriptor_in(r, id).strategy != s) {
      throw Error("registry strategy set mismatch for " + pattern_name(id));
    }
  };
  want(PatternId::P1, {S::Control, S::Interpretation});
  want(PatternId::P2, {S::Control});
  want(PatternId::P3, {S::Control});
  want(PatternId::P4, {S::Remediation, S::Control});
  want(PatternId::P5, {S::Remediation});
  want(PatternId::P6, {S::Interpretation});
  want(PatternId::P7, {S::Interpretation});
  want(PatternId::P8, {S::Control});
  want(PatternId::P9, {S::Interpretation});
  want(PatternId::P10, {S::Interpretation});
  want(PatternId::P11, {S::Interpretation});
  want(PatternId::P12, {S::Interpretation});
  want(PatternId::P13, {S::Control});
  want(PatternId::P14, {S::Control});
  const std::set<PatternId> interpretable = {
      PatternId::P1, PatternId::P4,  PatternId::P6,  PatternId::P7,
      PatternId::P9, PatternId::P10, PatternId::P11, PatternId::P12};
  for (const PatternDescriptor& d : r) {
    if (d.interpretable_here != (interpretable.count(d.id) > 0)) {
      throw Error("interpretable flag mismatch for " + pattern_name(d.id));
    }
  }
}

}  // namespace

const std::vector<PatternDescriptor>& registry() {
  static const std::vector<PatternDescriptor> r = [] {
    std::vector<PatternDescriptor> built = build_registry();
    validate(built);
    return built;
  }();
  return r;
}

const PatternDescriptor& descriptor(PatternId id) { return descriptor_in(registry(), id); }

std::string pattern_name(PatternId id) {
  if (id == PatternId::Unknown) return "UNKNOWN";
  return "P" + std::to_string(int(id));
}

std::optional<PatternId> parse_pattern(std::string_view s) {
  if (s.size() < 2 || (s[0] != 'P' && s[0] != 'p')) return std::nullopt;
  int n = 0;
  for (char c : s.substr(1)) {
    if (c < '0' || c > '9') return std::nullopt;
    n = n * 10 + (c - '0');
  }
  if (n < 1 || n > 14) return std::nullopt;
  return PatternId(n);
}

std::string root_cause_name(RootCause rc) {
  switch (rc) {
    case RootCause::Environment: return "RC1 environment";
    case RootCause::Jdk: return "RC2 jdk";
    case RootCause::MultiThread: return "RC3 multi-thread";
    case RootCause::OtherTools: return "RC4 other-tools";
    case RootCause::Compound: return "RC5 compound";
  }
  return "?";
}

std::string strategy_name(Strategy s) {
  switch (s) {
    case Strategy::Control: return "control";
    case Strategy::Interpretation: return "interpretation";
    case Strategy::Remediation: return "remediation";
  }
  return "?";
}

const std::set<PatternId>& interpretable_patterns() {
  static const std::set<PatternId> s = [] {
    std::set<PatternId> out;
    for (const PatternDescriptor& d : registry()) {
      if (d.interpretable_here) out.insert(d.id);
    }
    return out;
  }();
  return s;
}

std::string registry_json() {
  nlohmann::ordered_json doc = nlohmann::ordered_json::array();
  for (const PatternDescriptor& d : registry()) {
    nlohmann::ordered_json strategies = nlohmann::ordered_json::array();
    for (Strategy s : d.strategy) strategies.push_back(strategy_name(s));
    doc.push_back({{"id", pattern_name(d.id)},
                   {"name", d.name},
                   {"root_cause", root_cause_name(d.root_cause)},
                   {"strategy", strategies},
                   {"java_specific", d.java_specific},
                   {"interpretable", d.interpretable_here},
                   {"summary", d.summary},
                   {"advice", d.advice}});
  }
  return doc.dump(2);
}

}  // namespace verijar::patterns
