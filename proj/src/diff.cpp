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

#include "verijar/diff.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "verijar/classcanon.hpp"
#include "verijar/classfile.hpp"
#include "verijar/manifest.hpp"

namespace verijar::diffing {

using archive::ArchiveEntry;
using archive::EntryKind;
using archive::PackageModel;
using patterns::PatternId;

const char* resolution_name(Resolution r) {
  switch (r) {
    case Resolution::None: return "none";
    case Resolution::Canonicalization: return "canonicalization";
    case Resolution::TextRule: return "text-rule";
    case Resolution::EntryReorder: return "entry-reorder";
  }
  return "?";
}

std::vector<std::string> split_text_lines(ByteSpan payload) {
  std::vector<std::string> lines;
  std::string current;
  for (uint8_t c : payload) {
    if (c == '\n') {
      if (!current.empty() && current.back() == '\r') current.pop_back();
      lines.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(char(c));
    }
  }
  if (!current.empty()) lines.push_back(std::move(current));
  return lines;
}

namespace {

constexpr size_t kEvidenceLimit = 4096;

std::string bounded(std::string s) {
  if (s.size() > kEvidenceLimit) {
    s.resize(kEvidenceLimit);
    s += "...";
  }
  return s;
}

std::string excerpt_around(const std::vector<std::string>& lines, size_t index) {
  std::string out;
  size_t from = index >= 2 ? index - 2 : 0;
  size_t to = std::min(lines.size(), index + 3);
  for (size_t i = from; i < to; ++i) {
    out += lines[i];
    out += '\n';
  }
  return bounded(std::move(out));
}

std::string hex_excerpt(ByteSpan a, ByteSpan b) {
  size_t i = 0;
  size_t n = std::min(a.size(), b.size());
  while (i < n && a[i] == b[i]) ++i;
  size_t from = i >= 16 ? i - 16 : 0;
  return "offset " + std::to_string(i) + ": " +
         hex(a.subspan(from, std::min<size_t>(64, a.size() - from)));
}

Finding make_finding(std::string entry, PatternId pattern, std::vector<std::string> locus,
                     std::string left, std::string right, Resolution res,
                     std::string note = "") {
  Finding f;
  f.entry_name = std::move(entry);
  f.pattern = pattern;
  f.locus = std::move(locus);
  if (f.locus.empty()) f.locus.push_back("entry");
  f.evidence_left = bounded(std::move(left));
  f.evidence_right = bounded(std::move(right));
  f.resolved_by = res;
  f.note = std::move(note);
  f.candidates.push_back(pattern);
  return f;
}

// ---------------------------------------------------------------------------
// Class entries
// ---------------------------------------------------------------------------

struct AxisInfo {
  PatternId pattern;
  bool classfile::ClassCanonPolicy::* field;
};

const AxisInfo kAxes[] = {
    {PatternId::P5, &classfile::ClassCanonPolicy::strip_line_numbers},
    {PatternId::P7, &classfile::ClassCanonPolicy::relabel_slots},
    {PatternId::P9, &classfile::ClassCanonPolicy::sort_inner_classes},
    {PatternId::P10, &classfile::ClassCanonPolicy::sort_methods},
    {PatternId::P14, &classfile::ClassCanonPolicy::canon_lambdas},
};

Resolution class_axis_resolution(PatternId id, const NormalizePolicy& policy) {
  switch (id) {
    case PatternId::P5:
      return policy.strip_line_numbers ? Resolution::Canonicalization : Resolution::None;
    case PatternId::P14:
      return Resolution::None;
    default:
      return policy.is_enabled(id) ? Resolution::Canonicalization : Resolution::None;
  }
}

std::vector<Finding> compare_class_entries(const std::string& name, ByteSpan bytes_a,
                                           ByteSpan bytes_b,
                                           const NormalizePolicy& policy) {
  std::vector<Finding> out;
  classfile::ClassModel ma, mb;
  try {
    ma = classfile::parse_class(bytes_a);
    mb = classfile::parse_class(bytes_b);
  } catch (const Error& e) {
    out.push_back(make_finding(name, PatternId::Unknown, {"class"}, "", "",
                               Resolution::None,
                               std::string("class file failed to parse: ") + e.what()));
    return out;
  }

  classfile::ClassCanonPolicy diag = classfile::ClassCanonPolicy::all_axes();
  classfile::CanonicalClassForm diag_a = classfile::canonicalize_class(ma, diag);
  classfile::CanonicalClassForm diag_b = classfile::canonicalize_class(mb, diag);

  if (diag_a.digest != diag_b.digest) {
    // Outside every normalization axis: drill down to the first divergence.
    size_t i = 0;
    size_t n = std::min(diag_a.lines.size(), diag_b.lines.size());
    while (i < n && diag_a.lines[i] == diag_b.lines[i]) ++i;
    std::vector<std::string> locus = {"class"};
    if (i < diag_a.loci.size()) {
      locus.push_back(diag_a.loci[i]);
    } else if (!diag_a.loci.empty()) {
      locus.push_back(diag_a.loci.back());
    }
    out.push_back(make_finding(name, PatternId::Unknown, std::move(locus),
                               excerpt_around(diag_a.lines, i),
                               excerpt_around(diag_b.lines, i), Resolution::None,
                               "difference outside all canonicalization axes"));
    return out;
  }

  // Equal under the full axis set: find which axes are necessary.
  std::set<PatternId> necessary;
  for (const AxisInfo& axis : kAxes) {
    classfile::ClassCanonPolicy reduced = diag;
    reduced.*axis.field = false;
    std::string da = classfile::canonicalize_class(ma, reduced).digest;
    std::string db = classfile::canonicalize_class(mb, reduced).digest;
    if (da != db) necessary.insert(axis.pattern);
  }

  Bytes pool_a = classfile::serialized_pool_bytes(ma);
  Bytes pool_b = classfile::serialized_pool_bytes(mb);
  bool pool_differs = pool_a != pool_b;

  // Evidence against the axis-free form shows the difference verbatim.
  classfile::CanonicalClassForm none_a =
      classfile::canonicalize_class(ma, classfile::ClassCanonPolicy::none());
  classfile::CanonicalClassForm none_b =
      classfile::canonicalize_class(mb, classfile::ClassCanonPolicy::none());
  auto axis_evidence = [&](std::string& left, std::string& right,
                           std::vector<std::string>& locus) {
    size_t i = 0;
    size_t n = std::min(none_a.lines.size(), none_b.lines.size());
    while (i < n && none_a.lines[i] == none_b.lines[i]) ++i;
    left = excerpt_around(none_a.lines, i);
    right = excerpt_around(none_b.lines, i);
    locus = {"class"};
    if (i < none_a.loci.size()) locus.push_back(none_a.loci[i]);
  };

  for (const AxisInfo& axis : kAxes) {
    if (!necessary.count(axis.pattern)) continue;
    std::string left, right;
    std::vector<std::string> locus;
    axis_evidence(left, right, locus);
    std::string note;
    if (axis.pattern == PatternId::P14 &&
        (!diag_a.lambda_converged || !diag_b.lambda_converged)) {
      note = "lambda relabeling did not converge; no equivalence claim";
    }
    out.push_back(make_finding(name, axis.pattern, std::move(locus), std::move(left),
                               std::move(right),
                               class_axis_resolution(axis.pattern, policy),
                               std::move(note)));
  }

  if (pool_differs && !necessary.count(PatternId::P14)) {
    std::vector<std::string> dump_a = classfile::pool_dump(ma);
    std::vector<std::string> dump_b = classfile::pool_dump(mb);
    size_t i = 0;
    size_t n = std::min(dump_a.size(), dump_b.size());
    while (i < n && dump_a[i] == dump_b[i]) ++i;
    out.push_back(make_finding(
        name, PatternId::P6, {"class", "constant-pool"},
        excerpt_around(dump_a, i), excerpt_around(dump_b, i),
        policy.is_enabled(PatternId::P6) ? Resolution::Canonicalization : Resolution::None));
  }
  if (out.empty()) {
    // Canonically equal with identical pools yet different bytes: constant
    // reference encoding (e.g. ldc vs ldc_w width) is the remaining surface.
    out.push_back(make_finding(
        name, PatternId::P6, {"class", "constant-pool"},
        hex_excerpt(bytes_a, bytes_b), hex_excerpt(bytes_b, bytes_a),
        policy.is_enabled(PatternId::P6) ? Resolution::Canonicalization : Resolution::None,
        "constant reference encoding differs"));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Manifest entries
// ---------------------------------------------------------------------------

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return char(std::tolower(c)); });
  return out;
}

const text::TextRule* match_attr_rule(const std::string& attr_name,
                                      const std::string& entry_name,
                                      const NormalizePolicy& policy,
                                      std::initializer_list<text::RuleAction> actions) {
  for (const text::TextRule& rule : policy.rules) {
    bool action_ok = false;
    for (text::RuleAction a : actions) action_ok |= rule.action == a;
    if (!action_ok) continue;
    if (!text::glob_match(rule.file_glob, entry_name)) continue;
    if (std::regex_search(attr_name, rule.regex)) return &rule;
  }
  return nullptr;
}

// Every rule-derived label that matched the attribute, kept for audit.
std::vector<PatternId> attr_candidates(const std::string& attr_name,
                                       const std::string& entry_name,
                                       const NormalizePolicy& policy) {
  std::vector<PatternId> out;
  for (const text::TextRule& rule : policy.rules) {
    if (rule.action == text::RuleAction::ReplaceWithPlaceholder) continue;
    if (!text::glob_match(rule.file_glob, entry_name)) continue;
    if (!std::regex_search(attr_name, rule.regex)) continue;
    if (std::find(out.begin(), out.end(), rule.id) == out.end()) out.push_back(rule.id);
  }
  return out;
}

bool is_timestamp_attr(const std::string& lower_name) {
  return text::timestamp_attribute(lower_name);
}

std::vector<Finding> compare_manifest_sections(const std::string& entry_name,
                                               const std::string& section_label,
                                               const text::ManifestSection& sa,
                                               const text::ManifestSection& sb,
                                               const NormalizePolicy& policy) {
  std::vector<Finding> out;
  std::map<std::string, const text::ManifestAttr*> attrs_a, attrs_b;
  std::vector<std::string> order_a, order_b;
  for (const text::ManifestAttr& a : sa.attrs) {
    attrs_a[lower(a.name)] = &a;
    order_a.push_back(lower(a.name));
  }
  for (const text::ManifestAttr& b : sb.attrs) {
    attrs_b[lower(b.name)] = &b;
    order_b.push_back(lower(b.name));
  }

  std::set<std::string> names;
  for (auto& [k, v] : attrs_a) names.insert(k);
  for (auto& [k, v] : attrs_b) names.insert(k);

  for (const std::string& key : names) {
    const text::ManifestAttr* aa = attrs_a.count(key) ? attrs_a[key] : nullptr;
    const text::ManifestAttr* bb = attrs_b.count(key) ? attrs_b[key] : nullptr;
    std::string va = aa ? aa->value : "<absent>";
    std::string vb = bb ? bb->value : "<absent>";
    if (aa && bb && aa->value == bb->value) continue;
    std::string display_name = aa ? aa->name : bb->name;
    std::vector<std::string> locus = {section_label, display_name};
    std::string left = display_name + ": " + va;
    std::string right = display_name + ": " + vb;

    std::vector<PatternId> candidates = attr_candidates(display_name, entry_name, policy);
    auto with_candidates = [&](Finding f) {
      if (candidates.size() > 1) f.candidates = candidates;
      return f;
    };
    if (const text::TextRule* drop = match_attr_rule(display_name, entry_name, policy,
                                                     {text::RuleAction::DropAttribute})) {
      out.push_back(with_candidates(
          make_finding(entry_name, drop->id, locus, left, right,
                       policy.is_enabled(drop->id) ? Resolution::TextRule
                                                   : Resolution::None)));
      continue;
    }
    if (const text::TextRule* sorter = match_attr_rule(display_name, entry_name, policy,
                                                       {text::RuleAction::SortListValue})) {
      std::vector<std::string> la = text::split_list_value(va);
      std::vector<std::string> lb = text::split_list_value(vb);
      std::vector<std::string> ca = la, cb = lb;
      std::sort(ca.begin(), ca.end());
      std::sort(cb.begin(), cb.end());
      if (aa && bb && ca == cb) {
        out.push_back(with_candidates(
            make_finding(entry_name, sorter->id, locus, left, right,
                         policy.is_enabled(sorter->id) ? Resolution::TextRule
                                                       : Resolution::None)));
        continue;
      }
      // Same attribute but truly different content: fall through.
    }
    if (const text::TextRule* cls = match_attr_rule(display_name, entry_name, policy,
                                                    {text::RuleAction::Classify})) {
      out.push_back(with_candidates(
          make_finding(entry_name, cls->id, locus, left, right, Resolution::None)));
      continue;
    }
    if (is_timestamp_attr(key)) {
      out.push_back(make_finding(entry_name, PatternId::P1, locus, left, right,
                                 policy.is_enabled(PatternId::P1) ? Resolution::TextRule
                                                                  : Resolution::None));
      continue;
    }
    // Generic value: a timestamp replacement that makes the values converge
    // classifies as P1.
    if (aa && bb) {
      Bytes na = text::replace_all_rules(entry_name, as_span(std::string_view(va)),
                                         policy.rules, nullptr);
      Bytes nb = text::replace_all_rules(entry_name, as_span(std::string_view(vb)),
                                         policy.rules, nullptr);
      if (na == nb && !na.empty()) {
        out.push_back(make_finding(entry_name, PatternId::P1, locus, left, right,
                                   policy.is_enabled(PatternId::P1) ? Resolution::TextRule
                                                                    : Resolution::None));
        continue;
      }
    }
    out.push_back(make_finding(entry_name, PatternId::Unknown, locus, left, right,
                               Resolution::None, "unclassified manifest attribute change"));
  }

  // Pure attribute reordering within the section.
  std::vector<std::string> sorted_a = order_a, sorted_b = order_b;
  std::sort(sorted_a.begin(), sorted_a.end());
  std::sort(sorted_b.begin(), sorted_b.end());
  if (order_a != order_b && sorted_a == sorted_b) {
    std::string left, right;
    for (const std::string& s : order_a) left += s + "\n";
    for (const std::string& s : order_b) right += s + "\n";
    out.push_back(make_finding(entry_name, PatternId::P12,
                               {section_label, "attribute-order"}, left, right,
                               policy.is_enabled(PatternId::P12)
                                   ? Resolution::Canonicalization
                                   : Resolution::None));
  }
  return out;
}

std::vector<Finding> compare_manifest_entries(const std::string& name, ByteSpan bytes_a,
                                              ByteSpan bytes_b,
                                              const NormalizePolicy& policy);

// ---------------------------------------------------------------------------
// Text entries
// ---------------------------------------------------------------------------

bool doc_like(std::string_view name) {
  return text::glob_match("**.html", name) || text::glob_match("**.htm", name) ||
         text::glob_match("**package-list", name) ||
         text::glob_match("**element-list", name) ||
         text::glob_match("**/apidocs/**", name);
}

std::vector<Finding> findings_from_hits(const std::string& entry_name,
                                        const std::vector<text::RuleHit>& hits_a,
                                        const std::vector<text::RuleHit>& hits_b,
                                        const NormalizePolicy& policy) {
  std::map<PatternId, std::pair<std::string, std::string>> evidence;
  for (const text::RuleHit& h : hits_a) {
    if (evidence[h.id].first.empty()) evidence[h.id].first = h.excerpt;
  }
  for (const text::RuleHit& h : hits_b) {
    if (evidence[h.id].second.empty()) evidence[h.id].second = h.excerpt;
  }
  std::vector<Finding> out;
  for (auto& [id, ev] : evidence) {
    Resolution res = policy.is_enabled(id) ? Resolution::TextRule : Resolution::None;
    out.push_back(make_finding(entry_name, id, {"text"}, ev.first, ev.second, res));
  }
  return out;
}

}  // namespace

std::vector<Finding> classify_text_diff(const std::vector<std::string>& lines_a,
                                        const std::vector<std::string>& lines_b,
                                        std::string_view entry_name,
                                        archive::EntryKind kind,
                                        const NormalizePolicy& policy) {
  (void)kind;
  std::string name(entry_name);
  std::vector<Finding> out;

  // Normalize both sides under every replacement rule, then compare.
  auto join = [](const std::vector<std::string>& lines) {
    std::string s;
    for (const std::string& l : lines) {
      s += l;
      s += '\n';
    }
    return s;
  };
  std::vector<text::RuleHit> hits_a, hits_b;
  Bytes norm_a = text::replace_all_rules(name, as_span(std::string_view(join(lines_a))),
                                         policy.rules, &hits_a);
  Bytes norm_b = text::replace_all_rules(name, as_span(std::string_view(join(lines_b))),
                                         policy.rules, &hits_b);
  std::vector<std::string> na = split_text_lines(as_span(norm_a));
  std::vector<std::string> nb = split_text_lines(as_span(norm_b));

  if (na == nb) {
    out = findings_from_hits(name, hits_a, hits_b, policy);
    if (out.empty()) {
      out.push_back(make_finding(name, PatternId::Unknown, {"text"}, "", "",
                                 Resolution::None, "payloads differ only in bytes the "
                                                   "line splitter does not expose"));
    }
    return out;
  }

  std::vector<std::string> ma = na, mb = nb;
  std::sort(ma.begin(), ma.end());
  std::sort(mb.begin(), mb.end());
  if (ma == mb) {
    // Pure line permutation.
    size_t i = 0;
    while (i < na.size() && na[i] == nb[i]) ++i;
    PatternId id = doc_like(name) ? PatternId::P8 : PatternId::Unknown;
    std::string note = id == PatternId::P8 ? "" : "line permutation in non-doc entry";
    out = findings_from_hits(name, hits_a, hits_b, policy);
    out.push_back(make_finding(name, id, {"text", "line-order"},
                               excerpt_around(na, i), excerpt_around(nb, i),
                               Resolution::None, note));
    return out;
  }

  // Residual content change: lines present on one side only.
  std::map<std::string, int> counts;
  for (const std::string& l : na) counts[l]++;
  for (const std::string& l : nb) counts[l]--;
  std::vector<std::string> only_a, only_b;
  for (auto& [line, n] : counts) {
    for (int i = 0; i < n; ++i) only_a.push_back(line);
    for (int i = 0; i < -n; ++i) only_b.push_back(line);
  }

  // Bucket residual lines by the first classify rule that matches; lines
  // with no rule stay UNKNOWN.
  std::map<PatternId, std::pair<std::string, std::string>> buckets;
  std::pair<std::string, std::string> unknown_bucket;
  auto bucket_line = [&](const std::string& line, bool left) {
    for (const text::TextRule& rule : policy.rules) {
      if (rule.action != text::RuleAction::Classify) continue;
      if (!text::glob_match(rule.file_glob, name)) continue;
      if (std::regex_search(line, rule.regex)) {
        auto& ev = buckets[rule.id];
        (left ? ev.first : ev.second) += line + "\n";
        return;
      }
    }
    (left ? unknown_bucket.first : unknown_bucket.second) += line + "\n";
  };
  for (const std::string& l : only_a) bucket_line(l, true);
  for (const std::string& l : only_b) bucket_line(l, false);

  out = findings_from_hits(name, hits_a, hits_b, policy);
  for (auto& [id, ev] : buckets) {
    out.push_back(make_finding(name, id, {"text"}, ev.first, ev.second, Resolution::None));
  }
  if (!unknown_bucket.first.empty() || !unknown_bucket.second.empty()) {
    out.push_back(make_finding(name, PatternId::Unknown, {"text"}, unknown_bucket.first,
                               unknown_bucket.second, Resolution::None,
                               "unclassified content change"));
  }
  return out;
}

namespace {

std::vector<Finding> compare_text_entries(const std::string& name, EntryKind kind,
                                          ByteSpan payload_a, ByteSpan payload_b,
                                          const NormalizePolicy& policy) {
  return classify_text_diff(split_text_lines(payload_a), split_text_lines(payload_b),
                            name, kind, policy);
}

std::vector<Finding> compare_manifest_entries(const std::string& name, ByteSpan bytes_a,
                                              ByteSpan bytes_b,
                                              const NormalizePolicy& policy) {
  text::ManifestModel ma, mb;
  try {
    ma = text::parse_manifest(bytes_a);
    mb = text::parse_manifest(bytes_b);
  } catch (const MalformedManifest&) {
    return compare_text_entries(name, EntryKind::Text, bytes_a, bytes_b, policy);
  }
  std::vector<Finding> out =
      compare_manifest_sections(name, "main-section", ma.main, mb.main, policy);

  std::map<std::string, const text::ManifestSection*> named_a, named_b;
  for (const text::ManifestSection& s : ma.named) named_a[s.name] = &s;
  for (const text::ManifestSection& s : mb.named) named_b[s.name] = &s;
  std::set<std::string> section_names;
  for (auto& [k, v] : named_a) section_names.insert(k);
  for (auto& [k, v] : named_b) section_names.insert(k);
  for (const std::string& sn : section_names) {
    const text::ManifestSection* sa = named_a.count(sn) ? named_a[sn] : nullptr;
    const text::ManifestSection* sb = named_b.count(sn) ? named_b[sn] : nullptr;
    if (!sa || !sb) {
      out.push_back(make_finding(name, PatternId::Unknown, {"section", sn},
                                 sa ? "present" : "<absent>", sb ? "present" : "<absent>",
                                 Resolution::None, "manifest section present on one side"));
      continue;
    }
    auto section_findings =
        compare_manifest_sections(name, "section " + sn, *sa, *sb, policy);
    out.insert(out.end(), section_findings.begin(), section_findings.end());
  }
  return out;
}

std::vector<Finding> compare_entry_pair(const ArchiveEntry& ea, const ArchiveEntry& eb,
                                        const NormalizePolicy& policy);

std::vector<Finding> compare_nested(const std::string& name, const ArchiveEntry& ea,
                                    const ArchiveEntry& eb, const NormalizePolicy& policy) {
  try {
    PackageModel inner_a = archive::read_package(as_span(ea.payload));
    PackageModel inner_b = archive::read_package(as_span(eb.payload));
    DiffOutcome inner = compare_packages(inner_a, inner_b, policy.nested());
    std::vector<Finding> out;
    for (Finding f : inner.findings) {
      f.entry_name = name + "!/" + f.entry_name;
      out.push_back(std::move(f));
    }
    return out;
  } catch (const Error& e) {
    return {make_finding(name, PatternId::Unknown, {"nested-archive"}, "", "",
                         Resolution::None,
                         std::string("nested archive failed to parse: ") + e.what())};
  }
}

std::vector<Finding> compare_entry_pair(const ArchiveEntry& ea, const ArchiveEntry& eb,
                                        const NormalizePolicy& policy) {
  const std::string& name = ea.name;
  if (ea.payload == eb.payload) return {};
  if (ea.kind != eb.kind) {
    return {make_finding(name, PatternId::Unknown, {"entry"}, archive::kind_name(ea.kind),
                         archive::kind_name(eb.kind), Resolution::None,
                         "entry kind differs between packages")};
  }
  switch (ea.kind) {
    case EntryKind::ClassFile:
      return compare_class_entries(name, as_span(ea.payload), as_span(eb.payload), policy);
    case EntryKind::Manifest:
      return compare_manifest_entries(name, as_span(ea.payload), as_span(eb.payload),
                                      policy);
    case EntryKind::Properties:
    case EntryKind::Xml:
    case EntryKind::Json:
    case EntryKind::Text:
      return compare_text_entries(name, ea.kind, as_span(ea.payload), as_span(eb.payload),
                                  policy);
    case EntryKind::Directory:
      return {};
    case EntryKind::Opaque: {
      if (policy.nested_depth > 0 && archive::looks_like_zip(as_span(ea.payload)) &&
          archive::looks_like_zip(as_span(eb.payload))) {
        return compare_nested(name, ea, eb, policy);
      }
      return {make_finding(name, PatternId::Unknown, {"entry"},
                           hex_excerpt(as_span(ea.payload), as_span(eb.payload)),
                           hex_excerpt(as_span(eb.payload), as_span(ea.payload)),
                           Resolution::None, "opaque payloads differ")};
    }
  }
  return {};
}

}  // namespace

DiffOutcome compare_packages(const PackageModel& a, const PackageModel& b,
                             const NormalizePolicy& policy) {
  DiffOutcome outcome;
  std::vector<Finding>& findings = outcome.findings;

  for (const std::string& dup : a.duplicate_names) {
    findings.push_back(make_finding(dup, PatternId::Unknown, {"archive"}, "", "",
                                    Resolution::None,
                                    "duplicate entry name in left package"));
  }
  for (const std::string& dup : b.duplicate_names) {
    findings.push_back(make_finding(dup, PatternId::Unknown, {"archive"}, "", "",
                                    Resolution::None,
                                    "duplicate entry name in right package"));
  }

  std::vector<const ArchiveEntry*> la = a.logical_entries();
  std::vector<const ArchiveEntry*> lb = b.logical_entries();
  std::map<std::string, const ArchiveEntry*> map_a, map_b;
  for (const ArchiveEntry* e : la) map_a[e->name] = e;
  for (const ArchiveEntry* e : lb) map_b[e->name] = e;

  std::vector<std::pair<const ArchiveEntry*, const ArchiveEntry*>> shared;
  for (const ArchiveEntry* e : la) {
    auto it = map_b.find(e->name);
    if (it == map_b.end()) {
      findings.push_back(make_finding(e->name, PatternId::Unknown, {"archive"},
                                      "present", "<absent>", Resolution::None,
                                      "entry present only in left package"));
    } else {
      shared.emplace_back(e, it->second);
    }
  }
  for (const ArchiveEntry* e : lb) {
    if (!map_a.count(e->name)) {
      findings.push_back(make_finding(e->name, PatternId::Unknown, {"archive"},
                                      "<absent>", "present", Resolution::None,
                                      "entry present only in right package"));
    }
  }

  // Entry order over the shared set.
  std::vector<std::string> order_a, order_b;
  for (const ArchiveEntry* e : la) {
    if (map_b.count(e->name)) order_a.push_back(e->name);
  }
  for (const ArchiveEntry* e : lb) {
    if (map_a.count(e->name)) order_b.push_back(e->name);
  }
  if (order_a != order_b) {
    std::string left, right;
    for (const std::string& s : order_a) left += s + "\n";
    for (const std::string& s : order_b) right += s + "\n";
    findings.push_back(make_finding("<archive>", PatternId::P11, {"entry-order"}, left,
                                    right,
                                    policy.is_enabled(PatternId::P11)
                                        ? Resolution::EntryReorder
                                        : Resolution::None));
  }

  // Per-entry comparison; the loop is data-parallel with a deterministic join.
  std::vector<std::vector<Finding>> per_entry(shared.size());
  parallel_for(shared.size(), policy.parallel, [&](size_t i) {
    per_entry[i] = compare_entry_pair(*shared[i].first, *shared[i].second, policy);
  });
  for (auto& v : per_entry) {
    findings.insert(findings.end(), std::make_move_iterator(v.begin()),
                    std::make_move_iterator(v.end()));
  }

  // Archive metadata: entry mtimes and extra fields.
  int mtime_diffs = 0;
  int extra_diffs = 0;
  std::string mtime_example_l, mtime_example_r;
  for (auto& [ea, eb] : shared) {
    if (ea->mtime != eb->mtime) {
      if (mtime_diffs == 0) {
        mtime_example_l = ea->name + " " + ea->mtime.iso();
        mtime_example_r = eb->name + " " + eb->mtime.iso();
      }
      ++mtime_diffs;
    }
    if (ea->extra_field != eb->extra_field) ++extra_diffs;
  }
  if (mtime_diffs > 0 || extra_diffs > 0) {
    std::string note = "entry metadata differs: " + std::to_string(mtime_diffs) +
                       " mtimes, " + std::to_string(extra_diffs) + " extra fields";
    findings.push_back(make_finding("<archive>", PatternId::P1, {"entry-metadata"},
                                    mtime_example_l, mtime_example_r,
                                    policy.is_enabled(PatternId::P1)
                                        ? Resolution::Canonicalization
                                        : Resolution::None,
                                    note));
  }
  bool attr_diffs = false;
  for (auto& [ea, eb] : shared) attr_diffs |= ea->external_attrs != eb->external_attrs;
  if (attr_diffs) {
    findings.push_back(make_finding("<archive>", PatternId::Unknown,
                                    {"entry-metadata", "external-attributes"}, "", "",
                                    Resolution::None,
                                    "external attributes differ; values recorded, no "
                                    "pattern covers permission changes"));
  }

  std::sort(findings.begin(), findings.end(), [](const Finding& x, const Finding& y) {
    auto key = [](const Finding& f) {
      std::string locus;
      for (const std::string& l : f.locus) locus += l + "/";
      return std::make_tuple(f.entry_name, int(f.pattern), locus, f.evidence_left);
    };
    return key(x) < key(y);
  });

  for (const Finding& f : findings) outcome.stats[f.pattern]++;
  outcome.equivalent = std::all_of(findings.begin(), findings.end(),
                                   [](const Finding& f) { return f.resolved(); });
  return outcome;
}

}  // namespace verijar::diffing
