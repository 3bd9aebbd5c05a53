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

#include "verijar/normalize.hpp"

#include <algorithm>

#include "verijar/classcanon.hpp"
#include "verijar/manifest.hpp"
#include "verijar/sha.hpp"

namespace verijar {

using patterns::PatternId;

void NormalizePolicy::validate() const {
  for (PatternId id : enabled) {
    if (!patterns::interpretable_patterns().count(id)) {
      throw UsageError("pattern " + patterns::pattern_name(id) +
                       " is not interpretable and cannot be enabled for normalization");
    }
  }
  if (nested_depth < 0 || nested_depth > 4) {
    throw UsageError("nested archive depth must be between 0 and 4");
  }
}

classfile::ClassCanonPolicy NormalizePolicy::class_policy() const {
  classfile::ClassCanonPolicy p;
  p.dedup_pool = is_enabled(PatternId::P6);
  p.sort_methods = is_enabled(PatternId::P10);
  p.sort_inner_classes = is_enabled(PatternId::P9);
  p.relabel_slots = is_enabled(PatternId::P7);
  p.strip_line_numbers = strip_line_numbers;
  p.canon_lambdas = false;
  return p;
}

classfile::ClassCanonPolicy NormalizePolicy::rewrite_policy() const {
  classfile::ClassCanonPolicy p = class_policy();
  p.relabel_slots = false;  // slot renumbering stays compare-only
  return p;
}

NormalizePolicy parse_policy_file(std::string_view content) {
  NormalizePolicy policy;
  size_t pos = 0;
  size_t line_no = 0;
  std::string rule_lines;
  while (pos <= content.size()) {
    size_t eol = content.find('\n', pos);
    std::string line(content.substr(
        pos, eol == std::string_view::npos ? content.size() - pos : eol - pos));
    pos = eol == std::string_view::npos ? content.size() + 1 : eol + 1;
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    while (!line.empty() && line.front() == ' ') line.erase(line.begin());
    if (line.empty() || line[0] == '#') continue;
    auto fail = [&](const std::string& why) {
      throw UsageError("policy line " + std::to_string(line_no) + ": " + why);
    };
    size_t eq = line.find('=');
    if (eq == std::string::npos) fail("expected key = value");
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    while (!key.empty() && key.back() == ' ') key.pop_back();
    while (!value.empty() && value.front() == ' ') value.erase(value.begin());
    auto parse_bool = [&](const std::string& v) {
      if (v == "true" || v == "1" || v == "yes") return true;
      if (v == "false" || v == "0" || v == "no") return false;
      fail("expected a boolean, got '" + v + "'");
      return false;
    };
    if (key == "enable" || key == "disable") {
      size_t start = 0;
      while (start <= value.size()) {
        size_t comma = value.find(',', start);
        std::string token = value.substr(
            start, comma == std::string::npos ? value.size() - start : comma - start);
        start = comma == std::string::npos ? value.size() + 1 : comma + 1;
        while (!token.empty() && token.front() == ' ') token.erase(token.begin());
        while (!token.empty() && token.back() == ' ') token.pop_back();
        if (token.empty()) continue;
        auto id = patterns::parse_pattern(token);
        if (!id) fail("unknown pattern id '" + token + "'");
        if (key == "enable") {
          policy.enabled.insert(*id);
        } else {
          policy.enabled.erase(*id);
        }
      }
    } else if (key == "pinned-time") {
      bool numeric = !value.empty() &&
                     value.find_first_not_of("0123456789") == std::string::npos;
      if (numeric) {
        policy.archive.pinned_time = archive::DosTime::from_unix(std::stoll(value));
      } else {
        struct tm tm_buf = {};
        if (strptime(value.c_str(), "%Y-%m-%dT%H:%M:%S", &tm_buf) == nullptr) {
          fail("pinned-time must be epoch seconds or ISO-8601");
        }
        policy.archive.pinned_time = archive::DosTime::from_unix(timegm(&tm_buf));
      }
    } else if (key == "strip-line-numbers") {
      policy.strip_line_numbers = parse_bool(value);
    } else if (key == "parallel") {
      policy.parallel = parse_bool(value);
    } else if (key == "nested-depth") {
      policy.nested_depth = std::stoi(value);
    } else if (key == "deflate-level") {
      int level = std::stoi(value);
      if (level < 1 || level > 9) fail("deflate-level must be 1..9");
      policy.archive.deflate_level = level;
    } else if (key == "rule") {
      rule_lines += value;
      rule_lines += '\n';
    } else {
      fail("unknown policy key '" + key + "'");
    }
  }
  if (!rule_lines.empty()) {
    std::vector<text::TextRule> extra = text::parse_rules(rule_lines);
    for (text::TextRule& r : extra) policy.rules.push_back(std::move(r));
  }
  policy.validate();
  return policy;
}

}  // namespace verijar

namespace verijar::normalize {

using archive::ArchiveEntry;
using archive::EntryKind;
using archive::PackageModel;
using patterns::PatternId;

namespace {

struct EntryResult {
  Bytes payload;
  std::vector<NormalizeRecord> records;
};

void record(EntryResult& r, const std::string& entry, PatternId pass, std::string action,
            const Bytes& before, const Bytes& after) {
  r.records.push_back({entry, pass, std::move(action), sha256_hex(as_span(before)),
                       sha256_hex(as_span(after))});
}

EntryResult normalize_class(const std::string& name, const Bytes& payload,
                            const NormalizePolicy& policy) {
  EntryResult result;
  result.payload = payload;
  classfile::ClassModel model;
  try {
    model = classfile::parse_class(as_span(payload));
  } catch (const Error& e) {
    result.records.push_back({name, PatternId::Unknown,
                              std::string("class left unmodified (parse error: ") +
                                  e.what() + ")",
                              sha256_hex(as_span(payload)), sha256_hex(as_span(payload))});
    return result;
  }
  classfile::RewriteResult rw = classfile::rewrite_class(model, policy.rewrite_policy());
  if (rw.pool_aborted) {
    std::string why;
    for (const std::string& n : rw.notes) {
      if (n.find("pool rewrite aborted") != std::string::npos) why = n;
    }
    record(result, name, PatternId::P6, why, payload, rw.bytes);
  }
  if (rw.changed) {
    for (const std::string& n : rw.notes) {
      PatternId pass = PatternId::P6;
      if (n.find("methods") != std::string::npos) pass = PatternId::P10;
      if (n.find("InnerClasses") != std::string::npos) pass = PatternId::P9;
      if (n.find("LineNumberTable") != std::string::npos) pass = PatternId::P5;
      if (n.find("aborted") != std::string::npos) continue;  // logged above
      record(result, name, pass, n, result.payload, rw.bytes);
    }
    result.payload = rw.bytes;
  }
  return result;
}

EntryResult normalize_manifest(const std::string& name, const Bytes& payload,
                               const NormalizePolicy& policy) {
  EntryResult result;
  result.payload = payload;
  text::ManifestModel model;
  try {
    model = text::parse_manifest(as_span(payload));
  } catch (const MalformedManifest& e) {
    result.records.push_back({name, PatternId::Unknown,
                              std::string("manifest left unmodified (") + e.what() + ")",
                              sha256_hex(as_span(payload)), sha256_hex(as_span(payload))});
    return result;
  }

  std::vector<std::pair<PatternId, std::string>> actions;
  auto process_section = [&](text::ManifestSection& section) {
    // Drop and sort passes come from the rule set.
    std::vector<text::ManifestAttr> kept;
    for (text::ManifestAttr& attr : section.attrs) {
      const text::TextRule* dropper = nullptr;
      for (const text::TextRule& rule : policy.rules) {
        if (rule.action != text::RuleAction::DropAttribute) continue;
        if (!policy.is_enabled(rule.id)) continue;
        if (!text::glob_match(rule.file_glob, name)) continue;
        if (std::regex_search(attr.name, rule.regex)) {
          dropper = &rule;
          break;
        }
      }
      if (dropper) {
        actions.emplace_back(dropper->id,
                             "dropped attribute " + attr.name + " (was: " + attr.value + ")");
        continue;
      }
      for (const text::TextRule& rule : policy.rules) {
        if (rule.action != text::RuleAction::SortListValue) continue;
        if (!policy.is_enabled(rule.id)) continue;
        if (!text::glob_match(rule.file_glob, name)) continue;
        if (!std::regex_search(attr.name, rule.regex)) continue;
        std::vector<std::string> parts = text::split_list_value(attr.value);
        std::vector<std::string> sorted = parts;
        std::sort(sorted.begin(), sorted.end());
        if (sorted != parts) {
          std::string joined;
          for (size_t i = 0; i < sorted.size(); ++i) {
            if (i) joined += ",";
            joined += sorted[i];
          }
          attr.value = joined;
          actions.emplace_back(rule.id, "sorted list value of " + attr.name);
        }
      }
      if (policy.is_enabled(PatternId::P1)) {
        std::string lower_name = attr.name;
        std::transform(lower_name.begin(), lower_name.end(), lower_name.begin(),
                       [](unsigned char ch) { return char(std::tolower(ch)); });
        if (text::timestamp_attribute(lower_name) && attr.value != "<TIMESTAMP>") {
          actions.emplace_back(PatternId::P1, "replaced timestamp value of " + attr.name +
                                                  " (was: " + attr.value + ")");
          attr.value = "<TIMESTAMP>";
        } else if (!text::timestamp_attribute(lower_name)) {
          // Date-shaped spans inside other values also normalize.
          std::vector<text::TextRule> p1_rules;
          for (const text::TextRule& rule : policy.rules) {
            if (rule.id == PatternId::P1 &&
                rule.action == text::RuleAction::ReplaceWithPlaceholder) {
              p1_rules.push_back(rule);
            }
          }
          Bytes replaced = text::replace_all_rules(
              name, as_span(std::string_view(attr.value)), p1_rules, nullptr);
          std::string new_value = to_string(as_span(replaced));
          if (new_value != attr.value) {
            actions.emplace_back(PatternId::P1,
                                 "replaced timestamp span in " + attr.name);
            attr.value = std::move(new_value);
          }
        }
      }
      kept.push_back(attr);
    }
    section.attrs = std::move(kept);

    // Deterministic attribute order: Manifest-Version first, then the
    // section Name header, then byte order.
    if (policy.is_enabled(PatternId::P12)) {
      std::stable_sort(section.attrs.begin(), section.attrs.end(),
                       [](const text::ManifestAttr& x, const text::ManifestAttr& y) {
                         auto rank = [](const text::ManifestAttr& a) {
                           if (a.name == "Manifest-Version") return 0;
                           if (a.name == "Name") return 1;
                           return 2;
                         };
                         if (rank(x) != rank(y)) return rank(x) < rank(y);
                         return x.name < y.name;
                       });
    }
  };
  std::vector<std::string> order_before;
  for (const text::ManifestAttr& a : model.main.attrs) order_before.push_back(a.name);
  process_section(model.main);
  for (text::ManifestSection& s : model.named) process_section(s);
  std::vector<std::string> order_after;
  for (const text::ManifestAttr& a : model.main.attrs) order_after.push_back(a.name);

  Bytes out = text::emit_canonical(model);
  if (out != payload) {
    if (actions.empty() && order_before != order_after &&
        policy.is_enabled(PatternId::P12)) {
      actions.emplace_back(PatternId::P12, "sorted manifest attributes");
    }
    if (actions.empty()) {
      // Pure re-wrapping/terminator normalization.
      actions.emplace_back(PatternId::P1, "re-emitted manifest in canonical geometry");
    }
    for (auto& [pass, action] : actions) {
      record(result, name, pass, action, payload, out);
    }
    result.payload = out;
  }
  return result;
}

EntryResult normalize_text(const std::string& name, const Bytes& payload,
                           const NormalizePolicy& policy) {
  EntryResult result;
  text::ApplyResult applied =
      text::apply_text_rules(name, as_span(payload), policy.rules, policy.enabled);
  result.payload = applied.payload;
  if (result.payload != payload) {
    std::map<PatternId, int> counts;
    std::map<PatternId, std::string> first;
    for (const text::RuleHit& h : applied.hits) {
      if (!h.replaced) continue;
      counts[h.id]++;
      if (first[h.id].empty()) first[h.id] = h.excerpt;
    }
    for (auto& [id, n] : counts) {
      record(result, name, id,
             "replaced " + std::to_string(n) + " span(s), e.g. \"" + first[id] + "\"",
             payload, result.payload);
    }
  }
  return result;
}

EntryResult normalize_entry(const ArchiveEntry& entry, const NormalizePolicy& policy) {
  switch (entry.kind) {
    case EntryKind::ClassFile:
      return normalize_class(entry.name, entry.payload, policy);
    case EntryKind::Manifest:
      return normalize_manifest(entry.name, entry.payload, policy);
    case EntryKind::Properties:
    case EntryKind::Xml:
    case EntryKind::Json:
    case EntryKind::Text:
      return normalize_text(entry.name, entry.payload, policy);
    case EntryKind::Directory:
      return {entry.payload, {}};
    case EntryKind::Opaque: {
      if (policy.nested_depth > 0 && archive::looks_like_zip(as_span(entry.payload))) {
        try {
          archive::PackageModel inner = archive::read_package(as_span(entry.payload));
          auto [bytes, log] = normalize_package(inner, policy.nested());
          EntryResult result;
          result.payload = bytes;
          for (NormalizeRecord rec : log.records) {
            rec.entry_name = entry.name + "!/" + rec.entry_name;
            result.records.push_back(std::move(rec));
          }
          if (bytes != entry.payload && result.records.empty()) {
            EntryResult r2;
            r2.payload = bytes;
            record(r2, entry.name, PatternId::P11, "repacked nested archive canonically",
                   entry.payload, bytes);
            return r2;
          }
          return result;
        } catch (const Error&) {
          return {entry.payload, {}};
        }
      }
      return {entry.payload, {}};
    }
  }
  return {entry.payload, {}};
}

}  // namespace

std::pair<Bytes, NormalizeLog> normalize_package(const PackageModel& pkg,
                                                 const NormalizePolicy& policy) {
  policy.validate();
  std::vector<const ArchiveEntry*> entries = pkg.logical_entries();

  NormalizeLog log;
  for (const std::string& dup : pkg.duplicate_names) {
    log.records.push_back({dup, PatternId::Unknown,
                           "dropped duplicate entry (first occurrence kept)", "", ""});
  }

  std::vector<EntryResult> results(entries.size());
  parallel_for(entries.size(), policy.parallel, [&](size_t i) {
    results[i] = normalize_entry(*entries[i], policy);
  });

  archive::PackageModel out;
  bool pin_times = policy.is_enabled(PatternId::P1);
  bool sort_entries = policy.is_enabled(PatternId::P11);
  bool mtime_changed = false;
  bool order_changed = false;
  for (size_t i = 0; i < entries.size(); ++i) {
    ArchiveEntry e;
    e.name = entries[i]->name;
    e.payload = std::move(results[i].payload);
    e.kind = archive::classify_kind(e.name, as_span(e.payload));
    e.mtime = pin_times ? policy.archive.pinned_time : entries[i]->mtime;
    if (pin_times && entries[i]->mtime != policy.archive.pinned_time) mtime_changed = true;
    if (pin_times && !entries[i]->extra_field.empty()) mtime_changed = true;
    // Unix mode bits live in the high half; the repack always strips them.
    if (pin_times && (entries[i]->external_attrs & 0xffff0000u) != 0) mtime_changed = true;
    out.entries.push_back(std::move(e));
    for (NormalizeRecord& rec : results[i].records) log.records.push_back(std::move(rec));
  }
  if (sort_entries) {
    order_changed = !std::is_sorted(
        out.entries.begin(), out.entries.end(),
        [](const ArchiveEntry& x, const ArchiveEntry& y) { return x.name < y.name; });
    std::sort(out.entries.begin(), out.entries.end(),
              [](const ArchiveEntry& x, const ArchiveEntry& y) { return x.name < y.name; });
  }

  if (mtime_changed) {
    log.records.push_back({"<archive>", PatternId::P1,
                           "pinned entry mtimes to " + policy.archive.pinned_time.iso() +
                               "; stripped extra fields and external attributes",
                           "", ""});
  }
  if (order_changed) {
    log.records.push_back(
        {"<archive>", PatternId::P11, "reordered entries by name", "", ""});
  }

  Bytes bytes = archive::write_plain(out, policy.archive.deflate_level);

  std::stable_sort(log.records.begin(), log.records.end(),
                   [](const NormalizeRecord& x, const NormalizeRecord& y) {
                     return std::make_pair(x.entry_name, int(x.pass)) <
                            std::make_pair(y.entry_name, int(y.pass));
                   });
  return {std::move(bytes), std::move(log)};
}

}  // namespace verijar::normalize
