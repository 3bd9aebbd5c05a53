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

#include "verijar/manifest.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace verijar::text {

namespace {

struct PhysicalLine {
  size_t start;
  size_t content;  // content length, terminator excluded
  size_t total;    // content + terminator
};

// Splits on CRLF, LF, or CR; the spans partition the input.
std::vector<PhysicalLine> split_lines(ByteSpan bytes) {
  std::vector<PhysicalLine> out;
  size_t i = 0;
  while (i < bytes.size()) {
    size_t start = i;
    while (i < bytes.size() && bytes[i] != '\r' && bytes[i] != '\n') ++i;
    size_t content = i - start;
    if (i < bytes.size()) {
      if (bytes[i] == '\r' && i + 1 < bytes.size() && bytes[i + 1] == '\n') {
        i += 2;
      } else {
        i += 1;
      }
    }
    out.push_back({start, content, i - start});
  }
  return out;
}

bool valid_name_char(uint8_t c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
         c == '-' || c == '_';
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return char(std::tolower(c)); });
  return out;
}

}  // namespace

ManifestModel parse_manifest(ByteSpan bytes) {
  std::vector<ManifestSection> sections;
  ManifestSection current;
  bool in_blank = false;
  bool any_content = false;

  auto close_section = [&]() {
    sections.push_back(std::move(current));
    current = ManifestSection{};
  };

  for (const PhysicalLine& pl : split_lines(bytes)) {
    ByteSpan raw = bytes.subspan(pl.start, pl.total);
    ByteSpan content = bytes.subspan(pl.start, pl.content);
    if (content.empty()) {
      in_blank = true;
      current.trailing_blank.insert(current.trailing_blank.end(), raw.begin(), raw.end());
      continue;
    }
    any_content = true;
    if (in_blank) {
      in_blank = false;
      close_section();
    }
    if (content[0] == ' ') {
      if (current.attrs.empty()) {
        throw MalformedManifest("continuation line without a preceding attribute");
      }
      ManifestAttr& a = current.attrs.back();
      a.value.append(content.begin() + 1, content.end());
      a.raw.insert(a.raw.end(), raw.begin(), raw.end());
      continue;
    }
    size_t colon = 0;
    while (colon < content.size() && content[colon] != ':') ++colon;
    if (colon == content.size() || colon == 0) {
      throw MalformedManifest("attribute line without a name-value separator");
    }
    if (colon > 70) throw MalformedManifest("attribute name longer than 70 bytes");
    for (size_t i = 0; i < colon; ++i) {
      if (!valid_name_char(content[i])) {
        throw MalformedManifest("invalid character in attribute name");
      }
    }
    ManifestAttr a;
    a.name.assign(content.begin(), content.begin() + colon);
    size_t value_start = colon + 1;
    if (value_start < content.size() && content[value_start] == ' ') ++value_start;
    a.value.assign(content.begin() + value_start, content.end());
    a.raw.assign(raw.begin(), raw.end());
    current.attrs.push_back(std::move(a));
  }
  close_section();
  if (!any_content) throw MalformedManifest("manifest contains no attributes");

  ManifestModel m;
  m.main = std::move(sections.front());
  for (size_t i = 1; i < sections.size(); ++i) {
    // A trailing blank run parses as an empty section; it belongs to the
    // previous section's raw bytes.
    if (sections[i].attrs.empty()) {
      ManifestSection& prev = m.named.empty() ? m.main : m.named.back();
      prev.trailing_blank.insert(prev.trailing_blank.end(),
                                 sections[i].trailing_blank.begin(),
                                 sections[i].trailing_blank.end());
      continue;
    }
    m.named.push_back(std::move(sections[i]));
  }

  auto check_unique = [](const ManifestSection& s) {
    std::set<std::string> seen;
    for (const ManifestAttr& a : s.attrs) {
      if (!seen.insert(lower(a.name)).second) {
        throw MalformedManifest("duplicate attribute in section: " + a.name);
      }
    }
  };
  check_unique(m.main);
  for (ManifestSection& s : m.named) {
    check_unique(s);
    if (lower(s.attrs.front().name) == "name") s.name = s.attrs.front().value;
  }
  return m;
}

Bytes emit_preserving(const ManifestModel& m) {
  ByteWriter w;
  w.raw(m.leading);
  auto emit_section = [&](const ManifestSection& s) {
    for (const ManifestAttr& a : s.attrs) w.raw(a.raw);
    w.raw(s.trailing_blank);
  };
  emit_section(m.main);
  for (const ManifestSection& s : m.named) emit_section(s);
  w.raw(m.trailing);
  return w.take();
}

namespace {

// 72-byte physical lines (terminator excluded), single-space continuations.
void emit_wrapped(ByteWriter& w, const std::string& name, const std::string& value) {
  std::string logical = name + ": " + value;
  size_t pos = 0;
  bool first = true;
  while (first || pos < logical.size()) {
    size_t budget = first ? 72 : 71;
    size_t n = std::min(budget, logical.size() - pos);
    if (!first) w.text(" ");
    w.text(std::string_view(logical).substr(pos, n));
    w.text("\r\n");
    pos += n;
    first = false;
  }
}

}  // namespace

Bytes emit_canonical(const ManifestModel& m) {
  ByteWriter w;
  auto emit_section = [&](const ManifestSection& s) {
    for (const ManifestAttr& a : s.attrs) emit_wrapped(w, a.name, a.value);
    w.text("\r\n");
  };
  emit_section(m.main);
  for (const ManifestSection& s : m.named) emit_section(s);
  return w.take();
}

std::vector<std::string> split_list_value(const std::string& value) {
  std::vector<std::string> out;
  std::string current;
  bool in_quote = false;
  for (char c : value) {
    if (c == '"') in_quote = !in_quote;
    if (c == ',' && !in_quote) {
      out.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  out.push_back(std::move(current));
  return out;
}

}  // namespace verijar::text
