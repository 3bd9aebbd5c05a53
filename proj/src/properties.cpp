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

#include "verijar/properties.hpp"

namespace verijar::text {

namespace {

struct Line {
  size_t start, content, total;
};

std::vector<Line> split_lines(ByteSpan bytes) {
  std::vector<Line> out;
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

bool is_ws(uint8_t c) { return c == ' ' || c == '\t' || c == '\f'; }

size_t first_non_ws(ByteSpan s) {
  size_t i = 0;
  while (i < s.size() && is_ws(s[i])) ++i;
  return i;
}

// A logical line continues when it ends with an odd number of backslashes.
bool continues(ByteSpan content) {
  size_t n = 0;
  size_t i = content.size();
  while (i > 0 && content[i - 1] == '\\') {
    ++n;
    --i;
  }
  return n % 2 == 1;
}

// Decodes \t \n \r \f \\ \uXXXX; an unknown escape yields the raw character.
std::string unescape(std::string_view s) {
  std::string out;
  for (size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (c != '\\') {
      out.push_back(c);
      continue;
    }
    if (++i >= s.size()) break;
    char e = s[i];
    switch (e) {
      case 't': out.push_back('\t'); break;
      case 'n': out.push_back('\n'); break;
      case 'r': out.push_back('\r'); break;
      case 'f': out.push_back('\f'); break;
      case 'u': {
        unsigned v = 0;
        bool ok = i + 4 < s.size();
        for (int k = 1; k <= 4 && ok; ++k) {
          char h = s[i + k];
          v <<= 4;
          if (h >= '0' && h <= '9') v |= unsigned(h - '0');
          else if (h >= 'a' && h <= 'f') v |= unsigned(h - 'a' + 10);
          else if (h >= 'A' && h <= 'F') v |= unsigned(h - 'A' + 10);
          else ok = false;
        }
        if (!ok) {
          out.push_back('u');
          break;
        }
        if (v < 0x80) {
          out.push_back(char(v));
        } else if (v < 0x800) {
          out.push_back(char(0xc0 | (v >> 6)));
          out.push_back(char(0x80 | (v & 0x3f)));
        } else {
          out.push_back(char(0xe0 | (v >> 12)));
          out.push_back(char(0x80 | ((v >> 6) & 0x3f)));
          out.push_back(char(0x80 | (v & 0x3f)));
        }
        i += 4;
        break;
      }
      default:
        out.push_back(e);
    }
  }
  return out;
}

void parse_pair(std::string_view logical, std::string& key, std::string& value) {
  size_t i = 0;
  while (i < logical.size() && is_ws(uint8_t(logical[i]))) ++i;
  size_t key_start = i;
  bool escaped = false;
  size_t sep = logical.size();
  for (; i < logical.size(); ++i) {
    char c = logical[i];
    if (escaped) {
      escaped = false;
      continue;
    }
    if (c == '\\') {
      escaped = true;
      continue;
    }
    if (c == '=' || c == ':' || is_ws(uint8_t(c))) {
      sep = i;
      break;
    }
  }
  key = unescape(logical.substr(key_start, sep - key_start));
  size_t v = sep;
  while (v < logical.size() && is_ws(uint8_t(logical[v]))) ++v;
  if (v < logical.size() && (logical[v] == '=' || logical[v] == ':')) {
    ++v;
    while (v < logical.size() && is_ws(uint8_t(logical[v]))) ++v;
  }
  value = unescape(logical.substr(v));
}

}  // namespace

PropertiesModel parse_properties(ByteSpan bytes) {
  PropertiesModel m;
  std::vector<Line> lines = split_lines(bytes);
  size_t li = 0;
  while (li < lines.size()) {
    const Line& l = lines[li];
    ByteSpan raw = bytes.subspan(l.start, l.total);
    ByteSpan content = bytes.subspan(l.start, l.content);
    size_t nw = first_non_ws(content);
    PropRecord rec;
    if (nw == content.size()) {
      rec.kind = PropRecord::Kind::Blank;
      rec.raw.assign(raw.begin(), raw.end());
      ++li;
    } else if (content[nw] == '#' || content[nw] == '!') {
      rec.kind = PropRecord::Kind::Comment;
      rec.raw.assign(raw.begin(), raw.end());
      ++li;
    } else {
      rec.kind = PropRecord::Kind::Pair;
      std::string logical(content.begin(), content.end());
      rec.raw.assign(raw.begin(), raw.end());
      ++li;
      while (continues(as_span(std::string_view(logical))) && li < lines.size()) {
        logical.pop_back();  // the continuation backslash
        const Line& next = lines[li];
        ByteSpan nraw = bytes.subspan(next.start, next.total);
        ByteSpan ncontent = bytes.subspan(next.start, next.content);
        size_t skip = first_non_ws(ncontent);
        logical.append(ncontent.begin() + skip, ncontent.end());
        rec.raw.insert(rec.raw.end(), nraw.begin(), nraw.end());
        ++li;
      }
      parse_pair(logical, rec.key, rec.value);
    }
    m.records.push_back(std::move(rec));
  }
  return m;
}

Bytes emit_preserving(const PropertiesModel& m) {
  ByteWriter w;
  for (const PropRecord& r : m.records) w.raw(r.raw);
  return w.take();
}

}  // namespace verijar::text
