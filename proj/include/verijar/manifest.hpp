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
// JAR manifest parsing with byte-exact re-emission: every attribute records
// the raw bytes of its physical lines (wrapping geometry included), and the
// records partition the input.

#ifndef VERIJAR_MANIFEST_HPP_
#define VERIJAR_MANIFEST_HPP_

#include <string>
#include <vector>

#include "verijar/common.hpp"

namespace verijar::text {

struct ManifestAttr {
  std::string name;
  std::string value;  // continuation lines joined
  Bytes raw;          // the attribute's physical lines, terminators included
};

struct ManifestSection {
  std::string name;  // value of the leading "Name" attribute; "" for main
  std::vector<ManifestAttr> attrs;
  Bytes trailing_blank;  // the blank-line run that closes this section
};

struct ManifestModel {
  ManifestSection main;
  std::vector<ManifestSection> named;
  Bytes leading;   // bytes before the first attribute (rare, e.g. a BOM)
  Bytes trailing;  // bytes after the last section separator
};

// Parses manifest bytes. Throws MalformedManifest on a continuation line
// without a preceding attribute, an attribute name longer than 70 bytes, an
// invalid name character, or a duplicate name within a section
// (case-insensitive).
ManifestModel parse_manifest(ByteSpan bytes);

// Concatenates the recorded raw spans; byte-identical to the parsed input.
Bytes emit_preserving(const ManifestModel& m);

// Standard geometry: 72-byte lines, CRLF, single blank line after each
// section. Attribute values are emitted from the parsed (joined) form.
Bytes emit_canonical(const ManifestModel& m);

// Splits a list-valued attribute on top-level commas (commas inside quoted
// directive values do not split).
std::vector<std::string> split_list_value(const std::string& value);

}  // namespace verijar::text

#endif  // VERIJAR_MANIFEST_HPP_
