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
// java-properties files parsed into a record list that round-trips
// byte-exactly. The logical key/value view decodes the standard escapes;
// the raw spans keep the original escaping.

#ifndef VERIJAR_PROPERTIES_HPP_
#define VERIJAR_PROPERTIES_HPP_

#include <string>
#include <vector>

#include "verijar/common.hpp"

namespace verijar::text {

struct PropRecord {
  enum class Kind { Comment, Blank, Pair };
  Kind kind = Kind::Blank;
  Bytes raw;          // physical lines of this record, terminators included
  std::string key;    // Pair only, unescaped
  std::string value;  // Pair only, unescaped
};

struct PropertiesModel {
  std::vector<PropRecord> records;
};

PropertiesModel parse_properties(ByteSpan bytes);

// Concatenation of record raws; byte-identical to the parsed input.
Bytes emit_preserving(const PropertiesModel& m);

}  // namespace verijar::text

#endif  // VERIJAR_PROPERTIES_HPP_
