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

#ifndef VERIJAR_SHA_HPP_
#define VERIJAR_SHA_HPP_

#include <string>

#include "verijar/common.hpp"

namespace verijar {

std::string sha1_hex(ByteSpan data);
std::string sha256_hex(ByteSpan data);

inline std::string sha1_hex(const Bytes& b) { return sha1_hex(as_span(b)); }
inline std::string sha256_hex(const Bytes& b) { return sha256_hex(as_span(b)); }
inline std::string sha256_hex(std::string_view s) { return sha256_hex(as_span(s)); }

}  // namespace verijar

#endif  // VERIJAR_SHA_HPP_
