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

#ifndef VERIJAR_TESTS_TEST_UTIL_HPP_
#define VERIJAR_TESTS_TEST_UTIL_HPP_

#include <fstream>
#include <string>

#include "verijar/common.hpp"

namespace testutil {

#ifndef VERIJAR_TEST_DATA_DIR
#define VERIJAR_TEST_DATA_DIR "tests/data"
#endif

inline std::string data_path(const std::string& name) {
  return std::string(VERIJAR_TEST_DATA_DIR) + "/" + name;
}

inline verijar::Bytes read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw verijar::InputUnreadable("cannot open " + path);
  return verijar::Bytes(std::istreambuf_iterator<char>(in), {});
}

inline void write_file(const std::string& path, verijar::ByteSpan data) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(data.data()), std::streamsize(data.size()));
  if (!out) throw verijar::Error("cannot write " + path);
}

}  // namespace testutil

#endif  // VERIJAR_TESTS_TEST_UTIL_HPP_
