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
// The interpretation engine: applies the enabled normalization passes to a
// package and repacks it deterministically, logging every modification.

#ifndef VERIJAR_NORMALIZE_HPP_
#define VERIJAR_NORMALIZE_HPP_

#include <string>
#include <vector>

#include "verijar/archive.hpp"
#include "verijar/policy.hpp"

namespace verijar::normalize {

struct NormalizeRecord {
  std::string entry_name;
  patterns::PatternId pass = patterns::PatternId::Unknown;
  std::string action;
  std::string before_digest;  // sha256 of the payload before the pass
  std::string after_digest;
};

struct NormalizeLog {
  std::vector<NormalizeRecord> records;
  bool empty() const { return records.empty(); }
};

// Applies per-entry passes (class rewrite, manifest canonicalization, text
// rules, nested repack) and then the canonical archive repack. The log holds
// one record per modification, in deterministic entry order.
std::pair<Bytes, NormalizeLog> normalize_package(const archive::PackageModel& pkg,
                                                 const NormalizePolicy& policy);

}  // namespace verijar::normalize

#endif  // VERIJAR_NORMALIZE_HPP_
