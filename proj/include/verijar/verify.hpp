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
// Pipeline orchestration: compare, normalize, re-compare, verdict. Reports
// serialize deterministically so the reports themselves are reproducible.

#ifndef VERIJAR_VERIFY_HPP_
#define VERIJAR_VERIFY_HPP_

#include <optional>
#include <string>
#include <vector>

#include "verijar/diff.hpp"
#include "verijar/normalize.hpp"
#include "verijar/policy.hpp"

namespace verijar::verify {

enum class Verdict {
  VerifiedBitwise,
  VerifiedInterpreted,
  NotVerified,
};

const char* verdict_name(Verdict v);

// Weakest-verdict ordering: bitwise > interpreted > not verified.
Verdict weakest(Verdict a, Verdict b);

struct InputDigest {
  std::string sha1;
  std::string sha256;
  size_t size = 0;
};

struct BuildSpecDoc {
  std::vector<std::pair<std::string, std::string>> environment;  // probed + user
  std::vector<std::string> commands;
  std::vector<std::string> operations;  // applied mitigation summary

  std::string to_json() const;
  std::string to_text() const;
};

struct VerificationReport {
  Verdict verdict = Verdict::NotVerified;
  InputDigest left;
  InputDigest right;
  diffing::DiffOutcome pre;
  diffing::DiffOutcome post;
  normalize::NormalizeLog log_left;
  normalize::NormalizeLog log_right;
  bool outputs_byte_equal = false;
  std::string normalized_sha256_left;
  std::string normalized_sha256_right;
  std::string tool_version;
  std::string policy_snapshot;  // canonical textual form of the policy
  BuildSpecDoc build_spec;
  // Non-canonical metadata (paths); excluded from report reproducibility.
  std::string left_path;
  std::string right_path;

  std::string to_json(bool include_metadata = true) const;
  std::string to_text() const;
};

// Compares two in-memory deliverables end to end.
VerificationReport verify_pair_bytes(ByteSpan bytes_a, ByteSpan bytes_b,
                                     const NormalizePolicy& policy,
                                     const std::string& name_a = "left",
                                     const std::string& name_b = "right");

// File-path front end; single .class files are wrapped as one-entry packages.
VerificationReport verify_pair(const std::string& path_a, const std::string& path_b,
                               const NormalizePolicy& policy);

struct DoubleBuildJob {
  std::vector<std::string> command;  // byte-identical across the two runs
  std::string workdir;
  std::string output_glob;
  enum class Isolation { None, FreshTempDir } isolation = Isolation::None;
};

struct DoubleBuildReport {
  Verdict overall = Verdict::NotVerified;
  std::vector<std::pair<std::string, VerificationReport>> deliverables;
  BuildSpecDoc build_spec;

  std::string to_json() const;
  std::string to_text() const;
};

// Runs the command twice, pairs outputs by relative path, verifies each
// pair, and aggregates to the weakest verdict.
DoubleBuildReport run_double_build(const DoubleBuildJob& job, const NormalizePolicy& policy);

std::string policy_snapshot(const NormalizePolicy& policy);

}  // namespace verijar::verify

#endif  // VERIJAR_VERIFY_HPP_
