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

#include "doctest.h"
#include "verijar/diff.hpp"
#include "verijar/fixtures.hpp"
#include "verijar/sha.hpp"

using namespace verijar;
using namespace verijar::normalize;
using archive::PackageModel;
using archive::read_package;
using patterns::PatternId;

namespace {

fixtures::FixturePair pair_for(PatternId id, uint64_t seed) {
  fixtures::FixtureSpec spec;
  spec.pattern = id;
  spec.seed = seed;
  return fixtures::generate_pair(spec);
}

}  // namespace

TEST_CASE("interpretable fixture pairs converge to identical bytes") {
  NormalizePolicy policy = NormalizePolicy::defaults();
  for (PatternId id : {PatternId::P1, PatternId::P4, PatternId::P6, PatternId::P9,
                       PatternId::P10, PatternId::P11, PatternId::P12}) {
    for (uint64_t seed : {10ull, 20ull}) {
      CAPTURE(int(id));
      CAPTURE(seed);
      fixtures::FixturePair pair = pair_for(id, seed);
      auto [na, la] = normalize_package(read_package(as_span(pair.a)), policy);
      auto [nb, lb] = normalize_package(read_package(as_span(pair.b)), policy);
      CHECK(sha256_hex(as_span(na)) == sha256_hex(as_span(nb)));
    }
  }
}

TEST_CASE("P7 pairs converge in canonical form after normalization") {
  NormalizePolicy policy = NormalizePolicy::defaults();
  fixtures::FixturePair pair = pair_for(PatternId::P7, 21);
  auto [na, la] = normalize_package(read_package(as_span(pair.a)), policy);
  auto [nb, lb] = normalize_package(read_package(as_span(pair.b)), policy);
  // Slot ids still differ at the byte level (v1 keeps slot rewriting off),
  // but the canonical comparison resolves the residue.
  diffing::DiffOutcome post = diffing::compare_packages(
      read_package(as_span(na)), read_package(as_span(nb)), policy);
  CHECK(post.equivalent);
}

TEST_CASE("non-interpretable fixture pairs never converge silently") {
  NormalizePolicy policy = NormalizePolicy::defaults();
  for (PatternId id : {PatternId::P2, PatternId::P3, PatternId::P5, PatternId::P8,
                       PatternId::P13, PatternId::P14}) {
    CAPTURE(int(id));
    fixtures::FixturePair pair = pair_for(id, 30);
    auto [na, la] = normalize_package(read_package(as_span(pair.a)), policy);
    auto [nb, lb] = normalize_package(read_package(as_span(pair.b)), policy);
    CHECK(na != nb);
  }
}

TEST_CASE("normalization is idempotent") {
  NormalizePolicy policy = NormalizePolicy::defaults();
  for (int p = 1; p <= 14; ++p) {
    CAPTURE(p);
    fixtures::FixturePair pair = pair_for(PatternId(p), 40);
    auto [once, log1] = normalize_package(read_package(as_span(pair.a)), policy);
    auto [twice, log2] = normalize_package(read_package(as_span(once)), policy);
    CHECK(once == twice);
    CHECK(log2.empty());
  }
}

TEST_CASE("normalization log records every modification") {
  NormalizePolicy policy = NormalizePolicy::defaults();
  fixtures::FixturePair pair = pair_for(PatternId::P1, 50);
  auto [bytes, log] = normalize_package(read_package(as_span(pair.a)), policy);
  bool text_pass = false;
  bool archive_pass = false;
  for (const NormalizeRecord& r : log.records) {
    if (r.pass == PatternId::P1 && r.entry_name != "<archive>") text_pass = true;
    if (r.pass == PatternId::P1 && r.entry_name == "<archive>") archive_pass = true;
  }
  CHECK(text_pass);
  CHECK(archive_pass);
}

TEST_CASE("enabling a non-interpretable pattern is a load-time error") {
  NormalizePolicy policy = NormalizePolicy::defaults();
  policy.enabled.insert(PatternId::P2);
  fixtures::FixturePair pair = pair_for(PatternId::P1, 60);
  CHECK_THROWS_AS(normalize_package(read_package(as_span(pair.a)), policy), UsageError);
}

TEST_CASE("normalization never changes canonical content") {
  NormalizePolicy policy = NormalizePolicy::defaults();
  for (PatternId id : {PatternId::P6, PatternId::P10, PatternId::P9}) {
    fixtures::FixturePair pair = pair_for(id, 70);
    PackageModel before = read_package(as_span(pair.a));
    auto [bytes, log] = normalize_package(before, policy);
    PackageModel after = read_package(as_span(bytes));
    diffing::DiffOutcome outcome = diffing::compare_packages(before, after, policy);
    CAPTURE(int(id));
    CHECK(outcome.equivalent);
  }
}

TEST_CASE("serial and parallel normalization agree") {
  NormalizePolicy serial = NormalizePolicy::defaults();
  serial.parallel = false;
  NormalizePolicy parallel = NormalizePolicy::defaults();
  parallel.parallel = true;
  for (int p : {1, 6, 11}) {
    fixtures::FixturePair pair = pair_for(PatternId(p), 80);
    auto [s_bytes, s_log] = normalize_package(read_package(as_span(pair.a)), serial);
    auto [p_bytes, p_log] = normalize_package(read_package(as_span(pair.a)), parallel);
    CHECK(s_bytes == p_bytes);
    CHECK(s_log.records.size() == p_log.records.size());
  }
}

TEST_CASE("policy file parsing") {
  NormalizePolicy policy = parse_policy_file(
      "# test policy\n"
      "disable = P12, P9\n"
      "pinned-time = 2005-06-01T00:00:00\n"
      "strip-line-numbers = true\n"
      "deflate-level = 9\n"
      "rule = P1 | **/*.log | replace <T> | [0-9]+\n");
  CHECK(!policy.is_enabled(PatternId::P12));
  CHECK(!policy.is_enabled(PatternId::P9));
  CHECK(policy.is_enabled(PatternId::P1));
  CHECK(policy.strip_line_numbers);
  CHECK(policy.archive.deflate_level == 9);
  CHECK(policy.archive.pinned_time.iso() == "2005-06-01T00:00:00");
  CHECK(policy.rules.size() == text::builtin_rules().size() + 1);

  CHECK_THROWS_AS(parse_policy_file("enable = P2\n"), UsageError);
  CHECK_THROWS_AS(parse_policy_file("bogus-key = 1\n"), UsageError);
  CHECK_THROWS_AS(parse_policy_file("pinned-time = yesterday\n"), UsageError);
}
