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

#include "verijar/diff.hpp"

#include <set>

#include "doctest.h"
#include "verijar/fixtures.hpp"
#include "verijar/normalize.hpp"

using namespace verijar;
using namespace verijar::diffing;
using archive::PackageModel;
using archive::read_package;
using patterns::PatternId;

namespace {

DiffOutcome compare_fixture(PatternId pattern, uint64_t seed,
                            const NormalizePolicy& policy) {
  fixtures::FixtureSpec spec;
  spec.pattern = pattern;
  spec.seed = seed;
  fixtures::FixturePair pair = fixtures::generate_pair(spec);
  PackageModel a = read_package(as_span(pair.a));
  PackageModel b = read_package(as_span(pair.b));
  return compare_packages(a, b, policy);
}

std::set<PatternId> labels_of(const DiffOutcome& outcome) {
  std::set<PatternId> labels;
  for (const Finding& f : outcome.findings) labels.insert(f.pattern);
  return labels;
}

}  // namespace

TEST_CASE("identical packages compare equivalent with zero findings") {
  fixtures::FixtureSpec spec;
  spec.pattern = PatternId::P1;
  spec.seed = 9;
  fixtures::FixturePair pair = fixtures::generate_pair(spec);
  PackageModel a = read_package(as_span(pair.a));
  DiffOutcome outcome = compare_packages(a, a, NormalizePolicy::defaults());
  CHECK(outcome.equivalent);
  CHECK(outcome.findings.empty());
}

TEST_CASE("each pattern fixture classifies exactly to its generator label") {
  NormalizePolicy policy = NormalizePolicy::defaults();
  for (int p = 1; p <= 14; ++p) {
    PatternId id = PatternId(p);
    for (uint64_t seed : {1ull, 2ull, 3ull}) {
      CAPTURE(p);
      CAPTURE(seed);
      DiffOutcome outcome = compare_fixture(id, seed, policy);
      std::set<PatternId> labels = labels_of(outcome);
      REQUIRE(!labels.empty());
      CHECK(labels == std::set<PatternId>{id});
    }
  }
}

TEST_CASE("interpretable fixtures resolve, others stay unresolved") {
  NormalizePolicy policy = NormalizePolicy::defaults();
  for (int p = 1; p <= 14; ++p) {
    PatternId id = PatternId(p);
    CAPTURE(p);
    DiffOutcome outcome = compare_fixture(id, 7, policy);
    bool interpretable = patterns::interpretable_patterns().count(id) > 0;
    if (id == PatternId::P7) {
      // Resolved through canonical comparison.
      CHECK(outcome.equivalent);
    } else {
      CHECK(outcome.equivalent == interpretable);
    }
  }
}

TEST_CASE("comparison is symmetric") {
  NormalizePolicy policy = NormalizePolicy::defaults();
  for (int p : {1, 5, 6, 8, 10, 11, 13}) {
    fixtures::FixtureSpec spec;
    spec.pattern = PatternId(p);
    spec.seed = 31;
    fixtures::FixturePair pair = fixtures::generate_pair(spec);
    PackageModel a = read_package(as_span(pair.a));
    PackageModel b = read_package(as_span(pair.b));
    DiffOutcome ab = compare_packages(a, b, policy);
    DiffOutcome ba = compare_packages(b, a, policy);
    CAPTURE(p);
    CHECK(ab.equivalent == ba.equivalent);
    CHECK(ab.stats == ba.stats);
    REQUIRE(ab.findings.size() == ba.findings.size());
  }
}

TEST_CASE("entry-set differences are unknown findings") {
  PackageModel a = archive::make_package({{"a.txt", to_bytes("x")}});
  PackageModel b = archive::make_package({{"a.txt", to_bytes("x")},
                                          {"b.txt", to_bytes("y")}});
  DiffOutcome outcome = compare_packages(a, b, NormalizePolicy::defaults());
  CHECK(!outcome.equivalent);
  REQUIRE(outcome.findings.size() == 1);
  CHECK(outcome.findings[0].pattern == PatternId::Unknown);
  CHECK(outcome.findings[0].entry_name == "b.txt");
}

TEST_CASE("P5 resolves only when line-number stripping is enabled") {
  NormalizePolicy strict = NormalizePolicy::defaults();
  DiffOutcome outcome = compare_fixture(PatternId::P5, 5, strict);
  CHECK(!outcome.equivalent);
  CHECK(labels_of(outcome) == std::set<PatternId>{PatternId::P5});

  NormalizePolicy lenient = NormalizePolicy::defaults();
  lenient.strip_line_numbers = true;
  DiffOutcome resolved = compare_fixture(PatternId::P5, 5, lenient);
  CHECK(resolved.equivalent);
  CHECK(labels_of(resolved) == std::set<PatternId>{PatternId::P5});
}

TEST_CASE("disabling a pattern leaves its finding unresolved") {
  NormalizePolicy policy = NormalizePolicy::defaults();
  policy.enabled.erase(PatternId::P11);
  DiffOutcome outcome = compare_fixture(PatternId::P11, 13, policy);
  CHECK(!outcome.equivalent);
  REQUIRE(outcome.findings.size() == 1);
  CHECK(outcome.findings[0].pattern == PatternId::P11);
  CHECK(outcome.findings[0].resolved_by == Resolution::None);
}

TEST_CASE("one-line content change with no rule hit is unknown") {
  PackageModel a = archive::make_package({{"notes.txt", to_bytes("alpha\nbeta\n")}});
  PackageModel b = archive::make_package({{"notes.txt", to_bytes("alpha\ngamma\n")}});
  DiffOutcome outcome = compare_packages(a, b, NormalizePolicy::defaults());
  CHECK(!outcome.equivalent);
  REQUIRE(!outcome.findings.empty());
  CHECK(outcome.findings[0].pattern == PatternId::Unknown);
}

TEST_CASE("doc-like permutation classifies P8, non-doc stays unknown") {
  Bytes lines_a = to_bytes("one\ntwo\nthree\n");
  Bytes lines_b = to_bytes("three\none\ntwo\n");
  PackageModel a = archive::make_package({{"apidocs/index.html", lines_a}});
  PackageModel b = archive::make_package({{"apidocs/index.html", lines_b}});
  DiffOutcome doc = compare_packages(a, b, NormalizePolicy::defaults());
  CHECK(labels_of(doc) == std::set<PatternId>{PatternId::P8});

  PackageModel c = archive::make_package({{"data/list.txt", lines_a}});
  PackageModel d = archive::make_package({{"data/list.txt", lines_b}});
  DiffOutcome plain = compare_packages(c, d, NormalizePolicy::defaults());
  CHECK(labels_of(plain) == std::set<PatternId>{PatternId::Unknown});
}

TEST_CASE("timestamp-valued manifest attributes classify as P1 and normalize away") {
  auto jar_with_manifest = [](const std::string& stamp) {
    Bytes mf = to_bytes("Manifest-Version: 1.0\r\nBnd-LastModified: " + stamp + "\r\n\r\n");
    return archive::write_plain(archive::make_package({{"META-INF/MANIFEST.MF", mf}}));
  };
  Bytes a = jar_with_manifest("1631998003000");
  Bytes b = jar_with_manifest("1631998135000");
  DiffOutcome outcome = compare_packages(read_package(as_span(a)), read_package(as_span(b)),
                                         NormalizePolicy::defaults());
  CHECK(labels_of(outcome) == std::set<PatternId>{PatternId::P1});
  CHECK(outcome.equivalent);
  // The resolution claim is backed by actual convergence.
  auto [na, la] = verijar::normalize::normalize_package(read_package(as_span(a)),
                                                        NormalizePolicy::defaults());
  auto [nb, lb] = verijar::normalize::normalize_package(read_package(as_span(b)),
                                                        NormalizePolicy::defaults());
  CHECK(na == nb);
}

TEST_CASE("nested archives compare one level deep") {
  fixtures::FixtureSpec spec;
  spec.pattern = PatternId::P1;
  spec.seed = 77;
  fixtures::FixturePair pair = fixtures::generate_pair(spec);
  PackageModel outer_a = archive::make_package({{"lib/inner.jar", pair.a}});
  PackageModel outer_b = archive::make_package({{"lib/inner.jar", pair.b}});
  DiffOutcome outcome = compare_packages(outer_a, outer_b, NormalizePolicy::defaults());
  CHECK(labels_of(outcome) == std::set<PatternId>{PatternId::P1});
  bool nested_name = false;
  for (const Finding& f : outcome.findings) {
    nested_name |= f.entry_name.find("lib/inner.jar!/") == 0;
  }
  CHECK(nested_name);
}

TEST_CASE("no silent drops: every differing parseable pair yields findings") {
  // Random payload mutations across a fixture jar either break parsing or
  // surface as at least one finding; differences are never absorbed.
  fixtures::FixtureSpec spec;
  spec.pattern = PatternId::P11;
  spec.seed = 5;
  fixtures::FixturePair pair = fixtures::generate_pair(spec);
  fixtures::Rng rng(777);
  NormalizePolicy policy = NormalizePolicy::defaults();
  int compared = 0;
  for (int trial = 0; trial < 60; ++trial) {
    Bytes mutated = pair.a;
    size_t pos = rng.below(mutated.size());
    uint8_t flip = uint8_t(1 + rng.below(255));
    mutated[pos] ^= flip;
    try {
      PackageModel a = read_package(as_span(pair.a));
      PackageModel b = read_package(as_span(mutated));
      DiffOutcome outcome = compare_packages(a, b, policy);
      // Parsed payloads may still be identical if the flip hit compressed
      // padding or metadata; in that case nothing to assert.
      bool any_payload_diff = false;
      auto la = a.logical_entries();
      auto lb = b.logical_entries();
      if (la.size() != lb.size()) {
        any_payload_diff = true;
      } else {
        for (size_t i = 0; i < la.size(); ++i) {
          any_payload_diff |= la[i]->name != lb[i]->name;
          any_payload_diff |= la[i]->payload != lb[i]->payload;
          any_payload_diff |= la[i]->mtime != lb[i]->mtime;
        }
      }
      if (any_payload_diff) {
        CAPTURE(trial);
        CHECK(!outcome.findings.empty());
        ++compared;
      }
    } catch (const Error&) {
      // Mutation broke the container or a payload; rejection is a valid
      // outcome for corrupted input.
    }
  }
  CHECK(compared > 0);
}

TEST_CASE("mixed P6 and P10 differences are both attributed") {
  // Build a class, then apply method reordering on one side and a pool
  // permutation on top.
  fixtures::Rng rng(99);
  classfile::ClassModel base = fixtures::random_class(rng, "com/example/Mix", 4, 6);
  classfile::ClassModel variant = base;
  std::swap(variant.methods[1], variant.methods[2]);
  std::vector<uint16_t> order;
  for (uint16_t i = 1; i < variant.pool.size(); ++i) {
    if (!variant.pool[i].phantom) order.push_back(i);
  }
  rng.shuffle(order);
  classfile::PoolPermuteResult permuted = classfile::permute_pool(variant, order);
  REQUIRE(permuted.ok);
  Bytes bytes_a = classfile::serialize_class(base);
  Bytes bytes_b = classfile::serialize_class(permuted.model);
  if (bytes_a == bytes_b) return;  // permutation happened to be identity

  PackageModel a = archive::make_package({{"Mix.class", bytes_a}});
  PackageModel b = archive::make_package({{"Mix.class", bytes_b}});
  DiffOutcome outcome = compare_packages(a, b, NormalizePolicy::defaults());
  std::set<PatternId> labels = labels_of(outcome);
  CHECK(labels.count(PatternId::P10));
  CHECK(labels.count(PatternId::P6));
  CHECK(outcome.equivalent);
}
