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

#include "verijar/fixtures.hpp"

#include "doctest.h"
#include "verijar/diff.hpp"

using namespace verijar;
using namespace verijar::fixtures;
using patterns::PatternId;

TEST_CASE("pairs are deterministic in the spec") {
  for (int p = 1; p <= 14; ++p) {
    FixtureSpec spec;
    spec.pattern = PatternId(p);
    spec.seed = 123;
    FixturePair first = generate_pair(spec);
    FixturePair second = generate_pair(spec);
    CAPTURE(p);
    CHECK(first.a == second.a);
    CHECK(first.b == second.b);
  }
}

TEST_CASE("pair members differ and parse") {
  for (int p = 1; p <= 14; ++p) {
    FixtureSpec spec;
    spec.pattern = PatternId(p);
    spec.seed = 5;
    FixturePair pair = generate_pair(spec);
    CAPTURE(p);
    CHECK(pair.a != pair.b);
    CHECK_NOTHROW(archive::read_package(as_span(pair.a)));
    CHECK_NOTHROW(archive::read_package(as_span(pair.b)));
  }
}

TEST_CASE("different seeds give different pairs") {
  FixtureSpec s1{PatternId::P6, 1, 12, 4, 6};
  FixtureSpec s2{PatternId::P6, 2, 12, 4, 6};
  CHECK(generate_pair(s1).a != generate_pair(s2).a);
}

TEST_CASE("purity: disabling the labeled axis leaves only that pattern unresolved") {
  // With every other normalization axis enabled and the labeled one disabled,
  // each pair's sole unresolved difference must be its own label.
  for (PatternId id : patterns::interpretable_patterns()) {
    FixtureSpec spec;
    spec.pattern = id;
    spec.seed = 9;
    FixturePair pair = generate_pair(spec);
    NormalizePolicy policy = NormalizePolicy::defaults();
    policy.enabled.erase(id);
    policy.strip_line_numbers = true;  // P5 axis on
    diffing::DiffOutcome outcome =
        diffing::compare_packages(archive::read_package(as_span(pair.a)),
                                  archive::read_package(as_span(pair.b)), policy);
    CAPTURE(int(id));
    CHECK(!outcome.equivalent);
    for (const diffing::Finding& f : outcome.findings) {
      if (!f.resolved()) CHECK(f.pattern == id);
    }
  }
}

TEST_CASE("unknown pattern has no generator") {
  FixtureSpec spec;
  spec.pattern = PatternId::Unknown;
  CHECK_THROWS_AS(generate_pair(spec), Error);
}

TEST_CASE("size hints shape the archive") {
  FixtureSpec small{PatternId::P11, 3, 12, 4, 5};
  FixtureSpec large{PatternId::P11, 3, 12, 4, 9};
  archive::PackageModel ps = archive::read_package(as_span(generate_pair(small).a));
  archive::PackageModel pl = archive::read_package(as_span(generate_pair(large).a));
  CHECK(pl.entries.size() > ps.entries.size());
}
