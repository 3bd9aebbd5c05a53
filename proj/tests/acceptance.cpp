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
// End-to-end acceptance suite. Each criterion prints one PASS/FAIL line;
// the process exits nonzero if any criterion fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "test_util.hpp"
#include "verijar/classcanon.hpp"
#include "verijar/diff.hpp"
#include "verijar/fixtures.hpp"
#include "verijar/normalize.hpp"
#include "verijar/sha.hpp"
#include "verijar/verify.hpp"

using namespace verijar;
using Clock = std::chrono::steady_clock;
using patterns::PatternId;

namespace {

int g_failures = 0;

void report(const std::string& name, bool pass, const std::string& detail = "") {
  std::printf("[%s] %s%s%s\n", pass ? "PASS" : "FAIL", name.c_str(),
              detail.empty() ? "" : ": ", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

void run(const std::string& name, const std::function<std::string()>& body) {
  try {
    std::string detail = body();
    report(name, detail.empty(), detail);
  } catch (const std::exception& e) {
    report(name, false, std::string("exception: ") + e.what());
  }
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

constexpr int kSeedsPerPattern = 25;

struct Corpus {
  // pattern -> list of pairs
  std::map<PatternId, std::vector<fixtures::FixturePair>> pairs;
};

Corpus build_corpus() {
  Corpus corpus;
  for (int p = 1; p <= 14; ++p) {
    PatternId id = PatternId(p);
    for (int seed = 1; seed <= kSeedsPerPattern; ++seed) {
      fixtures::FixtureSpec spec;
      spec.pattern = id;
      spec.seed = uint64_t(seed);
      corpus.pairs[id].push_back(fixtures::generate_pair(spec));
    }
  }
  return corpus;
}

const std::set<PatternId> kInterpretable = {
    PatternId::P1, PatternId::P4,  PatternId::P6,  PatternId::P7,
    PatternId::P9, PatternId::P10, PatternId::P11, PatternId::P12};

// ---------------------------------------------------------------------------

std::string criterion_pattern_oracle(const Corpus& corpus) {
  auto start = Clock::now();
  NormalizePolicy policy = NormalizePolicy::defaults();
  int checked = 0;
  for (auto& [id, pairs] : corpus.pairs) {
    for (size_t i = 0; i < pairs.size(); ++i) {
      archive::PackageModel a = archive::read_package(as_span(pairs[i].a));
      archive::PackageModel b = archive::read_package(as_span(pairs[i].b));
      diffing::DiffOutcome outcome = diffing::compare_packages(a, b, policy);
      std::set<PatternId> labels;
      for (const diffing::Finding& f : outcome.findings) labels.insert(f.pattern);
      if (labels != std::set<PatternId>{id}) {
        std::string got;
        for (PatternId l : labels) got += patterns::pattern_name(l) + " ";
        return patterns::pattern_name(id) + " seed " + std::to_string(i + 1) +
               " labeled {" + got + "} instead";
      }
      ++checked;
    }
  }
  double elapsed = seconds_since(start);
  if (elapsed >= 60.0) {
    return "runtime " + std::to_string(elapsed) + "s exceeds the 60s budget";
  }
  std::printf("       pattern oracle: %d/%d pairs labeled exactly, %.1fs\n", checked,
              14 * kSeedsPerPattern, elapsed);
  return "";
}

std::string criterion_interpretation_convergence(const Corpus& corpus) {
  NormalizePolicy policy = NormalizePolicy::defaults();
  for (auto& [id, pairs] : corpus.pairs) {
    bool interpretable = kInterpretable.count(id) > 0;
    for (size_t i = 0; i < pairs.size(); ++i) {
      if (interpretable) {
        auto [na, la] = normalize::normalize_package(
            archive::read_package(as_span(pairs[i].a)), policy);
        auto [nb, lb] = normalize::normalize_package(
            archive::read_package(as_span(pairs[i].b)), policy);
        bool converged = na == nb;
        if (!converged && id == PatternId::P7) {
          // Slot renumbering resolves through canonical comparison.
          diffing::DiffOutcome post = diffing::compare_packages(
              archive::read_package(as_span(na)), archive::read_package(as_span(nb)),
              policy);
          converged = post.equivalent && !post.has_unknown();
        }
        if (!converged) {
          return patterns::pattern_name(id) + " seed " + std::to_string(i + 1) +
                 " did not converge";
        }
      } else {
        verify::VerificationReport r = verify::verify_pair_bytes(
            as_span(pairs[i].a), as_span(pairs[i].b), policy);
        if (r.verdict == verify::Verdict::VerifiedInterpreted) {
          return patterns::pattern_name(id) + " seed " + std::to_string(i + 1) +
                 " falsely verified as interpreted";
        }
      }
    }
  }
  return "";
}

std::string criterion_running_example() {
  // A two-class jar pair: pom.properties timestamps differ and the class
  // entries are packaged in opposite order.
  fixtures::ClassBuilder bar_builder("Bar");
  Bytes bar = classfile::serialize_class(bar_builder.build());
  fixtures::ClassBuilder baz_builder("Baz");
  Bytes baz = classfile::serialize_class(baz_builder.build());
  Bytes manifest = to_bytes("Manifest-Version: 1.0\r\nCreated-By: Apache Maven 3.6.0\r\n\r\n");
  Bytes pom_xml = to_bytes("<project><artifactId>foo</artifactId></project>\n");
  auto props = [](const char* stamp) {
    return to_bytes(std::string("#Generated by Maven\n# ") + stamp +
                    "\nversion=1.0\ngroupId=com.example\nartifactId=foo\n");
  };
  archive::DosTime t = archive::DosTime::from_unix(1631998003);
  archive::PackageModel dp1 = archive::make_package(
      {{"META-INF/MANIFEST.MF", manifest},
       {"Bar.class", bar},
       {"Baz.class", baz},
       {"META-INF/maven/com.example/foo/pom.properties",
        props("Sun Sep 18 22:43:23 EDT 2021")},
       {"META-INF/maven/com.example/foo/pom.xml", pom_xml}},
      t);
  archive::PackageModel dp2 = archive::make_package(
      {{"META-INF/MANIFEST.MF", manifest},
       {"Baz.class", baz},
       {"Bar.class", bar},
       {"META-INF/maven/com.example/foo/pom.properties",
        props("Sun Sep 18 22:45:35 EDT 2021")},
       {"META-INF/maven/com.example/foo/pom.xml", pom_xml}},
      t);
  Bytes foo1 = archive::write_plain(dp1);
  Bytes foo2 = archive::write_plain(dp2);

  verify::VerificationReport r =
      verify::verify_pair_bytes(as_span(foo1), as_span(foo2), NormalizePolicy::defaults(),
                                "Foo-run1.jar", "Foo-run2.jar");
  if (r.verdict != verify::Verdict::VerifiedInterpreted) {
    return std::string("verdict was ") + verify::verdict_name(r.verdict);
  }
  std::set<PatternId> labels;
  for (const diffing::Finding& f : r.pre.findings) labels.insert(f.pattern);
  if (labels != std::set<PatternId>{PatternId::P1, PatternId::P11}) {
    std::string got;
    for (PatternId l : labels) got += patterns::pattern_name(l) + " ";
    return "findings were {" + got + "}, expected {P1 P11}";
  }
  return "";
}

std::string criterion_round_trip(const Corpus& corpus) {
  int classes = 0;
  int jars = 0;
  // Every fixture jar and every class inside it.
  for (auto& [id, pairs] : corpus.pairs) {
    for (const fixtures::FixturePair& pair : pairs) {
      for (const Bytes* jar : {&pair.a, &pair.b}) {
        archive::PackageModel pkg = archive::read_package(as_span(*jar));
        if (archive::write_preserving(pkg) != *jar) {
          return "jar preservation round-trip failed for " + patterns::pattern_name(id);
        }
        ++jars;
        for (const archive::ArchiveEntry& e : pkg.entries) {
          if (e.kind != archive::EntryKind::ClassFile) continue;
          classfile::ClassModel m = classfile::parse_class(as_span(e.payload));
          if (classfile::serialize_class(m) != e.payload) {
            return "class round-trip failed in " + patterns::pattern_name(id);
          }
          ++classes;
        }
      }
    }
  }
  // Synthetic corpus variety plus the externally created archives.
  fixtures::Rng rng(20260809);
  for (int i = 0; i < 60; ++i) {
    classfile::ClassModel m = fixtures::random_class(
        rng, "corpus/C" + std::to_string(i), 1 + int(rng.below(5)), 10);
    Bytes bytes = classfile::serialize_class(m);
    if (classfile::serialize_class(classfile::parse_class(as_span(bytes))) != bytes) {
      return "random class round-trip failed at index " + std::to_string(i);
    }
    ++classes;
  }
  for (const char* name : {"empty.zip", "small.jar", "stored.zip", "mixed.zip",
                           "bigger.jar"}) {
    Bytes data = testutil::read_file(testutil::data_path(name));
    archive::PackageModel pkg = archive::read_package(as_span(data));
    if (archive::write_preserving(pkg) != data) {
      return std::string("external archive round-trip failed for ") + name;
    }
    ++jars;
  }
  if (classes < 200) return "class corpus too small: " + std::to_string(classes);
  if (jars < 20) return "jar corpus too small: " + std::to_string(jars);
  std::printf("       round-trip corpus: %d class files, %d archives\n", classes, jars);
  return "";
}

std::string criterion_idempotence(const Corpus& corpus) {
  NormalizePolicy policy = NormalizePolicy::defaults();
  for (auto& [id, pairs] : corpus.pairs) {
    for (const fixtures::FixturePair& pair : pairs) {
      for (const Bytes* jar : {&pair.a, &pair.b}) {
        auto [once, log1] = normalize::normalize_package(
            archive::read_package(as_span(*jar)), policy);
        auto [twice, log2] = normalize::normalize_package(
            archive::read_package(as_span(once)), policy);
        if (once != twice) {
          return "normalize twice differs for " + patterns::pattern_name(id);
        }
        if (!log2.empty()) {
          return "second normalization logged changes for " + patterns::pattern_name(id);
        }
      }
    }
  }
  return "";
}

std::string criterion_equivalence_laws(const Corpus& corpus) {
  NormalizePolicy policy = NormalizePolicy::defaults();
  // Reflexivity and symmetry across one pair per pattern.
  for (auto& [id, pairs] : corpus.pairs) {
    const fixtures::FixturePair& pair = pairs.front();
    archive::PackageModel a = archive::read_package(as_span(pair.a));
    archive::PackageModel b = archive::read_package(as_span(pair.b));
    diffing::DiffOutcome self = diffing::compare_packages(a, a, policy);
    if (!self.equivalent || !self.findings.empty()) {
      return "reflexivity failed for " + patterns::pattern_name(id);
    }
    diffing::DiffOutcome ab = diffing::compare_packages(a, b, policy);
    diffing::DiffOutcome ba = diffing::compare_packages(b, a, policy);
    if (ab.equivalent != ba.equivalent || ab.stats != ba.stats) {
      return "symmetry failed for " + patterns::pattern_name(id);
    }
  }
  // Transitivity across a chained triple: a ~ b by pool permutation, b ~ c by
  // method order, therefore a ~ c under the combined policy.
  fixtures::Rng rng(404);
  classfile::ClassModel base = fixtures::random_class(rng, "chain/Cls", 4, 8);
  std::vector<uint16_t> order;
  for (uint16_t i = 1; i < base.pool.size(); ++i) {
    if (!base.pool[i].phantom) order.push_back(i);
  }
  rng.shuffle(order);
  classfile::PoolPermuteResult permuted = classfile::permute_pool(base, order);
  if (!permuted.ok) return "pool permutation failed to apply";
  classfile::ClassModel method_swapped = base;
  std::swap(method_swapped.methods.front(), method_swapped.methods.back());

  auto jar_with = [&](const classfile::ClassModel& m) {
    return archive::write_plain(
        archive::make_package({{"chain/Cls.class", classfile::serialize_class(m)}}));
  };
  Bytes a = jar_with(permuted.model);
  Bytes b = jar_with(base);
  Bytes c = jar_with(method_swapped);
  auto equivalent = [&](const Bytes& x, const Bytes& y) {
    return diffing::compare_packages(archive::read_package(as_span(x)),
                                     archive::read_package(as_span(y)), policy)
        .equivalent;
  };
  if (!equivalent(a, b)) return "a ~ b (pool permutation) failed";
  if (!equivalent(b, c)) return "b ~ c (method order) failed";
  if (!equivalent(a, c)) return "transitivity a ~ c failed";
  return "";
}

std::string criterion_pool_brute_force() {
  auto start = Clock::now();
  // A minimal synthetic class whose pool has exactly 6 non-phantom entries,
  // all reachable: Utf8 x2 + Class x2 (this/super) and the field's name and
  // descriptor. Unreferenced constants would not show in the index-free form.
  fixtures::ClassBuilder builder("BF");
  builder.add_field(0x0002, "x", "I");
  classfile::ClassModel base = builder.build();
  std::vector<uint16_t> indices;
  for (uint16_t i = 1; i < base.pool.size(); ++i) {
    if (!base.pool[i].phantom) indices.push_back(i);
  }
  if (indices.size() != 6) {
    return "expected a 6-entry pool, got " + std::to_string(indices.size());
  }
  classfile::ClassCanonPolicy canon_policy;
  std::string expected = classfile::canonicalize_class(base, canon_policy).digest;

  std::vector<uint16_t> order = indices;
  std::sort(order.begin(), order.end());
  int permutations = 0;
  do {
    classfile::PoolPermuteResult r = classfile::permute_pool(base, order);
    if (!r.ok) return "permutation failed to apply: " + r.note;
    Bytes bytes = classfile::serialize_class(r.model);
    classfile::ClassModel reparsed = classfile::parse_class(as_span(bytes));
    if (classfile::canonicalize_class(reparsed, canon_policy).digest != expected) {
      return "digest changed under permutation " + std::to_string(permutations);
    }
    ++permutations;
  } while (std::next_permutation(order.begin(), order.end()));
  if (permutations != 720) {
    return "expected 720 permutations, ran " + std::to_string(permutations);
  }

  // Any single payload-byte mutation must change the digest.
  int mutations = 0;
  for (uint16_t idx : indices) {
    classfile::ClassModel mutated = base;
    classfile::CpEntry& e = mutated.pool[idx];
    switch (e.tag) {
      case classfile::CpTag::Utf8:
        if (e.utf8.empty()) continue;
        e.utf8.back() ^= 0x01;
        break;
      case classfile::CpTag::Class:
      case classfile::CpTag::String: {
        // Reference-shaped payload: mutate the referenced bytes (the index
        // itself is erased by the canonical form).
        classfile::CpEntry& target = mutated.pool[e.ref1];
        if (target.utf8.empty()) continue;
        target.utf8.front() ^= 0x01;
        break;
      }
      default:
        continue;
    }
    if (classfile::canonicalize_class(mutated, canon_policy).digest == expected) {
      return "payload mutation of entry " + std::to_string(idx) +
             " left the digest unchanged";
    }
    ++mutations;
  }
  if (mutations < 4) return "too few mutations exercised";
  double elapsed = seconds_since(start);
  if (elapsed >= 10.0) {
    return "runtime " + std::to_string(elapsed) + "s exceeds the 10s budget";
  }
  std::printf("       brute force: 720 permutations, %d mutations, %.2fs\n", mutations,
              elapsed);
  return "";
}

std::string criterion_registry() {
  const std::vector<patterns::PatternDescriptor>& reg = patterns::registry();
  if (reg.size() != 14) return "registry holds " + std::to_string(reg.size()) + " patterns";
  std::set<patterns::RootCause> causes;
  int java_specific = 0;
  for (const patterns::PatternDescriptor& d : reg) {
    causes.insert(d.root_cause);
    if (d.java_specific) ++java_specific;
  }
  if (causes.size() != 5) return "expected 5 root causes, found " + std::to_string(causes.size());
  if (java_specific != 11) {
    return "expected 11 java-specific patterns, found " + std::to_string(java_specific);
  }
  using S = patterns::Strategy;
  const std::map<PatternId, std::set<S>> expected = {
      {PatternId::P1, {S::Control, S::Interpretation}},
      {PatternId::P2, {S::Control}},
      {PatternId::P3, {S::Control}},
      {PatternId::P4, {S::Remediation, S::Control}},
      {PatternId::P5, {S::Remediation}},
      {PatternId::P6, {S::Interpretation}},
      {PatternId::P7, {S::Interpretation}},
      {PatternId::P8, {S::Control}},
      {PatternId::P9, {S::Interpretation}},
      {PatternId::P10, {S::Interpretation}},
      {PatternId::P11, {S::Interpretation}},
      {PatternId::P12, {S::Interpretation}},
      {PatternId::P13, {S::Control}},
      {PatternId::P14, {S::Control}},
  };
  for (auto& [id, strategies] : expected) {
    if (patterns::descriptor(id).strategy != strategies) {
      return "strategy set mismatch for " + patterns::pattern_name(id);
    }
  }
  // Sanity checks the java-specific flags named by the catalog.
  for (PatternId id : {PatternId::P1, PatternId::P3, PatternId::P11}) {
    if (patterns::descriptor(id).java_specific) {
      return patterns::pattern_name(id) + " must not be java-specific";
    }
  }
  return "";
}

std::string criterion_verdict_aggregation() {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "verijar-acceptance-db";
  fs::remove_all(dir);
  fs::create_directories(dir / "run1");
  fs::create_directories(dir / "run2");
  fs::create_directories(dir / "out");

  // 100 deliverables: 99 identical across runs, one with an unclassifiable
  // payload difference.
  for (int i = 0; i < 100; ++i) {
    char name[32];
    snprintf(name, sizeof(name), "lib%03d.jar", i);
    Bytes run1_payload = to_bytes("stable content " + std::to_string(i) + "\n");
    Bytes run2_payload = run1_payload;
    if (i == 37) run2_payload = to_bytes("tampered content\n");
    Bytes jar1 = archive::write_plain(
        archive::make_package({{"data/info.txt", run1_payload}}));
    Bytes jar2 = archive::write_plain(
        archive::make_package({{"data/info.txt", run2_payload}}));
    testutil::write_file((dir / "run1" / name).string(), as_span(jar1));
    testutil::write_file((dir / "run2" / name).string(), as_span(jar2));
  }

  verify::DoubleBuildJob job;
  job.command = {"/bin/sh", "-c",
                 "n=$(cat state 2>/dev/null || echo 0); rm -f out/*.jar; "
                 "cp run$((n%2+1))/*.jar out/; echo $((n+1)) > state"};
  job.workdir = dir.string();
  job.output_glob = "out/*.jar";
  verify::DoubleBuildReport report =
      verify::run_double_build(job, NormalizePolicy::defaults());
  fs::remove_all(dir);

  if (report.deliverables.size() != 100) {
    return "expected 100 deliverables, saw " + std::to_string(report.deliverables.size());
  }
  int not_verified = 0;
  for (auto& [rel, r] : report.deliverables) {
    if (r.verdict == verify::Verdict::NotVerified) ++not_verified;
  }
  if (not_verified != 1) {
    return "expected exactly 1 unverified deliverable, saw " + std::to_string(not_verified);
  }
  if (report.overall != verify::Verdict::NotVerified) {
    return std::string("overall verdict was ") + verify::verdict_name(report.overall);
  }
  return "";
}

}  // namespace

int main() {
  std::printf("verijar acceptance suite\n");
  Corpus corpus = build_corpus();

  run("pattern-oracle-suite (14 patterns x 25 seeds, exact labels, <60s)",
      [&] { return criterion_pattern_oracle(corpus); });
  run("interpretation-convergence (interpretable converge, others never verify)",
      [&] { return criterion_interpretation_convergence(corpus); });
  run("running-example-end-to-end (timestamp + entry order => P1+P11, interpreted)",
      [] { return criterion_running_example(); });
  run("round-trip-byte-identity (>=200 classes, >=20 archives)",
      [&] { return criterion_round_trip(corpus); });
  run("normalize-idempotence (normalize . normalize = normalize)",
      [&] { return criterion_idempotence(corpus); });
  run("equivalence-relation-laws (reflexive, symmetric, transitive chain)",
      [&] { return criterion_equivalence_laws(corpus); });
  run("constant-pool-brute-force (720 permutations one digest, mutations differ, <10s)",
      [] { return criterion_pool_brute_force(); });
  run("registry-conformance (14 patterns, 5 causes, 11 jvm-specific, strategies)",
      [] { return criterion_registry(); });
  run("verdict-aggregation (100 deliverables, 1 unknown => NOT_VERIFIED)",
      [] { return criterion_verdict_aggregation(); });

  if (g_failures > 0) {
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all acceptance criteria passed\n");
  return 0;
}
