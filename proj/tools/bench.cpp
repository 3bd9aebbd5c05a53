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
// Benchmarks the per-entry parallel kernels (compare, normalize) against the
// serial path on generated archives and checks the outputs agree.

#include <chrono>
#include <cstdio>
#include <vector>

#include "verijar/classcanon.hpp"
#include "verijar/diff.hpp"
#include "verijar/fixtures.hpp"
#include "verijar/normalize.hpp"
#include "verijar/sha.hpp"

using namespace verijar;
using Clock = std::chrono::steady_clock;

namespace {

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

struct Workload {
  std::vector<archive::PackageModel> left;
  std::vector<archive::PackageModel> right;
};

// Archives whose class entries all differ by a pool permutation: every entry
// exercises the full canonical analysis, the regime the parallel loop is for.
Workload build_workload(int pairs, int entries_per_archive) {
  Workload w;
  fixtures::Rng rng(0xbe9c4);
  for (int i = 0; i < pairs; ++i) {
    std::vector<std::pair<std::string, Bytes>> files_a, files_b;
    for (int e = 0; e < entries_per_archive; ++e) {
      std::string name = "pkg/mod" + std::to_string(i) + "/Cls" + std::to_string(e);
      classfile::ClassModel base =
          fixtures::random_class(rng, name, 4 + int(rng.below(4)), 14);
      std::vector<uint16_t> order;
      for (uint16_t k = 1; k < base.pool.size(); ++k) {
        if (!base.pool[k].phantom) order.push_back(k);
      }
      rng.shuffle(order);
      classfile::PoolPermuteResult permuted = classfile::permute_pool(base, order);
      files_a.emplace_back(name + ".class", classfile::serialize_class(base));
      files_b.emplace_back(name + ".class",
                           classfile::serialize_class(permuted.ok ? permuted.model : base));
    }
    Bytes jar_a = archive::write_plain(archive::make_package(files_a));
    Bytes jar_b = archive::write_plain(archive::make_package(files_b));
    w.left.push_back(archive::read_package(as_span(jar_a)));
    w.right.push_back(archive::read_package(as_span(jar_b)));
  }
  return w;
}

double bench_compare(const Workload& w, const NormalizePolicy& policy,
                     size_t* finding_count) {
  auto start = Clock::now();
  size_t findings = 0;
  for (size_t i = 0; i < w.left.size(); ++i) {
    findings += diffing::compare_packages(w.left[i], w.right[i], policy).findings.size();
  }
  *finding_count = findings;
  return ms_since(start);
}

double bench_normalize(const Workload& w, const NormalizePolicy& policy,
                       std::string* digest) {
  auto start = Clock::now();
  std::string combined;
  for (const archive::PackageModel& pkg : w.left) {
    auto [bytes, log] = normalize::normalize_package(pkg, policy);
    combined += sha256_hex(as_span(bytes));
  }
  *digest = sha256_hex(as_span(std::string_view(combined)));
  return ms_since(start);
}

}  // namespace

int main(int argc, char** argv) {
  int pairs = argc > 1 ? std::atoi(argv[1]) : 60;
  int entries = argc > 2 ? std::atoi(argv[2]) : 24;
  std::printf("workload: %d archive pairs, ~%d entries each\n", pairs, entries);
  Workload w = build_workload(pairs, entries);

  NormalizePolicy serial = NormalizePolicy::defaults();
  serial.parallel = false;
  NormalizePolicy parallel = NormalizePolicy::defaults();
  parallel.parallel = true;

  // Warm-up pass keeps first-touch costs out of the measurement.
  size_t warm = 0;
  bench_compare(w, serial, &warm);

  size_t findings_serial = 0, findings_parallel = 0;
  double cmp_serial = bench_compare(w, serial, &findings_serial);
  double cmp_parallel = bench_compare(w, parallel, &findings_parallel);

  std::string digest_serial, digest_parallel;
  double norm_serial = bench_normalize(w, serial, &digest_serial);
  double norm_parallel = bench_normalize(w, parallel, &digest_parallel);

  std::printf("%-22s %10s %10s %8s\n", "kernel", "serial ms", "parallel", "speedup");
  std::printf("%-22s %10.1f %10.1f %7.2fx\n", "compare_packages", cmp_serial, cmp_parallel,
              cmp_serial / cmp_parallel);
  std::printf("%-22s %10.1f %10.1f %7.2fx\n", "normalize_package", norm_serial,
              norm_parallel, norm_serial / norm_parallel);

  if (findings_serial != findings_parallel) {
    std::fprintf(stderr, "MISMATCH: finding counts differ (%zu vs %zu)\n", findings_serial,
                 findings_parallel);
    return 1;
  }
  if (digest_serial != digest_parallel) {
    std::fprintf(stderr, "MISMATCH: normalized outputs differ between paths\n");
    return 1;
  }
  std::printf("serial and parallel outputs agree (%zu findings, digest %s)\n",
              findings_serial, digest_serial.substr(0, 12).c_str());
  return 0;
}
