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
// Command-line front end: verify, diff, normalize, double-build, patterns,
// fixtures.

#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "verijar/diff.hpp"
#include "verijar/fixtures.hpp"
#include "verijar/normalize.hpp"
#include "verijar/patterns.hpp"
#include "verijar/sha.hpp"
#include "verijar/verify.hpp"
#include "verijar/version.hpp"

namespace {

using namespace verijar;

constexpr int kExitVerdict = 1;
constexpr int kExitUsage = 2;
constexpr int kExitFatal = 3;

struct CommonOpts {
  std::string policy_file;
  std::string pinned_time;
  std::vector<std::string> enable;
  std::vector<std::string> disable;
  std::string report_path;
  std::string format = "json";
  bool strip_line_numbers = false;
  std::string fail_on = "not-verified";
  bool serial = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--policy", opts.policy_file, "policy file (see README for the grammar)");
  cmd->add_option("--pinned-time", opts.pinned_time,
                  "pinned entry timestamp, ISO-8601 or epoch seconds");
  cmd->add_option("--enable", opts.enable, "enable an interpretable pattern (P1..P14)");
  cmd->add_option("--disable", opts.disable, "disable a pattern");
  cmd->add_option("--report", opts.report_path, "write the report here instead of stdout");
  cmd->add_option("--format", opts.format, "report format")
      ->check(CLI::IsMember({"json", "text"}));
  cmd->add_flag("--strip-line-numbers", opts.strip_line_numbers,
                "treat LineNumberTable differences as resolvable (P5)");
  cmd->add_option("--fail-on", opts.fail_on, "exit nonzero at or below this verdict")
      ->check(CLI::IsMember({"not-verified", "interpreted"}));
  cmd->add_flag("--serial", opts.serial, "disable parallel entry processing");
}

int64_t parse_time_value(const std::string& value) {
  if (!value.empty() && value.find_first_not_of("0123456789") == std::string::npos) {
    return std::stoll(value);
  }
  struct tm tm_buf = {};
  if (strptime(value.c_str(), "%Y-%m-%dT%H:%M:%S", &tm_buf) == nullptr) {
    throw UsageError("cannot parse time '" + value + "' (use ISO-8601 or epoch seconds)");
  }
  return timegm(&tm_buf);
}

NormalizePolicy build_policy(const CommonOpts& opts) {
  NormalizePolicy policy;
  if (!opts.policy_file.empty()) {
    std::ifstream in(opts.policy_file);
    if (!in) throw InputUnreadable("cannot read policy file " + opts.policy_file);
    std::string content((std::istreambuf_iterator<char>(in)), {});
    policy = parse_policy_file(content);
  }
  for (const std::string& e : opts.enable) {
    for (const std::string& d : opts.disable) {
      if (e == d) throw UsageError("pattern " + e + " both enabled and disabled");
    }
  }
  for (const std::string& e : opts.enable) {
    auto id = patterns::parse_pattern(e);
    if (!id) throw UsageError("unknown pattern id '" + e + "'");
    policy.enabled.insert(*id);
  }
  for (const std::string& d : opts.disable) {
    auto id = patterns::parse_pattern(d);
    if (!id) throw UsageError("unknown pattern id '" + d + "'");
    policy.enabled.erase(*id);
  }
  if (!opts.pinned_time.empty()) {
    policy.archive.pinned_time =
        archive::DosTime::from_unix(parse_time_value(opts.pinned_time));
  } else if (const char* env = std::getenv("SOURCE_DATE_EPOCH")) {
    policy.archive.pinned_time = archive::DosTime::from_unix(parse_time_value(env));
  }
  if (opts.strip_line_numbers) policy.strip_line_numbers = true;
  if (opts.serial) policy.parallel = false;
  policy.validate();
  return policy;
}

void emit_report(const CommonOpts& opts, const std::string& json_text,
                 const std::string& plain_text) {
  const std::string& body = opts.format == "text" ? plain_text : json_text;
  if (opts.report_path.empty()) {
    std::cout << body << "\n";
    return;
  }
  std::ofstream out(opts.report_path, std::ios::binary);
  if (!out) throw Error("cannot write report to " + opts.report_path);
  out << body << "\n";
}

int verdict_exit(verify::Verdict verdict, const std::string& fail_on) {
  if (verdict == verify::Verdict::NotVerified) return kExitVerdict;
  if (fail_on == "interpreted" && verdict == verify::Verdict::VerifiedInterpreted) {
    return kExitVerdict;
  }
  return 0;
}

Bytes read_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputUnreadable("cannot read " + path);
  return Bytes(std::istreambuf_iterator<char>(in), {});
}

void write_binary(const std::string& path, const Bytes& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"verifies that independently built JVM deliverable packages are "
               "equivalent, classifies every difference against the known "
               "non-determinism patterns, and eliminates the interpretable ones"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  CommonOpts verify_opts, diff_opts, norm_opts, db_opts, pat_opts;

  auto* cmd_verify = app.add_subcommand(
      "verify", "compare two deliverables, normalize, re-compare, emit a verdict");
  std::string verify_a, verify_b;
  cmd_verify->add_option("left", verify_a, "first deliverable")->required();
  cmd_verify->add_option("right", verify_b, "second deliverable")->required();
  add_common(cmd_verify, verify_opts);

  auto* cmd_diff = app.add_subcommand(
      "diff", "compare two deliverables and classify differences (no normalization)");
  std::string diff_a, diff_b;
  cmd_diff->add_option("left", diff_a, "first deliverable")->required();
  cmd_diff->add_option("right", diff_b, "second deliverable")->required();
  add_common(cmd_diff, diff_opts);

  auto* cmd_norm = app.add_subcommand("normalize",
                                      "apply interpretation passes and repack");
  std::string norm_in, norm_out;
  cmd_norm->add_option("input", norm_in, "deliverable to normalize")->required();
  cmd_norm->add_option("--out", norm_out, "output path")->required();
  add_common(cmd_norm, norm_opts);

  auto* cmd_db = app.add_subcommand(
      "double-build", "run a build command twice and verify the paired outputs");
  std::string db_workdir = ".";
  std::string db_glob = "**";
  std::string db_isolation = "none";
  std::vector<std::string> db_command;
  cmd_db->add_option("--workdir", db_workdir, "build working directory");
  cmd_db->add_option("--glob", db_glob, "output glob, relative to the working directory");
  cmd_db->add_option("--isolation", db_isolation, "build isolation mode")
      ->check(CLI::IsMember({"none", "fresh-temp-dir"}));
  cmd_db->add_option("command", db_command, "build command and arguments")->required();
  cmd_db->positionals_at_end();
  add_common(cmd_db, db_opts);

  auto* cmd_pat = app.add_subcommand("patterns", "print the pattern registry");
  add_common(cmd_pat, pat_opts);

  auto* cmd_fix = app.add_subcommand("fixtures",
                                     "emit labeled non-equivalent pairs to disk");
  std::string fix_pattern;
  uint64_t fix_seed = 0;
  int fix_count = 1;
  std::string fix_dir = ".";
  cmd_fix->add_option("--pattern", fix_pattern, "pattern id (P1..P14)")->required();
  cmd_fix->add_option("--seed", fix_seed, "generator seed");
  cmd_fix->add_option("--count", fix_count, "number of pairs (seed, seed+1, ...)");
  cmd_fix->add_option("--out-dir", fix_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*cmd_verify) {
      NormalizePolicy policy = build_policy(verify_opts);
      verify::VerificationReport report = verify::verify_pair(verify_a, verify_b, policy);
      emit_report(verify_opts, report.to_json(), report.to_text());
      std::cerr << "verdict: " << verify::verdict_name(report.verdict) << "\n";
      return verdict_exit(report.verdict, verify_opts.fail_on);
    }
    if (*cmd_diff) {
      NormalizePolicy policy = build_policy(diff_opts);
      Bytes a = read_binary(diff_a);
      Bytes b = read_binary(diff_b);
      verify::VerificationReport report;
      if (sha256_hex(as_span(a)) == sha256_hex(as_span(b))) {
        report = verify::verify_pair_bytes(as_span(a), as_span(b), policy, diff_a, diff_b);
      } else {
        // Pre-normalization assessment only.
        archive::PackageModel pa = archive::read_package(as_span(a), diff_a);
        archive::PackageModel pb = archive::read_package(as_span(b), diff_b);
        report.pre = diffing::compare_packages(pa, pb, policy);
        report.left = {sha1_hex(as_span(a)), sha256_hex(as_span(a)), a.size()};
        report.right = {sha1_hex(as_span(b)), sha256_hex(as_span(b)), b.size()};
        report.tool_version = kVersion;
        report.policy_snapshot = verify::policy_snapshot(policy);
        report.left_path = diff_a;
        report.right_path = diff_b;
        report.verdict = report.pre.equivalent && !report.pre.has_unknown()
                             ? verify::Verdict::VerifiedInterpreted
                             : verify::Verdict::NotVerified;
      }
      emit_report(diff_opts, report.to_json(), report.to_text());
      std::cerr << "verdict: " << verify::verdict_name(report.verdict) << "\n";
      return verdict_exit(report.verdict, diff_opts.fail_on);
    }
    if (*cmd_norm) {
      NormalizePolicy policy = build_policy(norm_opts);
      Bytes input = read_binary(norm_in);
      archive::PackageModel pkg = archive::read_package(as_span(input), norm_in);
      auto [bytes, log] = normalize::normalize_package(pkg, policy);
      write_binary(norm_out, bytes);
      nlohmann::ordered_json j;
      j["schema"] = "verijar-normalize/1";
      j["input_sha256"] = sha256_hex(as_span(input));
      j["output_sha256"] = sha256_hex(as_span(bytes));
      nlohmann::ordered_json records = nlohmann::ordered_json::array();
      std::string text_log;
      for (const normalize::NormalizeRecord& r : log.records) {
        records.push_back({{"entry", r.entry_name},
                           {"pass", patterns::pattern_name(r.pass)},
                           {"action", r.action}});
        text_log += r.entry_name + " [" + patterns::pattern_name(r.pass) + "] " +
                    r.action + "\n";
      }
      j["log"] = records;
      emit_report(norm_opts, j.dump(2), text_log.empty() ? "no changes\n" : text_log);
      return 0;
    }
    if (*cmd_db) {
      NormalizePolicy policy = build_policy(db_opts);
      verify::DoubleBuildJob job;
      job.command = db_command;
      job.workdir = db_workdir;
      job.output_glob = db_glob;
      job.isolation = db_isolation == "fresh-temp-dir"
                          ? verify::DoubleBuildJob::Isolation::FreshTempDir
                          : verify::DoubleBuildJob::Isolation::None;
      verify::DoubleBuildReport report = verify::run_double_build(job, policy);
      emit_report(db_opts, report.to_json(), report.to_text());
      std::cerr << "overall verdict: " << verify::verdict_name(report.overall) << "\n";
      return verdict_exit(report.overall, db_opts.fail_on);
    }
    if (*cmd_pat) {
      if (pat_opts.format == "text") {
        std::string out;
        for (const patterns::PatternDescriptor& d : patterns::registry()) {
          std::string strategies;
          for (patterns::Strategy s : d.strategy) {
            if (!strategies.empty()) strategies += "+";
            strategies += patterns::strategy_name(s);
          }
          out += patterns::pattern_name(d.id) + "  " + d.name + "\n";
          out += "  root cause: " + patterns::root_cause_name(d.root_cause) + "\n";
          out += "  strategy: " + strategies +
                 (d.java_specific ? "  (jvm-specific)" : "  (cross-ecosystem)") + "\n";
          out += "  interpretable here: " +
                 std::string(d.interpretable_here ? "yes" : "no") + "\n";
          out += "  " + d.summary + "\n";
          out += "  advice: " + d.advice + "\n\n";
        }
        emit_report(pat_opts, out, out);
      } else {
        emit_report(pat_opts, patterns::registry_json(), patterns::registry_json());
      }
      return 0;
    }
    if (*cmd_fix) {
      auto id = patterns::parse_pattern(fix_pattern);
      if (!id) throw UsageError("unknown pattern id '" + fix_pattern + "'");
      for (int i = 0; i < fix_count; ++i) {
        fixtures::FixtureSpec spec;
        spec.pattern = *id;
        spec.seed = fix_seed + uint64_t(i);
        fixtures::FixturePair pair = fixtures::generate_pair(spec);
        std::string base = fix_dir + "/" + fix_pattern + "-seed" + std::to_string(spec.seed);
        write_binary(base + "-a.jar", pair.a);
        write_binary(base + "-b.jar", pair.b);
        std::cerr << "wrote " << base << "-{a,b}.jar\n";
      }
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFatal;
  }
  return kExitUsage;
}
