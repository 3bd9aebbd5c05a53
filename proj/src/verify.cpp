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

#include "verijar/verify.hpp"

#include <sys/utsname.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>

#include "json.hpp"
#include "verijar/classfile.hpp"
#include "verijar/sha.hpp"
#include "verijar/version.hpp"

namespace verijar::verify {

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using patterns::PatternId;

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::VerifiedBitwise: return "VERIFIED_BITWISE";
    case Verdict::VerifiedInterpreted: return "VERIFIED_INTERPRETED";
    case Verdict::NotVerified: return "NOT_VERIFIED";
  }
  return "?";
}

Verdict weakest(Verdict a, Verdict b) { return a > b ? a : b; }

namespace {

InputDigest digest_of(ByteSpan bytes) {
  return {sha1_hex(bytes), sha256_hex(bytes), bytes.size()};
}

// Single class files participate as one-entry packages.
archive::PackageModel load_deliverable(ByteSpan bytes, const std::string& name) {
  if (classfile::looks_like_class(bytes)) {
    std::string entry = fs::path(name).filename().string();
    if (entry.empty()) entry = "input.class";
    archive::PackageModel pkg =
        archive::make_package({{entry, Bytes(bytes.begin(), bytes.end())}});
    pkg.sha1 = sha1_hex(bytes);
    pkg.sha256 = sha256_hex(bytes);
    pkg.origin_path = name;
    return pkg;
  }
  return archive::read_package(bytes, name);
}

ordered_json finding_json(const diffing::Finding& f) {
  ordered_json j;
  j["entry"] = f.entry_name;
  j["pattern"] = patterns::pattern_name(f.pattern);
  if (f.pattern != PatternId::Unknown) {
    j["root_cause"] = patterns::root_cause_name(patterns::descriptor(f.pattern).root_cause);
  }
  j["locus"] = f.locus;
  j["resolved_by"] = diffing::resolution_name(f.resolved_by);
  j["evidence_left"] = f.evidence_left;
  j["evidence_right"] = f.evidence_right;
  if (!f.note.empty()) j["note"] = f.note;
  return j;
}

ordered_json outcome_json(const diffing::DiffOutcome& o) {
  ordered_json j;
  j["equivalent"] = o.equivalent;
  ordered_json stats = ordered_json::object();
  for (auto& [id, n] : o.stats) stats[patterns::pattern_name(id)] = n;
  j["pattern_stats"] = stats;
  ordered_json findings = ordered_json::array();
  for (const diffing::Finding& f : o.findings) findings.push_back(finding_json(f));
  j["findings"] = findings;
  return j;
}

ordered_json log_json(const normalize::NormalizeLog& log) {
  ordered_json j = ordered_json::array();
  for (const normalize::NormalizeRecord& r : log.records) {
    ordered_json rec;
    rec["entry"] = r.entry_name;
    rec["pass"] = patterns::pattern_name(r.pass);
    rec["action"] = r.action;
    if (!r.before_digest.empty()) {
      rec["before_sha256"] = r.before_digest;
      rec["after_sha256"] = r.after_digest;
    }
    j.push_back(rec);
  }
  return j;
}

ordered_json digest_json(const InputDigest& d) {
  return ordered_json{{"sha1", d.sha1}, {"sha256", d.sha256}, {"size", d.size}};
}

std::vector<std::pair<std::string, std::string>> probe_environment() {
  std::vector<std::pair<std::string, std::string>> env;
  struct utsname u;
  if (uname(&u) == 0) {
    env.emplace_back("os.probed", std::string(u.sysname) + " " + u.release);
    env.emplace_back("arch.probed", u.machine);
  }
  return env;
}

std::string advice_for(const diffing::DiffOutcome& outcome) {
  std::string out;
  for (auto& [id, n] : outcome.stats) {
    if (id == PatternId::Unknown) continue;
    const patterns::PatternDescriptor& d = patterns::descriptor(id);
    out += patterns::pattern_name(id) + " (" + d.name + "): " + d.advice + "\n";
  }
  return out;
}

}  // namespace

std::string policy_snapshot(const NormalizePolicy& policy) {
  std::string enabled;
  for (PatternId id : policy.enabled) {
    if (!enabled.empty()) enabled += ",";
    enabled += patterns::pattern_name(id);
  }
  std::string out;
  out += "enable = " + enabled + "\n";
  out += "pinned-time = " + policy.archive.pinned_time.iso() + "\n";
  out += "strip-line-numbers = " + std::string(policy.strip_line_numbers ? "true" : "false") +
         "\n";
  out += "deflate-level = " + std::to_string(policy.archive.deflate_level) + "\n";
  out += "nested-depth = " + std::to_string(policy.nested_depth) + "\n";
  out += "rules = " + std::to_string(policy.rules.size()) + " loaded\n";
  return out;
}

std::string BuildSpecDoc::to_json() const {
  ordered_json j;
  ordered_json env = ordered_json::object();
  for (auto& [k, v] : environment) env[k] = v;
  j["environment"] = env;
  j["commands"] = commands;
  j["operations"] = operations;
  return j.dump(2);
}

std::string BuildSpecDoc::to_text() const {
  std::string out = "build specification\n";
  out += "  environment:\n";
  for (auto& [k, v] : environment) out += "    " + k + ": " + v + "\n";
  out += "  commands:\n";
  for (const std::string& c : commands) out += "    " + c + "\n";
  out += "  operations applied:\n";
  for (const std::string& o : operations) out += "    " + o + "\n";
  return out;
}

std::string VerificationReport::to_json(bool include_metadata) const {
  ordered_json j;
  j["schema"] = "verijar-report/1";
  j["tool"] = {{"name", "verijar"}, {"version", tool_version}};
  j["verdict"] = verdict_name(verdict);
  j["inputs"] = {{"left", digest_json(left)}, {"right", digest_json(right)}};
  j["policy"] = policy_snapshot;
  j["comparison"] = {{"pre_normalization", outcome_json(pre)},
                     {"post_normalization", outcome_json(post)}};
  j["normalization"] = {{"left", log_json(log_left)},
                        {"right", log_json(log_right)},
                        {"outputs_byte_equal", outputs_byte_equal},
                        {"output_sha256_left", normalized_sha256_left},
                        {"output_sha256_right", normalized_sha256_right}};
  j["build_spec"] = ordered_json::parse(build_spec.to_json());
  if (include_metadata) {
    j["metadata"] = {{"left_path", left_path}, {"right_path", right_path}};
  }
  return j.dump(2);
}

std::string VerificationReport::to_text() const {
  std::string out;
  out += "verdict: " + std::string(verdict_name(verdict)) + "\n";
  out += "left:  sha256=" + left.sha256 + " (" + std::to_string(left.size) + " bytes)\n";
  out += "right: sha256=" + right.sha256 + " (" + std::to_string(right.size) + " bytes)\n";
  if (pre.findings.empty()) {
    out += "findings: none\n";
  } else {
    out += "findings (pattern / root cause / strategy / resolution):\n";
    for (const diffing::Finding& f : pre.findings) {
      std::string strategies;
      std::string root = "-";
      std::string name = "unclassified";
      if (f.pattern != PatternId::Unknown) {
        const patterns::PatternDescriptor& d = patterns::descriptor(f.pattern);
        for (patterns::Strategy s : d.strategy) {
          if (!strategies.empty()) strategies += "+";
          strategies += patterns::strategy_name(s);
        }
        root = patterns::root_cause_name(d.root_cause);
        name = d.name;
      }
      out += "  " + patterns::pattern_name(f.pattern) + "  " + name + "  [" + root +
             "]  strategy=" + (strategies.empty() ? "-" : strategies) +
             "  resolved=" + diffing::resolution_name(f.resolved_by) + "\n";
      out += "    entry: " + f.entry_name;
      if (!f.locus.empty()) {
        out += "  locus: ";
        for (size_t i = 0; i < f.locus.size(); ++i) {
          if (i) out += " / ";
          out += f.locus[i];
        }
      }
      out += "\n";
      if (!f.evidence_left.empty() || !f.evidence_right.empty()) {
        // Excerpts carry context lines; surface the first pair that differs.
        auto lines_of = [](const std::string& s) {
          std::vector<std::string> lines;
          size_t start = 0;
          while (start <= s.size()) {
            size_t nl = s.find('\n', start);
            if (nl == std::string::npos) {
              if (start < s.size()) lines.push_back(s.substr(start));
              break;
            }
            lines.push_back(s.substr(start, nl - start));
            start = nl + 1;
          }
          return lines;
        };
        std::vector<std::string> le = lines_of(f.evidence_left);
        std::vector<std::string> re = lines_of(f.evidence_right);
        size_t i = 0;
        while (i < le.size() && i < re.size() && le[i] == re[i]) ++i;
        std::string l = i < le.size() ? le[i] : (le.empty() ? "" : le.front());
        std::string r = i < re.size() ? re[i] : (re.empty() ? "" : re.front());
        out += "    - " + l + "\n";
        out += "    + " + r + "\n";
      }
      if (!f.note.empty()) out += "    note: " + f.note + "\n";
    }
  }
  if (!log_left.empty() || !log_right.empty()) {
    out += "normalization: " + std::to_string(log_left.records.size()) + " change(s) left, " +
           std::to_string(log_right.records.size()) + " change(s) right\n";
  }
  std::string advice = advice_for(pre);
  if (!advice.empty()) {
    out += "advice:\n";
    size_t start = 0;
    while (start < advice.size()) {
      size_t nl = advice.find('\n', start);
      out += "  " + advice.substr(start, nl - start) + "\n";
      start = nl + 1;
    }
  }
  out += build_spec.to_text();
  return out;
}

VerificationReport verify_pair_bytes(ByteSpan bytes_a, ByteSpan bytes_b,
                                     const NormalizePolicy& policy,
                                     const std::string& name_a,
                                     const std::string& name_b) {
  policy.validate();
  VerificationReport report;
  report.tool_version = kVersion;
  report.policy_snapshot = policy_snapshot(policy);
  report.left = digest_of(bytes_a);
  report.right = digest_of(bytes_b);
  report.left_path = name_a;
  report.right_path = name_b;
  report.build_spec.environment = probe_environment();

  if (report.left.sha256 == report.right.sha256) {
    report.verdict = Verdict::VerifiedBitwise;
    report.outputs_byte_equal = true;
    report.pre.equivalent = true;
    report.post.equivalent = true;
    report.build_spec.operations.push_back("none (inputs bitwise identical)");
    return report;
  }

  archive::PackageModel pkg_a = load_deliverable(bytes_a, name_a);
  archive::PackageModel pkg_b = load_deliverable(bytes_b, name_b);

  report.pre = diffing::compare_packages(pkg_a, pkg_b, policy);

  auto [norm_a, log_a] = normalize::normalize_package(pkg_a, policy);
  auto [norm_b, log_b] = normalize::normalize_package(pkg_b, policy);
  report.log_left = std::move(log_a);
  report.log_right = std::move(log_b);
  report.normalized_sha256_left = sha256_hex(as_span(norm_a));
  report.normalized_sha256_right = sha256_hex(as_span(norm_b));
  report.outputs_byte_equal = norm_a == norm_b;

  if (report.outputs_byte_equal) {
    report.post.equivalent = true;
  } else {
    // Residual differences after normalization; P7-style diffs resolve here
    // through canonical comparison rather than byte equality.
    archive::PackageModel out_a = archive::read_package(as_span(norm_a));
    archive::PackageModel out_b = archive::read_package(as_span(norm_b));
    report.post = diffing::compare_packages(out_a, out_b, policy);
  }

  bool any_unknown = report.pre.has_unknown() || report.post.has_unknown();
  bool post_equivalent = report.outputs_byte_equal || report.post.equivalent;
  report.verdict = (post_equivalent && !any_unknown) ? Verdict::VerifiedInterpreted
                                                     : Verdict::NotVerified;

  for (const normalize::NormalizeRecord& r : report.log_left.records) {
    report.build_spec.operations.push_back("left: " + r.entry_name + ": " + r.action);
  }
  for (const normalize::NormalizeRecord& r : report.log_right.records) {
    report.build_spec.operations.push_back("right: " + r.entry_name + ": " + r.action);
  }
  return report;
}

VerificationReport verify_pair(const std::string& path_a, const std::string& path_b,
                               const NormalizePolicy& policy) {
  auto read_file = [](const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputUnreadable("cannot read " + path);
    return Bytes(std::istreambuf_iterator<char>(in), {});
  };
  Bytes a = read_file(path_a);
  Bytes b = read_file(path_b);
  return verify_pair_bytes(as_span(a), as_span(b), policy, path_a, path_b);
}

// ---------------------------------------------------------------------------
// Double build
// ---------------------------------------------------------------------------

namespace {

int run_command(const std::vector<std::string>& argv, const std::string& cwd) {
  if (argv.empty()) throw BuildCommandFailed("empty build command");
  pid_t pid = fork();
  if (pid < 0) throw BuildCommandFailed("fork failed");
  if (pid == 0) {
    if (!cwd.empty() && chdir(cwd.c_str()) != 0) _exit(127);
    std::vector<char*> args;
    for (const std::string& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);
    execvp(args[0], args.data());
    _exit(127);
  }
  int status = 0;
  if (waitpid(pid, &status, 0) < 0) throw BuildCommandFailed("waitpid failed");
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  return -1;
}

std::map<std::string, Bytes> collect_outputs(const std::string& root,
                                             const std::string& glob) {
  std::map<std::string, Bytes> out;
  fs::path base(root);
  if (!fs::exists(base)) return out;
  for (const auto& entry : fs::recursive_directory_iterator(base)) {
    if (!entry.is_regular_file()) continue;
    std::string rel = fs::relative(entry.path(), base).generic_string();
    if (!text::glob_match(glob, rel)) continue;
    std::ifstream in(entry.path(), std::ios::binary);
    out[rel] = Bytes(std::istreambuf_iterator<char>(in), {});
  }
  return out;
}

std::string make_temp_dir() {
  std::string tmpl = (fs::temp_directory_path() / "verijar-XXXXXX").string();
  std::vector<char> buf(tmpl.begin(), tmpl.end());
  buf.push_back('\0');
  if (mkdtemp(buf.data()) == nullptr) throw Error("mkdtemp failed");
  return std::string(buf.data());
}

}  // namespace

std::string DoubleBuildReport::to_json() const {
  ordered_json j;
  j["schema"] = "verijar-double-build/1";
  j["verdict"] = verdict_name(overall);
  ordered_json outs = ordered_json::array();
  for (auto& [rel, report] : deliverables) {
    outs.push_back({{"output", rel},
                    {"verdict", verdict_name(report.verdict)},
                    {"report", ordered_json::parse(report.to_json(false))}});
  }
  j["deliverables"] = outs;
  j["build_spec"] = ordered_json::parse(build_spec.to_json());
  return j.dump(2);
}

std::string DoubleBuildReport::to_text() const {
  std::string out = "overall verdict: " + std::string(verdict_name(overall)) + "\n";
  for (auto& [rel, report] : deliverables) {
    out += "  " + rel + ": " + verdict_name(report.verdict) + "\n";
  }
  out += build_spec.to_text();
  return out;
}

DoubleBuildReport run_double_build(const DoubleBuildJob& job,
                                   const NormalizePolicy& policy) {
  policy.validate();
  DoubleBuildReport report;
  report.build_spec.environment = probe_environment();
  {
    std::string cmd;
    for (size_t i = 0; i < job.command.size(); ++i) {
      if (i) cmd += " ";
      cmd += job.command[i];
    }
    report.build_spec.commands.push_back(cmd);
    report.build_spec.commands.push_back(cmd);  // run twice, identical vectors
  }

  std::vector<std::map<std::string, Bytes>> runs;
  std::vector<std::string> scratch_dirs;
  for (int run = 0; run < 2; ++run) {
    std::string cwd = job.workdir.empty() ? "." : job.workdir;
    if (job.isolation == DoubleBuildJob::Isolation::FreshTempDir) {
      std::string tmp = make_temp_dir();
      scratch_dirs.push_back(tmp);
      fs::copy(job.workdir, tmp,
               fs::copy_options::recursive | fs::copy_options::copy_symlinks);
      cwd = tmp;
    }
    int exit_code = run_command(job.command, cwd);
    if (exit_code != 0) {
      throw BuildCommandFailed("build run " + std::to_string(run + 1) +
                               " exited with status " + std::to_string(exit_code));
    }
    runs.push_back(collect_outputs(cwd, job.output_glob));
  }
  for (const std::string& dir : scratch_dirs) {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }

  if (runs[0].empty() || runs[1].empty()) {
    throw OutputMismatch("output glob matched no files");
  }
  std::vector<std::string> names_a, names_b;
  for (auto& [k, v] : runs[0]) names_a.push_back(k);
  for (auto& [k, v] : runs[1]) names_b.push_back(k);
  if (names_a != names_b) {
    throw OutputMismatch("the two runs produced different output sets");
  }

  report.overall = Verdict::VerifiedBitwise;
  for (const std::string& rel : names_a) {
    VerificationReport r = verify_pair_bytes(as_span(runs[0][rel]), as_span(runs[1][rel]),
                                             policy, rel + " (run 1)", rel + " (run 2)");
    report.overall = weakest(report.overall, r.verdict);
    report.deliverables.emplace_back(rel, std::move(r));
  }
  for (auto& [rel, r] : report.deliverables) {
    for (const std::string& op : r.build_spec.operations) {
      report.build_spec.operations.push_back(rel + ": " + op);
    }
  }
  if (report.build_spec.operations.empty()) {
    report.build_spec.operations.push_back("none");
  }
  return report;
}

}  // namespace verijar::verify
