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
// Index-free canonical forms for class files and best-effort byte-level
// rewriting. The canonical form replaces every constant-pool reference with
// its recursively resolved value and normalizes the orderings that vary
// across builds, so two class files compare equal exactly when they differ
// only along the enabled axes.

#ifndef VERIJAR_CLASSCANON_HPP_
#define VERIJAR_CLASSCANON_HPP_

#include <string>
#include <vector>

#include "verijar/classfile.hpp"

namespace verijar::classfile {

struct ClassCanonPolicy {
  bool dedup_pool = true;          // pool dedup + deterministic sort (rewrite only)
  bool sort_methods = true;        // order methods by (name bytes, descriptor bytes)
  bool sort_inner_classes = true;  // order InnerClasses entries by inner name
  bool relabel_slots = true;       // renumber non-parameter locals by first use
  bool strip_line_numbers = false; // drop LineNumberTable
  bool canon_lambdas = false;      // relabel lambda$<m>$<k> by body content

  static ClassCanonPolicy all_axes() {
    return ClassCanonPolicy{true, true, true, true, true, true};
  }
  static ClassCanonPolicy none() {
    return ClassCanonPolicy{false, false, false, false, false, false};
  }
};

struct CanonicalClassForm {
  std::vector<std::string> lines;  // the defined serialization, one node per line
  std::vector<std::string> loci;   // structural path of each line
  std::string digest;              // sha256 of lines joined with '\n'
  std::vector<std::string> notes;  // fallbacks taken while building the form
  bool lambda_converged = true;

  std::string text() const;
};

CanonicalClassForm canonicalize_class(const ClassModel& model,
                                      const ClassCanonPolicy& policy);

struct RewriteResult {
  Bytes bytes;
  bool changed = false;          // bytes differ from the input serialization
  bool pool_rewritten = false;   // dedup+sort pass completed
  bool pool_aborted = false;     // pool pass attempted but abandoned
  std::vector<std::string> notes;
};

// Emits a structurally valid class file with methods reordered, InnerClasses
// sorted, LineNumberTable optionally stripped, and the constant pool
// deduplicated and sorted with all references rewritten. If any single-byte
// ldc operand would exceed index 255 after mapping, or an attribute with
// unknown reference layout is present, the pool pass is abandoned and the
// original pool retained (noted in the result).
RewriteResult rewrite_class(const ClassModel& model, const ClassCanonPolicy& policy);

struct PoolPermuteResult {
  ClassModel model;
  bool ok = false;
  std::string note;
};

// Rebuilds the class with pool entries rearranged per new_order (old
// non-phantom indices in their new sequence); every reference, including
// bytecode operands, is rewritten. Used by fixtures and permutation tests.
PoolPermuteResult permute_pool(const ClassModel& model,
                               const std::vector<uint16_t>& new_order);

// One "#index = tag payload" line per non-phantom pool entry, with
// references resolved. Used for evidence excerpts.
std::vector<std::string> pool_dump(const ClassModel& model);

}  // namespace verijar::classfile

#endif  // VERIJAR_CLASSCANON_HPP_
