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

#include "verijar/classcanon.hpp"

#include <algorithm>

#include "doctest.h"
#include "verijar/fixtures.hpp"

using namespace verijar;
using namespace verijar::classfile;
using fixtures::ClassBuilder;
using fixtures::CodeWriter;

namespace {

ClassModel sample_class() {
  ClassBuilder b("com/example/Sample");
  uint16_t init_ref = b.methodref("java/lang/Object", "<init>", "()V");
  CodeWriter cw;
  cw.slot_op(25, 0).cp_op(183, init_ref).plain(177);
  b.add_method(0x0001, "<init>", "()V", b.code_body(1, 1, cw.take()));
  uint16_t close_ref = b.methodref("java/io/InputStream", "close", "()V");
  uint16_t msg = b.string_const("hello");
  CodeWriter mw;
  mw.slot_op(25, 1).cp_op(182, close_ref).cp_op(18, msg).plain(87).plain(177);
  b.add_method(0x0009, "touch", "(Ljava/io/InputStream;)V", b.code_body(2, 2, mw.take()));
  return b.build();
}

std::vector<uint16_t> pool_indices(const ClassModel& m) {
  std::vector<uint16_t> v;
  for (uint16_t i = 1; i < m.pool.size(); ++i) {
    if (!m.pool[i].phantom) v.push_back(i);
  }
  return v;
}

}  // namespace

TEST_CASE("canonical digest is invariant under pool permutation") {
  ClassModel base = sample_class();
  ClassCanonPolicy policy;
  std::string digest = canonicalize_class(base, policy).digest;
  fixtures::Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<uint16_t> order = pool_indices(base);
    rng.shuffle(order);
    PoolPermuteResult r = permute_pool(base, order);
    REQUIRE(r.ok);
    Bytes bytes = serialize_class(r.model);
    ClassModel reparsed = parse_class(as_span(bytes));
    CHECK(canonicalize_class(reparsed, policy).digest == digest);
  }
}

TEST_CASE("digest is invariant under method reorder only with the axis enabled") {
  ClassModel base = sample_class();
  ClassModel swapped = base;
  std::swap(swapped.methods[0], swapped.methods[1]);

  ClassCanonPolicy with;
  with.sort_methods = true;
  CHECK(canonicalize_class(base, with).digest == canonicalize_class(swapped, with).digest);

  ClassCanonPolicy without;
  without.sort_methods = false;
  CHECK(canonicalize_class(base, without).digest !=
        canonicalize_class(swapped, without).digest);
}

TEST_CASE("any payload byte mutation changes the digest") {
  ClassModel base = sample_class();
  ClassCanonPolicy policy;
  std::string digest = canonicalize_class(base, policy).digest;
  // Flip the constant loaded in the touch method.
  ClassModel mutated = base;
  for (CpEntry& e : mutated.pool) {
    if (e.tag == CpTag::Utf8 && to_string(as_span(e.utf8)) == "hello") {
      e.utf8.back() = '!';
    }
  }
  CHECK(canonicalize_class(mutated, policy).digest != digest);
}

TEST_CASE("slot relabeling equates bijectively renumbered locals") {
  fixtures::FixtureSpec spec;
  spec.pattern = patterns::PatternId::P7;
  spec.seed = 11;
  // Pull the two class variants straight out of the generated pair.
  fixtures::FixturePair pair = fixtures::generate_pair(spec);
  // The classes differ; extract them via the archive layer in the diff tests.
  CHECK(pair.a != pair.b);
}

TEST_CASE("rewrite sorts methods and dedups the pool") {
  ClassModel base = sample_class();
  ClassModel messy = base;
  std::swap(messy.methods[0], messy.methods[1]);
  ClassCanonPolicy policy;
  RewriteResult r = rewrite_class(messy, policy);
  CHECK(r.changed);
  CHECK(r.pool_rewritten);
  ClassModel out = parse_class(as_span(r.bytes));
  // Methods ordered by name: <init> before touch.
  CHECK(out.utf8_at(out.methods[0].name_index) == "<init>");
  CHECK(out.utf8_at(out.methods[1].name_index) == "touch");
  // Rewrite never changes the canonical form.
  CHECK(canonicalize_class(out, policy).digest ==
        canonicalize_class(messy, policy).digest);
}

TEST_CASE("rewrite is idempotent") {
  ClassModel base = sample_class();
  ClassCanonPolicy policy;
  RewriteResult once = rewrite_class(base, policy);
  ClassModel mid = parse_class(as_span(once.bytes));
  RewriteResult twice = rewrite_class(mid, policy);
  CHECK(twice.bytes == once.bytes);
  CHECK(!twice.changed);
}

TEST_CASE("rewrite strips LineNumberTable when asked") {
  ClassBuilder b("Lnt");
  uint16_t init_ref = b.methodref("java/lang/Object", "<init>", "()V");
  CodeWriter cw;
  cw.slot_op(25, 0).cp_op(183, init_ref).plain(177);
  ByteWriter lnt;
  lnt.u16be(1);
  lnt.u16be(0);
  lnt.u16be(29);
  auto lnt_attr = b.attr("LineNumberTable", lnt.take());
  b.add_method(0x0001, "<init>", "()V", b.code_body(1, 1, cw.take(), {lnt_attr}));
  ClassModel m = b.build();

  ClassCanonPolicy strip;
  strip.strip_line_numbers = true;
  RewriteResult r = rewrite_class(m, strip);
  CHECK(r.changed);
  ClassModel out = parse_class(as_span(r.bytes));
  ClassCanonPolicy no_strip;
  no_strip.strip_line_numbers = false;
  std::string text = canonicalize_class(out, no_strip).text();
  CHECK(text.find("line ") == std::string::npos);
}

TEST_CASE("pool rewrite aborts on unknown attribute layouts and keeps going") {
  ClassBuilder b("Odd");
  b.add_class_attr("X-Custom-Attr", to_bytes("\x00\x05junk"));
  // Force a non-identity pool mapping so the rewrite must touch the pool.
  b.utf8_dup("zzz");
  b.utf8_dup("zzz");
  ClassModel m = b.build();
  ClassCanonPolicy policy;
  RewriteResult r = rewrite_class(m, policy);
  CHECK(r.pool_aborted);
  CHECK(!r.pool_rewritten);
  // Output still parses; original pool retained.
  ClassModel out = parse_class(as_span(r.bytes));
  CHECK(out.pool.size() == m.pool.size());
}

TEST_CASE("lambda relabeling equates swapped ids with consistent references") {
  fixtures::FixtureSpec spec;
  spec.pattern = patterns::PatternId::P14;
  spec.seed = 3;
  // Direct class-level check through the builder used by the generator.
  // Build both variants and compare canonical forms.
  fixtures::Rng rng(3);
  (void)rng;
  ClassCanonPolicy with;
  with.canon_lambdas = true;
  ClassCanonPolicy without;
  without.canon_lambdas = false;

  // Reconstruct the two variants the way the generator does.
  auto make = [&](bool variant) {
    ClassBuilder b("com/example/L");
    uint16_t init_ref = b.methodref("java/lang/Object", "<init>", "()V");
    CodeWriter cw;
    cw.slot_op(25, 0).cp_op(183, init_ref).plain(177);
    b.add_method(0x0001, "<init>", "()V", b.code_body(1, 1, cw.take()));
    std::string x_name = variant ? "lambda$run$1" : "lambda$run$0";
    std::string y_name = variant ? "lambda$run$0" : "lambda$run$1";
    uint16_t rx = b.methodref("com/example/L", x_name, "()I");
    uint16_t ry = b.methodref("com/example/L", y_name, "()I");
    CodeWriter run;
    run.cp_op(184, rx).cp_op(184, ry).plain(96).plain(172);
    b.add_method(0x0009, "run", "()I", b.code_body(2, 0, run.take()));
    CodeWriter bx;
    bx.plain(16).plain(17).plain(172);  // bipush 17
    b.add_method(0x100a, x_name, "()I", b.code_body(1, 0, bx.take()));
    CodeWriter by;
    by.plain(16).plain(99).plain(172);  // bipush 99
    b.add_method(0x100a, y_name, "()I", b.code_body(1, 0, by.take()));
    return b.build();
  };
  ClassModel a = make(false);
  ClassModel bb = make(true);
  CHECK(canonicalize_class(a, with).digest == canonicalize_class(bb, with).digest);
  CHECK(canonicalize_class(a, without).digest != canonicalize_class(bb, without).digest);
}
