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

#include "verijar/classfile.hpp"

#include "doctest.h"
#include "verijar/fixtures.hpp"

using namespace verijar;
using namespace verijar::classfile;

namespace {

ClassModel minimal_class() {
  fixtures::ClassBuilder b("Min");
  return b.build();
}

}  // namespace

TEST_CASE("minimal class round-trips and has no members") {
  Bytes bytes = serialize_class(minimal_class());
  ClassModel m = parse_class(as_span(bytes));
  CHECK(m.fields.empty());
  CHECK(m.methods.empty());
  CHECK(m.this_class_name() == "Min");
  CHECK(serialize_class(m) == bytes);
}

TEST_CASE("bad magic is rejected") {
  Bytes bytes = serialize_class(minimal_class());
  bytes[3] = 0xbf;  // 0xCAFEBABF
  CHECK_THROWS_AS(parse_class(as_span(bytes)), MalformedClass);
}

TEST_CASE("unsupported version is rejected") {
  Bytes bytes = serialize_class(minimal_class());
  bytes[6] = 0;
  bytes[7] = 62;  // beyond Java 17
  CHECK_THROWS_AS(parse_class(as_span(bytes)), MalformedClass);
}

TEST_CASE("truncated attribute is rejected") {
  fixtures::ClassBuilder b("Trunc");
  b.add_class_attr("SourceFile", [&] {
    ByteWriter w;
    w.u16be(b.utf8("A.java"));
    return w.take();
  }());
  Bytes bytes = serialize_class(b.build());
  // Lengthen the final attribute beyond the input.
  bytes[bytes.size() - 3] = 0x40;
  CHECK_THROWS_AS(parse_class(as_span(bytes)), MalformedClass);
}

TEST_CASE("trailing bytes are rejected") {
  Bytes bytes = serialize_class(minimal_class());
  bytes.push_back(0);
  CHECK_THROWS_AS(parse_class(as_span(bytes)), MalformedClass);
}

TEST_CASE("index pointing at the wrong tag is rejected") {
  ClassModel m = minimal_class();
  m.this_class = 1;  // a Utf8, not a Class
  Bytes bytes = serialize_class(m);
  CHECK_THROWS_AS(parse_class(as_span(bytes)), MalformedClass);
}

TEST_CASE("duplicate member name+descriptor is rejected") {
  fixtures::ClassBuilder b("Dup");
  b.add_field(0x0002, "x", "I");
  b.add_field(0x0002, "x", "I");
  Bytes bytes = serialize_class(b.build());
  CHECK_THROWS_AS(parse_class(as_span(bytes)), MalformedClass);
}

TEST_CASE("long constants occupy two pool slots") {
  fixtures::ClassBuilder b("Longs");
  uint16_t l1 = b.long_const(1234567890123LL);
  uint16_t s1 = b.string_const("after-long");
  // The long occupies l1 and l1+1; the string's utf8 lands at l1+2.
  CHECK(s1 == l1 + 3);
  Bytes bytes = serialize_class(b.build());
  ClassModel m = parse_class(as_span(bytes));
  CHECK(m.cp(l1).tag == CpTag::Long);
  CHECK(m.pool[l1 + 1].phantom);
  CHECK(m.cp(s1).tag == CpTag::String);
  CHECK(serialize_class(m) == bytes);
}

TEST_CASE("random synthetic classes round-trip byte-exactly") {
  fixtures::Rng rng(424242);
  for (int i = 0; i < 50; ++i) {
    ClassModel m = fixtures::random_class(rng, "gen/Cls" + std::to_string(i),
                                          2 + int(rng.below(4)), 8);
    Bytes bytes = serialize_class(m);
    ClassModel parsed = parse_class(as_span(bytes));
    CHECK(serialize_class(parsed) == bytes);
  }
}

TEST_CASE("param_slot_count handles wide and array types") {
  CHECK(param_slot_count("()V", true) == 0);
  CHECK(param_slot_count("()V", false) == 1);
  CHECK(param_slot_count("(IJ)V", true) == 3);
  CHECK(param_slot_count("(JD)V", false) == 5);
  CHECK(param_slot_count("([J[D)V", true) == 2);
  CHECK(param_slot_count("(Ljava/lang/String;I)V", true) == 2);
  CHECK(param_slot_count("([[Ljava/lang/String;)V", true) == 1);
}
