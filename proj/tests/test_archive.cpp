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

#include "verijar/archive.hpp"

#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "test_util.hpp"
#include "verijar/sha.hpp"

using namespace verijar;
using namespace verijar::archive;

namespace {

PackageModel two_entry_package() {
  return make_package({
      {"b.class", to_bytes("not really a class")},
      {"a.class", to_bytes("also not a class")},
  });
}

}  // namespace

TEST_CASE("empty zip parses to zero entries") {
  Bytes data = testutil::read_file(testutil::data_path("empty.zip"));
  PackageModel pkg = read_package(as_span(data));
  CHECK(pkg.entries.empty());
  CHECK(write_preserving(pkg) == data);
}

TEST_CASE("external corpus preservation round-trip is byte-identical") {
  for (const char* name : {"empty.zip", "small.jar", "stored.zip", "mixed.zip", "bigger.jar"}) {
    CAPTURE(name);
    Bytes data = testutil::read_file(testutil::data_path(name));
    PackageModel pkg = read_package(as_span(data));
    CHECK(write_preserving(pkg) == data);
  }
}

TEST_CASE("payloads decompress and classify") {
  Bytes data = testutil::read_file(testutil::data_path("small.jar"));
  PackageModel pkg = read_package(as_span(data));
  const ArchiveEntry* mf = pkg.find("META-INF/MANIFEST.MF");
  REQUIRE(mf != nullptr);
  CHECK(mf->kind == EntryKind::Manifest);
  CHECK(to_string(as_span(mf->payload)).find("Build-Jdk: 1.8.0_292") != std::string::npos);
  const ArchiveEntry* dir = pkg.find("META-INF/");
  REQUIRE(dir != nullptr);
  CHECK(dir->kind == EntryKind::Directory);
  const ArchiveEntry* props = pkg.find("com/example/app.properties");
  REQUIRE(props != nullptr);
  CHECK(props->kind == EntryKind::Properties);
}

TEST_CASE("bad signature is rejected") {
  Bytes junk = to_bytes("PK\x01\x02 this is not a zip");
  CHECK_THROWS_AS(read_package(as_span(junk)), MalformedArchive);
  Bytes tiny = to_bytes("PK");
  CHECK_THROWS_AS(read_package(as_span(tiny)), MalformedArchive);
}

TEST_CASE("truncated central directory is rejected") {
  Bytes data = testutil::read_file(testutil::data_path("small.jar"));
  // Corrupt the EOCD entry count upward so the directory walk runs off the end.
  Bytes bad = data;
  bad[bad.size() - 12] = 0x40;
  CHECK_THROWS_AS(read_package(as_span(bad)), MalformedArchive);
}

TEST_CASE("canonical write sorts entries and pins times") {
  PackageModel pkg = two_entry_package();
  pkg.entries[0].mtime = DosTime::from_unix(1609459200);  // 2021-01-01
  pkg.entries[1].mtime = DosTime::from_unix(1609462800);
  CanonicalPolicy policy;
  Bytes canon = write_canonical(pkg, policy);
  PackageModel out = read_package(as_span(canon));
  REQUIRE(out.entries.size() == 2);
  CHECK(out.entries[0].name == "a.class");
  CHECK(out.entries[1].name == "b.class");
  CHECK(out.entries[0].mtime == policy.pinned_time);
  CHECK(out.entries[1].mtime == policy.pinned_time);
  CHECK(out.entries[0].extra_field.empty());
}

TEST_CASE("canonical write is idempotent") {
  Bytes data = testutil::read_file(testutil::data_path("small.jar"));
  PackageModel pkg = read_package(as_span(data));
  CanonicalPolicy policy;
  Bytes once = write_canonical(pkg, policy);
  Bytes twice = write_canonical(read_package(as_span(once)), policy);
  CHECK(once == twice);
}

TEST_CASE("packages differing only in order and mtime canonicalize identically") {
  std::vector<std::pair<std::string, Bytes>> files = {
      {"META-INF/MANIFEST.MF", to_bytes("Manifest-Version: 1.0\r\n\r\n")},
      {"Bar.class", to_bytes("bar-bytes")},
      {"Baz.class", to_bytes("baz-bytes")},
  };
  PackageModel a = make_package(files, DosTime::from_unix(1631998003));
  std::vector<std::pair<std::string, Bytes>> swapped = {files[0], files[2], files[1]};
  PackageModel b = make_package(swapped, DosTime::from_unix(1631998135));
  CanonicalPolicy policy;
  Bytes ca = write_canonical(a, policy);
  Bytes cb = write_canonical(b, policy);
  CHECK(ca == cb);
  CHECK(sha256_hex(ca) == sha256_hex(cb));
}

TEST_CASE("canonicalization never changes payload bytes") {
  Bytes data = testutil::read_file(testutil::data_path("mixed.zip"));
  PackageModel pkg = read_package(as_span(data));
  Bytes canon = write_canonical(pkg, CanonicalPolicy{});
  PackageModel out = read_package(as_span(canon));
  for (const ArchiveEntry* e : pkg.logical_entries()) {
    const ArchiveEntry* o = out.find(e->name);
    REQUIRE(o != nullptr);
    CHECK(o->payload == e->payload);
  }
}

TEST_CASE("duplicate entry names keep first and are reported") {
  // Build a doctored archive with the same name twice via write_plain.
  PackageModel pkg = make_package({
      {"dup.txt", to_bytes("first")},
      {"dup.txt", to_bytes("second")},
  });
  Bytes bytes = write_plain(pkg);
  PackageModel parsed = read_package(as_span(bytes));
  REQUIRE(parsed.duplicate_names.size() == 1);
  CHECK(parsed.duplicate_names[0] == "dup.txt");
  auto logical = parsed.logical_entries();
  REQUIRE(logical.size() == 1);
  CHECK(to_string(as_span(logical[0]->payload)) == "first");
  // Preservation still reproduces both entries.
  CHECK(write_preserving(parsed) == bytes);
}

TEST_CASE("streaming entries with data descriptors round-trip") {
  // Hand-assembled archive in the style of Java's ZipOutputStream: local
  // header with bit 3 set and zeroed sizes, a signed data descriptor after
  // the payload, and final values only in the central directory.
  Bytes payload = to_bytes("descriptor-mode payload");
  uint32_t crc = crc32_of(as_span(payload));
  ByteWriter w;
  // local header
  w.u32le(0x04034b50);
  w.u16le(20);      // version needed
  w.u16le(0x0808);  // utf8 + data descriptor
  w.u16le(0);       // stored
  w.u16le(0x7021);  // time
  w.u16le(0x5391);  // date
  w.u32le(0);       // crc unknown at header time
  w.u32le(0);
  w.u32le(0);
  w.u16le(5);
  w.u16le(0);
  w.text("a.txt");
  w.raw(payload);
  // data descriptor with signature
  w.u32le(0x08074b50);
  w.u32le(crc);
  w.u32le(uint32_t(payload.size()));
  w.u32le(uint32_t(payload.size()));
  uint32_t cd_offset = uint32_t(w.size());
  w.u32le(0x02014b50);
  w.u16le(20);
  w.u16le(20);
  w.u16le(0x0808);
  w.u16le(0);
  w.u16le(0x7021);
  w.u16le(0x5391);
  w.u32le(crc);
  w.u32le(uint32_t(payload.size()));
  w.u32le(uint32_t(payload.size()));
  w.u16le(5);
  w.u16le(0);
  w.u16le(0);
  w.u16le(0);
  w.u16le(0);
  w.u32le(0);
  w.u32le(0);  // local offset
  w.text("a.txt");
  uint32_t cd_size = uint32_t(w.size()) - cd_offset;
  w.u32le(0x06054b50);
  w.u16le(0);
  w.u16le(0);
  w.u16le(1);
  w.u16le(1);
  w.u32le(cd_size);
  w.u32le(cd_offset);
  w.u16le(0);
  Bytes data = w.take();

  PackageModel pkg = read_package(as_span(data));
  REQUIRE(pkg.entries.size() == 1);
  CHECK(pkg.entries[0].payload == payload);
  CHECK(write_preserving(pkg) == data);
}

TEST_CASE("encrypted and zip64 archives are rejected") {
  Bytes data = testutil::read_file(testutil::data_path("small.jar"));
  // Locate the first central-directory record and poke its fields.
  size_t cd = 0;
  for (size_t i = 0; i + 4 < data.size(); ++i) {
    if (data[i] == 0x50 && data[i + 1] == 0x4b && data[i + 2] == 0x01 && data[i + 3] == 0x02) {
      cd = i;
      break;
    }
  }
  REQUIRE(cd != 0);
  {
    Bytes enc = data;
    enc[cd + 8] |= 0x01;  // general-purpose bit 0: encrypted
    CHECK_THROWS_AS(read_package(as_span(enc)), MalformedArchive);
  }
  {
    Bytes z64 = data;
    // Compressed size 0xffffffff marks a zip64 entry.
    for (int k = 0; k < 4; ++k) z64[cd + 20 + size_t(k)] = 0xff;
    CHECK_THROWS_AS(read_package(as_span(z64)), MalformedArchive);
  }
}

TEST_CASE("dos time conversion") {
  DosTime t = DosTime::from_unix(0);  // pre-1980 clamps to the minimum
  CHECK(t.date == 0x21);
  CHECK(t.time == 0);
  DosTime u = DosTime::from_unix(1631997803);  // 2021-09-18T20:43:23Z
  CHECK(u.iso() == "2021-09-18T20:43:22");     // 2-second resolution floors
}

TEST_CASE("backslash separators normalize to slash") {
  PackageModel pkg = make_package({{"dir\\file.txt", to_bytes("x")}});
  Bytes bytes = write_plain(pkg);
  PackageModel parsed = read_package(as_span(bytes));
  REQUIRE(parsed.entries.size() == 1);
  CHECK(parsed.entries[0].name == "dir/file.txt");
}
