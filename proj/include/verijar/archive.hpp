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
// ZIP/JAR container handling: parse deliverable packages into a model that
// round-trips byte-exactly, and write them back either preserving the
// original layout or in a canonical deterministic layout (sorted entries,
// pinned timestamps, fixed compression).

#ifndef VERIJAR_ARCHIVE_HPP_
#define VERIJAR_ARCHIVE_HPP_

#include <compare>
#include <optional>
#include <string>
#include <vector>

#include "verijar/common.hpp"

namespace verijar::archive {

enum class EntryKind {
  ClassFile,
  Manifest,
  Properties,
  Xml,
  Json,
  Text,
  Directory,
  Opaque,
};

const char* kind_name(EntryKind k);

enum class Compression { Stored, Deflated };

// MS-DOS timestamp as stored in zip headers (2-second resolution).
struct DosTime {
  uint16_t time = 0;
  uint16_t date = 0x21;  // 1980-01-01, the minimum representable date

  static DosTime from_unix(int64_t epoch_seconds);
  std::string iso() const;
  auto operator<=>(const DosTime&) const = default;
};

// Raw header fields captured at parse time so preservation-mode output can
// reproduce the input byte for byte. Values are stored exactly as read.
struct LocalRec {
  uint16_t version_needed = 20;
  uint16_t flags = 0;
  uint16_t method = 8;
  uint16_t mod_time = 0;
  uint16_t mod_date = 0x21;
  uint32_t crc32 = 0;
  uint32_t comp_size = 0;
  uint32_t uncomp_size = 0;
  Bytes name;
  Bytes extra;
  Bytes descriptor;  // optional trailing data descriptor, raw
  uint64_t offset = 0;
  Bytes gap_before;  // unclaimed bytes preceding this local header
};

struct CentralRec {
  uint16_t version_made_by = 20;
  uint16_t version_needed = 20;
  uint16_t flags = 0;
  uint16_t method = 8;
  uint16_t mod_time = 0;
  uint16_t mod_date = 0x21;
  uint32_t crc32 = 0;
  uint32_t comp_size = 0;
  uint32_t uncomp_size = 0;
  uint16_t disk_start = 0;
  uint16_t internal_attrs = 0;
  uint32_t external_attrs = 0;
  uint32_t local_offset = 0;
  Bytes name;
  Bytes extra;
  Bytes comment;
};

struct ArchiveEntry {
  std::string name;  // central-directory name with '\' normalized to '/'
  EntryKind kind = EntryKind::Opaque;
  Bytes payload;  // decompressed
  Compression compression = Compression::Deflated;
  DosTime mtime;
  uint32_t external_attrs = 0;
  Bytes extra_field;  // central-directory extra field

  Bytes raw_compressed;
  LocalRec local;
  CentralRec central;
  bool has_raw = false;  // true when parsed from real bytes

  bool is_directory() const { return kind == EntryKind::Directory; }
};

struct PackageModel {
  std::vector<ArchiveEntry> entries;  // central-directory order
  std::string sha1;
  std::string sha256;
  std::string origin_path;
  size_t original_size = 0;

  // Names that collided after separator normalization; the first entry wins
  // in the logical view, later ones are kept only for preservation output.
  std::vector<std::string> duplicate_names;

  // Layout oddities captured for preservation mode.
  Bytes gap_before_central;
  Bytes gap_before_eocd;
  Bytes trailing;

  // EOCD fields as read.
  uint16_t eocd_disk = 0;
  uint16_t eocd_cd_disk = 0;
  uint16_t eocd_disk_entries = 0;
  uint16_t eocd_total_entries = 0;
  uint32_t eocd_cd_size = 0;
  uint32_t eocd_cd_offset = 0;
  Bytes eocd_comment;
  bool has_raw = false;

  // First-wins view over normalized names, in central-directory order.
  std::vector<const ArchiveEntry*> logical_entries() const;
  const ArchiveEntry* find(std::string_view name) const;
};

struct CanonicalPolicy {
  DosTime pinned_time;       // default: minimum DOS time
  int deflate_level = 6;     // fixed level, fixed strategy
  // v1 supports a single sort key: byte-wise ascending entry name.
  std::string sort_key = "name";
};

// Parses a zip/jar. Entries appear in central-directory order with payloads
// decompressed. Rejects zip64, encrypted, multi-disk and non-deflate/store
// archives.
PackageModel read_package(ByteSpan bytes, std::string origin_path = "");

// Reconstructs the original bytes from a parsed model. Only valid for models
// produced by read_package.
Bytes write_preserving(const PackageModel& pkg);

// Deterministic repack: logical entries sorted by name bytes, mtimes pinned,
// extra fields and comments stripped, fixed compression. Payload bytes are
// never modified.
Bytes write_canonical(const PackageModel& pkg, const CanonicalPolicy& policy);

// Deterministic writer that keeps the model's entry order and per-entry
// mtimes. Used to synthesize archives (fixtures, tests).
Bytes write_plain(const PackageModel& pkg, int deflate_level = 6);

// Builds a synthetic in-memory package from (name, payload) pairs.
PackageModel make_package(const std::vector<std::pair<std::string, Bytes>>& files,
                          DosTime mtime = DosTime{});

EntryKind classify_kind(std::string_view name, ByteSpan payload);

bool looks_like_zip(ByteSpan bytes);

Bytes deflate_raw(ByteSpan data, int level);
Bytes inflate_raw(ByteSpan data, size_t expected_size);
uint32_t crc32_of(ByteSpan data);

}  // namespace verijar::archive

#endif  // VERIJAR_ARCHIVE_HPP_
