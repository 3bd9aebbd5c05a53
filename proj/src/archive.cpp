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

#include <zlib.h>

#include <algorithm>
#include <cstring>
#include <ctime>
#include <map>
#include <set>

#include "verijar/sha.hpp"

namespace verijar::archive {

namespace {

constexpr uint32_t kLocalSig = 0x04034b50;
constexpr uint32_t kCentralSig = 0x02014b50;
constexpr uint32_t kEocdSig = 0x06054b50;
constexpr uint32_t kDescriptorSig = 0x08074b50;
constexpr uint32_t kZip64EocdSig = 0x06064b50;
constexpr uint32_t kZip64LocatorSig = 0x07064b50;

constexpr uint16_t kFlagEncrypted = 0x0001;
constexpr uint16_t kFlagDescriptor = 0x0008;

constexpr size_t kEocdMinSize = 22;

bool has_suffix(std::string_view s, std::string_view suffix) {
  if (s.size() < suffix.size()) return false;
  for (size_t i = 0; i < suffix.size(); ++i) {
    char a = s[s.size() - suffix.size() + i];
    char b = suffix[i];
    if (a >= 'A' && a <= 'Z') a = char(a - 'A' + 'a');
    if (a != b) return false;
  }
  return true;
}

std::string normalize_name(ByteSpan raw) {
  std::string name(raw.begin(), raw.end());
  std::replace(name.begin(), name.end(), '\\', '/');
  return name;
}

}  // namespace

const char* kind_name(EntryKind k) {
  switch (k) {
    case EntryKind::ClassFile: return "class";
    case EntryKind::Manifest: return "manifest";
    case EntryKind::Properties: return "properties";
    case EntryKind::Xml: return "xml";
    case EntryKind::Json: return "json";
    case EntryKind::Text: return "text";
    case EntryKind::Directory: return "directory";
    case EntryKind::Opaque: return "opaque";
  }
  return "opaque";
}

DosTime DosTime::from_unix(int64_t epoch_seconds) {
  time_t t = time_t(epoch_seconds);
  struct tm tm_buf;
  gmtime_r(&t, &tm_buf);
  int year = tm_buf.tm_year + 1900;
  if (year < 1980) return DosTime{0, 0x21};
  if (year > 2107) year = 2107;
  DosTime d;
  d.date = uint16_t(((year - 1980) << 9) | ((tm_buf.tm_mon + 1) << 5) | tm_buf.tm_mday);
  d.time = uint16_t((tm_buf.tm_hour << 11) | (tm_buf.tm_min << 5) | (tm_buf.tm_sec / 2));
  return d;
}

std::string DosTime::iso() const {
  char buf[24];
  snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d",
           ((date >> 9) & 0x7f) + 1980, (date >> 5) & 0x0f, date & 0x1f,
           (time >> 11) & 0x1f, (time >> 5) & 0x3f, (time & 0x1f) * 2);
  return buf;
}

EntryKind classify_kind(std::string_view name, ByteSpan payload) {
  if (!name.empty() && name.back() == '/') return EntryKind::Directory;
  if (payload.size() >= 4 && payload[0] == 0xca && payload[1] == 0xfe &&
      payload[2] == 0xba && payload[3] == 0xbe) {
    return EntryKind::ClassFile;
  }
  if (has_suffix(name, ".mf")) return EntryKind::Manifest;
  if (has_suffix(name, ".properties")) return EntryKind::Properties;
  if (has_suffix(name, ".xml") || has_suffix(name, ".pom")) return EntryKind::Xml;
  if (has_suffix(name, ".json")) return EntryKind::Json;
  static const char* kTextSuffixes[] = {".txt",  ".text", ".html", ".htm",
                                        ".md",   ".java", ".jsp",  ".css",
                                        ".list", ".csv",  ".yaml", ".yml"};
  for (const char* suf : kTextSuffixes) {
    if (has_suffix(name, suf)) return EntryKind::Text;
  }
  if (has_suffix(name, "package-list") || has_suffix(name, "element-list")) {
    return EntryKind::Text;
  }
  return EntryKind::Opaque;
}

bool looks_like_zip(ByteSpan bytes) {
  if (bytes.size() < 4) return false;
  uint32_t sig = uint32_t(bytes[0]) | uint32_t(bytes[1]) << 8 |
                 uint32_t(bytes[2]) << 16 | uint32_t(bytes[3]) << 24;
  return sig == kLocalSig || sig == kEocdSig;
}

Bytes deflate_raw(ByteSpan data, int level) {
  z_stream strm;
  std::memset(&strm, 0, sizeof(strm));
  if (deflateInit2(&strm, level, Z_DEFLATED, -15, 8, Z_DEFAULT_STRATEGY) != Z_OK) {
    throw Error("deflateInit2 failed");
  }
  Bytes out(deflateBound(&strm, uLong(data.size())));
  strm.next_in = const_cast<Bytef*>(data.data());
  strm.avail_in = uInt(data.size());
  strm.next_out = out.data();
  strm.avail_out = uInt(out.size());
  int rc = deflate(&strm, Z_FINISH);
  if (rc != Z_STREAM_END) {
    deflateEnd(&strm);
    throw Error("deflate failed");
  }
  out.resize(strm.total_out);
  deflateEnd(&strm);
  return out;
}

Bytes inflate_raw(ByteSpan data, size_t expected_size) {
  z_stream strm;
  std::memset(&strm, 0, sizeof(strm));
  if (inflateInit2(&strm, -15) != Z_OK) throw Error("inflateInit2 failed");
  Bytes out(expected_size);
  strm.next_in = const_cast<Bytef*>(data.data());
  strm.avail_in = uInt(data.size());
  strm.next_out = out.data();
  strm.avail_out = uInt(out.size());
  int rc = inflate(&strm, Z_FINISH);
  bool ok = (rc == Z_STREAM_END && strm.total_out == expected_size);
  // An empty deflate stream for an empty payload ends with Z_OK on some
  // zlib paths; accept exact-size completion.
  if (!ok && expected_size == 0 && strm.total_out == 0 &&
      (rc == Z_STREAM_END || rc == Z_BUF_ERROR || rc == Z_OK)) {
    ok = true;
  }
  inflateEnd(&strm);
  if (!ok) throw MalformedArchive("entry payload failed to decompress");
  return out;
}

uint32_t crc32_of(ByteSpan data) {
  return uint32_t(::crc32(0L, data.data(), uInt(data.size())));
}

std::vector<const ArchiveEntry*> PackageModel::logical_entries() const {
  std::vector<const ArchiveEntry*> out;
  std::set<std::string> seen;
  for (const ArchiveEntry& e : entries) {
    if (seen.insert(e.name).second) out.push_back(&e);
  }
  return out;
}

const ArchiveEntry* PackageModel::find(std::string_view name) const {
  for (const ArchiveEntry& e : entries) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

namespace {

size_t find_eocd(ByteSpan bytes) {
  if (bytes.size() < kEocdMinSize) throw MalformedArchive("input shorter than an empty archive");
  size_t max_back = std::min(bytes.size(), kEocdMinSize + size_t(0xffff));
  for (size_t back = kEocdMinSize; back <= max_back; ++back) {
    size_t pos = bytes.size() - back;
    if (bytes[pos] == 0x50 && bytes[pos + 1] == 0x4b && bytes[pos + 2] == 0x05 &&
        bytes[pos + 3] == 0x06) {
      return pos;
    }
  }
  throw MalformedArchive("end-of-central-directory record not found");
}

void reject_zip64_extra(const Bytes& extra) {
  ByteReader r(as_span(extra));
  while (r.remaining() >= 4) {
    uint16_t id = r.u16le();
    uint16_t len = r.u16le();
    if (len > r.remaining()) return;  // malformed extra; preserved verbatim
    if (id == 0x0001) throw MalformedArchive("zip64 archives are not supported");
    r.skip(len);
  }
}

}  // namespace

PackageModel read_package(ByteSpan bytes, std::string origin_path) {
  try {
    if (!looks_like_zip(bytes)) {
      throw MalformedArchive("input does not start with a zip signature");
    }
    PackageModel pkg;
    pkg.origin_path = std::move(origin_path);
    pkg.original_size = bytes.size();
    pkg.sha1 = sha1_hex(bytes);
    pkg.sha256 = sha256_hex(bytes);
    pkg.has_raw = true;

    size_t eocd_pos = find_eocd(bytes);
    if (eocd_pos >= 20) {
      ByteReader loc(bytes, eocd_pos - 20);
      if (loc.u32le() == kZip64LocatorSig) {
        throw MalformedArchive("zip64 archives are not supported");
      }
    }
    ByteReader er(bytes, eocd_pos + 4);
    pkg.eocd_disk = er.u16le();
    pkg.eocd_cd_disk = er.u16le();
    pkg.eocd_disk_entries = er.u16le();
    pkg.eocd_total_entries = er.u16le();
    pkg.eocd_cd_size = er.u32le();
    pkg.eocd_cd_offset = er.u32le();
    uint16_t comment_len = er.u16le();
    pkg.eocd_comment = er.take_bytes(comment_len);
    pkg.trailing = Bytes(bytes.begin() + er.pos(), bytes.end());

    if (pkg.eocd_disk != 0 || pkg.eocd_cd_disk != 0 ||
        pkg.eocd_disk_entries != pkg.eocd_total_entries) {
      throw MalformedArchive("multi-disk archives are not supported");
    }
    if (pkg.eocd_total_entries == 0xffff || pkg.eocd_cd_size == 0xffffffff ||
        pkg.eocd_cd_offset == 0xffffffff) {
      throw MalformedArchive("zip64 archives are not supported");
    }
    if (size_t(pkg.eocd_cd_offset) + pkg.eocd_cd_size > eocd_pos) {
      throw MalformedArchive("central directory extends past its end record");
    }

    // Central directory.
    ByteReader cr(bytes, pkg.eocd_cd_offset);
    pkg.entries.reserve(pkg.eocd_total_entries);
    std::set<std::string> seen_names;
    for (uint16_t i = 0; i < pkg.eocd_total_entries; ++i) {
      if (cr.u32le() != kCentralSig) {
        throw MalformedArchive("truncated or corrupt central directory");
      }
      ArchiveEntry e;
      CentralRec& c = e.central;
      c.version_made_by = cr.u16le();
      c.version_needed = cr.u16le();
      c.flags = cr.u16le();
      c.method = cr.u16le();
      c.mod_time = cr.u16le();
      c.mod_date = cr.u16le();
      c.crc32 = cr.u32le();
      c.comp_size = cr.u32le();
      c.uncomp_size = cr.u32le();
      uint16_t name_len = cr.u16le();
      uint16_t extra_len = cr.u16le();
      uint16_t cmt_len = cr.u16le();
      c.disk_start = cr.u16le();
      c.internal_attrs = cr.u16le();
      c.external_attrs = cr.u32le();
      c.local_offset = cr.u32le();
      c.name = cr.take_bytes(name_len);
      c.extra = cr.take_bytes(extra_len);
      c.comment = cr.take_bytes(cmt_len);

      if (c.flags & kFlagEncrypted) throw MalformedArchive("encrypted entries are not supported");
      if (c.disk_start != 0) throw MalformedArchive("multi-disk archives are not supported");
      if (c.comp_size == 0xffffffff || c.uncomp_size == 0xffffffff ||
          c.local_offset == 0xffffffff) {
        throw MalformedArchive("zip64 archives are not supported");
      }
      reject_zip64_extra(c.extra);
      if (c.method != 0 && c.method != 8) {
        throw MalformedArchive("unsupported compression method");
      }

      e.name = normalize_name(as_span(c.name));
      e.compression = c.method == 0 ? Compression::Stored : Compression::Deflated;
      e.mtime = DosTime{c.mod_time, c.mod_date};
      e.external_attrs = c.external_attrs;
      e.extra_field = c.extra;
      e.has_raw = true;
      if (!seen_names.insert(e.name).second) pkg.duplicate_names.push_back(e.name);
      pkg.entries.push_back(std::move(e));
    }
    if (cr.pos() != size_t(pkg.eocd_cd_offset) + pkg.eocd_cd_size) {
      throw MalformedArchive("central directory size does not match its records");
    }
    pkg.gap_before_eocd = Bytes(bytes.begin() + cr.pos(), bytes.begin() + eocd_pos);

    // Local headers + payloads, visited in offset order for gap accounting.
    std::vector<size_t> by_offset(pkg.entries.size());
    for (size_t i = 0; i < by_offset.size(); ++i) by_offset[i] = i;
    std::sort(by_offset.begin(), by_offset.end(), [&](size_t a, size_t b) {
      return pkg.entries[a].central.local_offset < pkg.entries[b].central.local_offset;
    });

    size_t cursor = 0;
    for (size_t idx : by_offset) {
      ArchiveEntry& e = pkg.entries[idx];
      const CentralRec& c = e.central;
      if (c.local_offset < cursor) {
        throw MalformedArchive("overlapping local entries");
      }
      e.local.gap_before =
          Bytes(bytes.begin() + cursor, bytes.begin() + c.local_offset);
      ByteReader lr(bytes, c.local_offset);
      if (lr.u32le() != kLocalSig) throw MalformedArchive("missing local file header");
      LocalRec& l = e.local;
      l.offset = c.local_offset;
      l.version_needed = lr.u16le();
      l.flags = lr.u16le();
      l.method = lr.u16le();
      l.mod_time = lr.u16le();
      l.mod_date = lr.u16le();
      l.crc32 = lr.u32le();
      l.comp_size = lr.u32le();
      l.uncomp_size = lr.u32le();
      uint16_t name_len = lr.u16le();
      uint16_t extra_len = lr.u16le();
      l.name = lr.take_bytes(name_len);
      l.extra = lr.take_bytes(extra_len);
      if (l.method != c.method) throw MalformedArchive("local/central compression mismatch");
      reject_zip64_extra(l.extra);

      // With a data descriptor the local sizes may be zero; the central
      // directory always carries the final values.
      size_t comp_size = c.comp_size;
      e.raw_compressed = lr.take_bytes(comp_size);
      if (l.flags & kFlagDescriptor) {
        size_t desc_len = 12;
        if (lr.remaining() >= 4) {
          ByteReader peek(bytes, lr.pos());
          if (peek.u32le() == kDescriptorSig) desc_len = 16;
        }
        l.descriptor = lr.take_bytes(desc_len);
      }
      cursor = lr.pos();

      if (c.method == 0) {
        if (c.comp_size != c.uncomp_size) {
          throw MalformedArchive("stored entry with mismatched sizes");
        }
        e.payload = e.raw_compressed;
      } else {
        e.payload = inflate_raw(as_span(e.raw_compressed), c.uncomp_size);
      }
      if (crc32_of(as_span(e.payload)) != c.crc32) {
        throw MalformedArchive("entry payload fails CRC check");
      }
      e.kind = classify_kind(e.name, as_span(e.payload));
    }
    pkg.gap_before_central =
        Bytes(bytes.begin() + cursor, bytes.begin() + pkg.eocd_cd_offset);
    return pkg;
  } catch (const TruncatedInput&) {
    throw MalformedArchive("truncated archive");
  }
}

namespace {

void write_local(ByteWriter& w, const LocalRec& l) {
  w.u32le(kLocalSig);
  w.u16le(l.version_needed);
  w.u16le(l.flags);
  w.u16le(l.method);
  w.u16le(l.mod_time);
  w.u16le(l.mod_date);
  w.u32le(l.crc32);
  w.u32le(l.comp_size);
  w.u32le(l.uncomp_size);
  w.u16le(uint16_t(l.name.size()));
  w.u16le(uint16_t(l.extra.size()));
  w.raw(l.name);
  w.raw(l.extra);
}

void write_central(ByteWriter& w, const CentralRec& c) {
  w.u32le(kCentralSig);
  w.u16le(c.version_made_by);
  w.u16le(c.version_needed);
  w.u16le(c.flags);
  w.u16le(c.method);
  w.u16le(c.mod_time);
  w.u16le(c.mod_date);
  w.u32le(c.crc32);
  w.u32le(c.comp_size);
  w.u32le(c.uncomp_size);
  w.u16le(uint16_t(c.name.size()));
  w.u16le(uint16_t(c.extra.size()));
  w.u16le(uint16_t(c.comment.size()));
  w.u16le(c.disk_start);
  w.u16le(c.internal_attrs);
  w.u32le(c.external_attrs);
  w.u32le(c.local_offset);
  w.raw(c.name);
  w.raw(c.extra);
  w.raw(c.comment);
}

void write_eocd(ByteWriter& w, uint16_t entries, uint32_t cd_size, uint32_t cd_offset,
                const Bytes& comment) {
  w.u32le(kEocdSig);
  w.u16le(0);
  w.u16le(0);
  w.u16le(entries);
  w.u16le(entries);
  w.u32le(cd_size);
  w.u32le(cd_offset);
  w.u16le(uint16_t(comment.size()));
  w.raw(comment);
}

}  // namespace

Bytes write_preserving(const PackageModel& pkg) {
  if (!pkg.has_raw) throw Error("preservation output requires a parsed package");
  ByteWriter w;
  std::vector<const ArchiveEntry*> by_offset;
  by_offset.reserve(pkg.entries.size());
  for (const ArchiveEntry& e : pkg.entries) by_offset.push_back(&e);
  std::sort(by_offset.begin(), by_offset.end(), [](const ArchiveEntry* a, const ArchiveEntry* b) {
    return a->central.local_offset < b->central.local_offset;
  });
  for (const ArchiveEntry* e : by_offset) {
    w.raw(e->local.gap_before);
    write_local(w, e->local);
    w.raw(e->raw_compressed);
    w.raw(e->local.descriptor);
  }
  w.raw(pkg.gap_before_central);
  for (const ArchiveEntry& e : pkg.entries) write_central(w, e.central);
  w.raw(pkg.gap_before_eocd);
  write_eocd(w, pkg.eocd_total_entries, pkg.eocd_cd_size, pkg.eocd_cd_offset,
             pkg.eocd_comment);
  // write_eocd recomputes nothing: emit the stored values verbatim.
  Bytes out = w.take();
  return out;
}

namespace {

struct PackedEntry {
  const ArchiveEntry* src;
  Bytes compressed;
  Compression method;
  uint32_t crc;
  uint32_t local_offset;
};

Bytes write_fresh(const std::vector<const ArchiveEntry*>& order, DosTime mtime,
                  bool per_entry_mtime, int level) {
  if (order.size() > 0xfffe) throw MalformedArchive("too many entries for a non-zip64 archive");
  ByteWriter w;
  std::vector<PackedEntry> packed;
  packed.reserve(order.size());
  for (const ArchiveEntry* e : order) {
    PackedEntry p;
    p.src = e;
    p.method = e->is_directory() ? Compression::Stored : Compression::Deflated;
    if (p.method == Compression::Deflated) {
      p.compressed = deflate_raw(as_span(e->payload), level);
    } else {
      p.compressed = e->payload;
    }
    p.crc = crc32_of(as_span(e->payload));
    p.local_offset = uint32_t(w.size());

    LocalRec l;
    l.version_needed = p.method == Compression::Deflated ? 20 : 10;
    l.flags = 0;
    l.method = p.method == Compression::Deflated ? 8 : 0;
    DosTime t = per_entry_mtime ? e->mtime : mtime;
    l.mod_time = t.time;
    l.mod_date = t.date;
    l.crc32 = p.crc;
    l.comp_size = uint32_t(p.compressed.size());
    l.uncomp_size = uint32_t(e->payload.size());
    l.name = to_bytes(e->name);
    write_local(w, l);
    w.raw(p.compressed);
    packed.push_back(std::move(p));
  }
  uint32_t cd_offset = uint32_t(w.size());
  for (const PackedEntry& p : packed) {
    CentralRec c;
    c.version_made_by = 20;
    c.version_needed = p.method == Compression::Deflated ? 20 : 10;
    c.flags = 0;
    c.method = p.method == Compression::Deflated ? 8 : 0;
    DosTime t = per_entry_mtime ? p.src->mtime : mtime;
    c.mod_time = t.time;
    c.mod_date = t.date;
    c.crc32 = p.crc;
    c.comp_size = uint32_t(p.compressed.size());
    c.uncomp_size = uint32_t(p.src->payload.size());
    c.internal_attrs = 0;
    c.external_attrs = p.src->is_directory() ? 0x10 : 0;
    c.local_offset = p.local_offset;
    c.name = to_bytes(p.src->name);
    write_central(w, c);
  }
  uint32_t cd_size = uint32_t(w.size()) - cd_offset;
  write_eocd(w, uint16_t(order.size()), cd_size, cd_offset, Bytes{});
  return w.take();
}

}  // namespace

Bytes write_canonical(const PackageModel& pkg, const CanonicalPolicy& policy) {
  std::vector<const ArchiveEntry*> order = pkg.logical_entries();
  std::sort(order.begin(), order.end(), [](const ArchiveEntry* a, const ArchiveEntry* b) {
    return std::lexicographical_compare(
        a->name.begin(), a->name.end(), b->name.begin(), b->name.end(),
        [](char x, char y) { return uint8_t(x) < uint8_t(y); });
  });
  return write_fresh(order, policy.pinned_time, /*per_entry_mtime=*/false,
                     policy.deflate_level);
}

Bytes write_plain(const PackageModel& pkg, int deflate_level) {
  std::vector<const ArchiveEntry*> order;
  order.reserve(pkg.entries.size());
  for (const ArchiveEntry& e : pkg.entries) order.push_back(&e);
  return write_fresh(order, DosTime{}, /*per_entry_mtime=*/true, deflate_level);
}

PackageModel make_package(const std::vector<std::pair<std::string, Bytes>>& files,
                          DosTime mtime) {
  PackageModel pkg;
  for (const auto& [name, payload] : files) {
    ArchiveEntry e;
    e.name = name;
    e.payload = payload;
    e.kind = classify_kind(name, as_span(payload));
    e.mtime = mtime;
    e.compression = e.is_directory() ? Compression::Stored : Compression::Deflated;
    pkg.entries.push_back(std::move(e));
  }
  return pkg;
}

}  // namespace verijar::archive
