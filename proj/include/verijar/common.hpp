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

#ifndef VERIJAR_COMMON_HPP_
#define VERIJAR_COMMON_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace verijar {

using Bytes = std::vector<uint8_t>;
using ByteSpan = std::span<const uint8_t>;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MalformedArchive : Error {
  using Error::Error;
};
struct MalformedClass : Error {
  using Error::Error;
};
struct MalformedManifest : Error {
  using Error::Error;
};
struct RuleError : Error {
  using Error::Error;
};
struct InputUnreadable : Error {
  using Error::Error;
};
struct BuildCommandFailed : Error {
  using Error::Error;
};
struct OutputMismatch : Error {
  using Error::Error;
};
struct UsageError : Error {
  using Error::Error;
};

// Thrown by ByteReader on out-of-range reads; parser entry points translate
// it into the format-specific error type.
struct TruncatedInput : Error {
  using Error::Error;
};

inline Bytes to_bytes(std::string_view s) {
  return Bytes(s.begin(), s.end());
}

inline std::string to_string(ByteSpan b) {
  return std::string(b.begin(), b.end());
}

inline ByteSpan as_span(const Bytes& b) {
  return ByteSpan(b.data(), b.size());
}

inline ByteSpan as_span(std::string_view s) {
  return ByteSpan(reinterpret_cast<const uint8_t*>(s.data()), s.size());
}

std::string hex(ByteSpan data);
std::string printable_ascii(ByteSpan data, size_t limit);

class ByteReader {
 public:
  explicit ByteReader(ByteSpan data, size_t pos = 0) : data_(data), pos_(pos) {}

  size_t pos() const { return pos_; }
  size_t size() const { return data_.size(); }
  size_t remaining() const { return data_.size() - pos_; }
  bool done() const { return pos_ >= data_.size(); }

  void seek(size_t pos) {
    if (pos > data_.size()) throw TruncatedInput("seek past end of input");
    pos_ = pos;
  }
  void skip(size_t n) { need(n), pos_ += n; }

  uint8_t u8() {
    need(1);
    return data_[pos_++];
  }
  uint16_t u16be() {
    need(2);
    uint16_t v = uint16_t(data_[pos_] << 8 | data_[pos_ + 1]);
    pos_ += 2;
    return v;
  }
  uint32_t u32be() {
    need(4);
    uint32_t v = uint32_t(data_[pos_]) << 24 | uint32_t(data_[pos_ + 1]) << 16 |
                 uint32_t(data_[pos_ + 2]) << 8 | uint32_t(data_[pos_ + 3]);
    pos_ += 4;
    return v;
  }
  uint64_t u64be() {
    uint64_t hi = u32be();
    return hi << 32 | u32be();
  }
  uint16_t u16le() {
    need(2);
    uint16_t v = uint16_t(data_[pos_] | data_[pos_ + 1] << 8);
    pos_ += 2;
    return v;
  }
  uint32_t u32le() {
    need(4);
    uint32_t v = uint32_t(data_[pos_]) | uint32_t(data_[pos_ + 1]) << 8 |
                 uint32_t(data_[pos_ + 2]) << 16 | uint32_t(data_[pos_ + 3]) << 24;
    pos_ += 4;
    return v;
  }
  ByteSpan take(size_t n) {
    need(n);
    ByteSpan s = data_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  Bytes take_bytes(size_t n) {
    ByteSpan s = take(n);
    return Bytes(s.begin(), s.end());
  }

 private:
  void need(size_t n) const {
    if (n > remaining()) throw TruncatedInput("unexpected end of input");
  }
  ByteSpan data_;
  size_t pos_;
};

class ByteWriter {
 public:
  void u8(uint8_t v) { out_.push_back(v); }
  void u16be(uint16_t v) { u8(uint8_t(v >> 8)), u8(uint8_t(v)); }
  void u32be(uint32_t v) { u16be(uint16_t(v >> 16)), u16be(uint16_t(v)); }
  void u64be(uint64_t v) { u32be(uint32_t(v >> 32)), u32be(uint32_t(v)); }
  void u16le(uint16_t v) { u8(uint8_t(v)), u8(uint8_t(v >> 8)); }
  void u32le(uint32_t v) { u16le(uint16_t(v)), u16le(uint16_t(v >> 16)); }
  void raw(ByteSpan b) { out_.insert(out_.end(), b.begin(), b.end()); }
  void raw(const Bytes& b) { raw(as_span(b)); }
  void text(std::string_view s) { raw(as_span(s)); }

  size_t size() const { return out_.size(); }
  void patch_u16be(size_t pos, uint16_t v) {
    out_.at(pos) = uint8_t(v >> 8);
    out_.at(pos + 1) = uint8_t(v);
  }
  void patch_u32be(size_t pos, uint32_t v) {
    patch_u16be(pos, uint16_t(v >> 16));
    patch_u16be(pos + 2, uint16_t(v));
  }

  Bytes take() { return std::move(out_); }
  const Bytes& data() const { return out_; }

 private:
  Bytes out_;
};

// Runs body(0..n-1) on the OpenMP thread pool when parallel is set, serially
// otherwise. Exceptions from workers are captured and the first one rethrown
// after the join, so callers see the same behavior on both paths.
void parallel_for(size_t n, bool parallel, const std::function<void(size_t)>& body);

}  // namespace verijar

#endif  // VERIJAR_COMMON_HPP_
