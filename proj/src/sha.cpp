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

#include "verijar/sha.hpp"

#include <openssl/evp.h>

#include <array>
#include <atomic>
#include <exception>

namespace verijar {

namespace {

// Explicitly fetched algorithms avoid the per-call provider lookup that
// serializes EVP_Digest under concurrency.
const EVP_MD* fetched(const char* name) {
  EVP_MD* md = EVP_MD_fetch(nullptr, name, nullptr);
  if (md == nullptr) throw Error(std::string("digest algorithm unavailable: ") + name);
  return md;
}

std::string digest_hex(const EVP_MD* md, ByteSpan data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> out{};
  unsigned int out_len = 0;
  if (EVP_Digest(data.data(), data.size(), out.data(), &out_len, md, nullptr) != 1) {
    throw Error("message digest computation failed");
  }
  static const char* kHex = "0123456789abcdef";
  std::string hex;
  hex.reserve(out_len * 2);
  for (unsigned int i = 0; i < out_len; ++i) {
    hex.push_back(kHex[out[i] >> 4]);
    hex.push_back(kHex[out[i] & 0xf]);
  }
  return hex;
}

}  // namespace

std::string sha1_hex(ByteSpan data) {
  static const EVP_MD* md = fetched("SHA1");
  return digest_hex(md, data);
}

std::string sha256_hex(ByteSpan data) {
  static const EVP_MD* md = fetched("SHA2-256");
  return digest_hex(md, data);
}

std::string hex(ByteSpan data) {
  static const char* kHex = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (uint8_t b : data) {
    out.push_back(kHex[b >> 4]);
    out.push_back(kHex[b & 0xf]);
  }
  return out;
}

std::string printable_ascii(ByteSpan data, size_t limit) {
  std::string out;
  size_t n = data.size() < limit ? data.size() : limit;
  for (size_t i = 0; i < n; ++i) {
    uint8_t c = data[i];
    if (c >= 0x20 && c < 0x7f) {
      out.push_back(char(c));
    } else if (c == '\n') {
      out += "\\n";
    } else if (c == '\t') {
      out += "\\t";
    } else if (c == '\r') {
      out += "\\r";
    } else {
      static const char* kHex = "0123456789abcdef";
      out += "\\x";
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0xf]);
    }
  }
  if (n < data.size()) out += "...";
  return out;
}

void parallel_for(size_t n, bool parallel, const std::function<void(size_t)>& body) {
  if (!parallel || n < 4) {
    for (size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
#pragma omp parallel for schedule(static)
  for (long i = 0; i < long(n); ++i) {
    if (failed.load(std::memory_order_relaxed)) continue;
    try {
      body(size_t(i));
    } catch (...) {
      bool expected = false;
      if (failed.compare_exchange_strong(expected, true)) {
        first_error = std::current_exception();
      }
    }
  }
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace verijar
