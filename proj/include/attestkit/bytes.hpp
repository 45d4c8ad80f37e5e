// Copyright 2026 The attestkit Authors
// Use of this source code is governed by the Apache-2.0 license that can be
// found in the LICENSE file.

#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <openssl/evp.h>

#include "attestkit/errors.hpp"

namespace attestkit {

using Bytes = std::vector<uint8_t>;

inline Bytes to_bytes(std::string_view s) {
  return Bytes(s.begin(), s.end());
}

inline std::string to_string(std::span<const uint8_t> b) {
  return std::string(b.begin(), b.end());
}

// ---------------------------------------------------------------------------
// Hex

inline std::string hex_encode(std::span<const uint8_t> data) {
  static const char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (uint8_t b : data) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0x0f]);
  }
  return out;
}

inline int hex_nibble(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  throw ParseError(std::string("invalid hex character '") + c + "'");
}

// Case-insensitive; requires an even number of digits.
inline Bytes hex_decode(std::string_view hex) {
  if (hex.size() % 2 != 0) {
    throw ParseError("hex string has odd length " + std::to_string(hex.size()));
  }
  Bytes out(hex.size() / 2);
  for (size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<uint8_t>((hex_nibble(hex[2 * i]) << 4) |
                                  hex_nibble(hex[2 * i + 1]));
  }
  return out;
}

inline bool is_hex(std::string_view s) {
  if (s.size() % 2 != 0) return false;
  for (char c : s) {
    if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f') ||
          (c >= 'A' && c <= 'F'))) {
      return false;
    }
  }
  return true;
}

// Decimal rendering of num zero-padded to length; longer numbers are
// returned unpadded.
inline std::string leading_zeroes(uint64_t num, size_t length) {
  std::string s = std::to_string(num);
  if (s.size() >= length) return s;
  return std::string(length - s.size(), '0') + s;
}

// ---------------------------------------------------------------------------
// Big-endian integer packing

inline void append_u32(Bytes& out, uint32_t v) {
  out.push_back(static_cast<uint8_t>(v >> 24));
  out.push_back(static_cast<uint8_t>(v >> 16));
  out.push_back(static_cast<uint8_t>(v >> 8));
  out.push_back(static_cast<uint8_t>(v));
}

inline void append_u64(Bytes& out, uint64_t v) {
  append_u32(out, static_cast<uint32_t>(v >> 32));
  append_u32(out, static_cast<uint32_t>(v));
}

inline uint32_t read_u32(std::span<const uint8_t> in) {
  if (in.size() < 4) throw ParseError("truncated u32");
  return (static_cast<uint32_t>(in[0]) << 24) |
         (static_cast<uint32_t>(in[1]) << 16) |
         (static_cast<uint32_t>(in[2]) << 8) | static_cast<uint32_t>(in[3]);
}

inline uint64_t read_u64(std::span<const uint8_t> in) {
  if (in.size() < 8) throw ParseError("truncated u64");
  return (static_cast<uint64_t>(read_u32(in)) << 32) |
         read_u32(in.subspan(4));
}

// ---------------------------------------------------------------------------
// Base64 (standard alphabet, used by the armored exports)

inline std::string base64_encode(std::span<const uint8_t> data) {
  std::string out;
  if (data.empty()) return out;
  out.resize(4 * ((data.size() + 2) / 3));
  int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                          data.data(), static_cast<int>(data.size()));
  out.resize(static_cast<size_t>(n));
  return out;
}

inline Bytes base64_decode(std::string_view text) {
  if (text.empty()) return {};
  if (text.size() % 4 != 0) throw ParseError("base64 length not a multiple of 4");
  Bytes out(3 * text.size() / 4);
  int n = EVP_DecodeBlock(out.data(),
                          reinterpret_cast<const unsigned char*>(text.data()),
                          static_cast<int>(text.size()));
  if (n < 0) throw ParseError("invalid base64 input");
  // EVP_DecodeBlock does not account for '=' padding.
  size_t pad = 0;
  if (text.size() >= 1 && text[text.size() - 1] == '=') ++pad;
  if (text.size() >= 2 && text[text.size() - 2] == '=') ++pad;
  out.resize(static_cast<size_t>(n) - pad);
  return out;
}

// ---------------------------------------------------------------------------
// File persistence

inline Bytes load_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  Bytes data((std::istreambuf_iterator<char>(in)),
             std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read error on " + path.string());
  return data;
}

// Write-to-temp-then-rename so readers never observe a half-written file.
inline void save_bytes(const std::filesystem::path& path,
                       std::span<const uint8_t> data) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size()));
    out.flush();
    if (!out) throw IoError("write error on " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("rename " + tmp.string() + " -> " + path.string() +
                        " failed: " + ec.message());
}

inline std::string load_text(const std::filesystem::path& path) {
  Bytes b = load_bytes(path);
  return std::string(b.begin(), b.end());
}

// ---------------------------------------------------------------------------
// PEM-style armor for exported keys and certificates

inline std::string armor(std::string_view label, std::span<const uint8_t> data) {
  std::string b64 = base64_encode(data);
  std::string out = "-----BEGIN ";
  out += label;
  out += "-----\n";
  for (size_t i = 0; i < b64.size(); i += 64) {
    out += b64.substr(i, 64);
    out += '\n';
  }
  out += "-----END ";
  out += label;
  out += "-----\n";
  return out;
}

inline Bytes dearmor(std::string_view label, std::string_view text) {
  std::string begin = "-----BEGIN " + std::string(label) + "-----";
  std::string end = "-----END " + std::string(label) + "-----";
  size_t b = text.find(begin);
  size_t e = text.find(end);
  if (b == std::string_view::npos || e == std::string_view::npos || e < b) {
    throw ParseError("missing armor markers for " + std::string(label));
  }
  std::string b64;
  for (char c : text.substr(b + begin.size(), e - b - begin.size())) {
    if (c != '\n' && c != '\r') b64.push_back(c);
  }
  return base64_decode(b64);
}

inline void save_text(const std::filesystem::path& path, std::string_view text) {
  save_bytes(path, std::span<const uint8_t>(
                       reinterpret_cast<const uint8_t*>(text.data()),
                       text.size()));
}

}  // namespace attestkit
