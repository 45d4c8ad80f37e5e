// Copyright 2026 The attestkit Authors
// Use of this source code is governed by the Apache-2.0 license that can be
// found in the LICENSE file.

#pragma once

#include <array>
#include <compare>
#include <string>

#include "attestkit/bytes.hpp"
#include "attestkit/errors.hpp"
#include "attestkit/sha1.hpp"

namespace attestkit {

// 16-byte UUID, textual form 8-4-4-4-12 lowercase hex. The node is the final
// 6 bytes, matching the classic layout.
class Uuid {
 public:
  static constexpr size_t kSize = 16;

  Uuid() { bytes_.fill(0); }

  static Uuid random() {
    Uuid u;
    Bytes r = random_bytes(kSize);
    std::copy(r.begin(), r.end(), u.bytes_.begin());
    u.bytes_[6] = static_cast<uint8_t>((u.bytes_[6] & 0x0F) | 0x40);
    u.bytes_[8] = static_cast<uint8_t>((u.bytes_[8] & 0x3F) | 0x80);
    return u;
  }

  static Uuid from_bytes(std::span<const uint8_t> b) {
    if (b.size() != kSize) throw ParseError("UUID must be 16 bytes");
    Uuid u;
    std::copy(b.begin(), b.end(), u.bytes_.begin());
    return u;
  }

  static Uuid from_text(std::string_view text) {
    // 8-4-4-4-12 with literal dashes.
    if (text.size() != 36 || text[8] != '-' || text[13] != '-' ||
        text[18] != '-' || text[23] != '-') {
      throw ParseError("malformed UUID text");
    }
    std::string hex;
    hex.reserve(32);
    for (char c : text) {
      if (c != '-') hex.push_back(c);
    }
    return from_bytes(hex_decode(hex));
  }

  std::string text() const {
    std::string hex = hex_encode(to_vector());
    return hex.substr(0, 8) + "-" + hex.substr(8, 4) + "-" + hex.substr(12, 4) +
           "-" + hex.substr(16, 4) + "-" + hex.substr(20, 12);
  }

  Bytes node() const { return Bytes(bytes_.begin() + 10, bytes_.end()); }
  std::string node_hex() const { return hex_encode(node()); }

  Bytes to_vector() const { return Bytes(bytes_.begin(), bytes_.end()); }
  const std::array<uint8_t, kSize>& bytes() const { return bytes_; }

  friend bool operator==(const Uuid&, const Uuid&) = default;
  friend auto operator<=>(const Uuid&, const Uuid&) = default;

 private:
  std::array<uint8_t, kSize> bytes_;
};

}  // namespace attestkit
