// Copyright 2026 The attestkit Authors
// Use of this source code is governed by the Apache-2.0 license that can be
// found in the LICENSE file.
//
// SHA-1 is the digest of record throughout the toolkit: IMA logs, PCR
// registers and TPM-1.2-style quote structures are all defined over it.

#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include <openssl/evp.h>
#include <openssl/rand.h>

#include "attestkit/bytes.hpp"
#include "attestkit/errors.hpp"

namespace attestkit {

// A 20-byte SHA-1 digest. Also the shape of PCR values, auth secrets and
// protocol nonces.
class Sha1Digest {
 public:
  static constexpr size_t kSize = 20;

  Sha1Digest() : bytes_{} {}

  explicit Sha1Digest(const std::array<uint8_t, kSize>& b) : bytes_(b) {}

  static Sha1Digest from_bytes(std::span<const uint8_t> b) {
    if (b.size() != kSize) {
      throw ParseError("digest must be 20 bytes, got " +
                       std::to_string(b.size()));
    }
    Sha1Digest d;
    std::copy(b.begin(), b.end(), d.bytes_.begin());
    return d;
  }

  static Sha1Digest from_hex(std::string_view hex) {
    return from_bytes(hex_decode(hex));
  }

  static Sha1Digest zero() { return Sha1Digest(); }

  const std::array<uint8_t, kSize>& bytes() const { return bytes_; }
  const uint8_t* data() const { return bytes_.data(); }
  size_t size() const { return kSize; }

  Bytes to_vector() const { return Bytes(bytes_.begin(), bytes_.end()); }
  std::string hex() const { return hex_encode(bytes_); }

  bool is_zero() const {
    for (uint8_t b : bytes_) {
      if (b != 0) return false;
    }
    return true;
  }

  friend bool operator==(const Sha1Digest&, const Sha1Digest&) = default;
  friend auto operator<=>(const Sha1Digest&, const Sha1Digest&) = default;

 private:
  std::array<uint8_t, kSize> bytes_;
};

inline Sha1Digest sha1(std::span<const uint8_t> data) {
  std::array<uint8_t, Sha1Digest::kSize> md;
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha1(),
                 nullptr) != 1 ||
      len != Sha1Digest::kSize) {
    throw CryptoError("SHA-1 computation failed");
  }
  return Sha1Digest(md);
}

inline Sha1Digest sha1(const Bytes& data) {
  return sha1(std::span<const uint8_t>(data));
}

inline Sha1Digest sha1(std::string_view text) {
  return sha1(std::span<const uint8_t>(
      reinterpret_cast<const uint8_t*>(text.data()), text.size()));
}

// Digest of the bytes denoted by a hex string, as lowercase hex.
inline std::string sha1_hex(std::string_view hex_input) {
  return sha1(hex_decode(hex_input)).hex();
}

// ---------------------------------------------------------------------------
// Randomness

inline Bytes random_bytes(size_t n) {
  Bytes out(n);
  if (n > 0 && RAND_bytes(out.data(), static_cast<int>(n)) != 1) {
    throw CryptoError("system entropy source failed");
  }
  return out;
}

// Deterministic byte stream for seeded (test) modes: block i is
// sha1(tag || seed || i as u32 BE), blocks concatenated and truncated to n.
inline Bytes prng_stream(std::string_view tag, std::span<const uint8_t> seed,
                         size_t n) {
  Bytes out;
  out.reserve(n + Sha1Digest::kSize);
  uint32_t counter = 0;
  while (out.size() < n) {
    Bytes block_input = to_bytes(tag);
    block_input.insert(block_input.end(), seed.begin(), seed.end());
    append_u32(block_input, counter++);
    Sha1Digest block = sha1(block_input);
    out.insert(out.end(), block.bytes().begin(), block.bytes().end());
  }
  out.resize(n);
  return out;
}

// Fresh 20-byte nonce: the digest of a random value.
inline Sha1Digest random_hash() {
  return sha1(random_bytes(Sha1Digest::kSize));
}

// Seeded variant: digest of the first PRNG block for the given seed.
inline Sha1Digest random_hash(std::span<const uint8_t> seed) {
  return sha1(prng_stream("rnd", seed, Sha1Digest::kSize));
}

}  // namespace attestkit
