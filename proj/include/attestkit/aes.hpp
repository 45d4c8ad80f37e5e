// Copyright 2026 The attestkit Authors
// Use of this source code is governed by the Apache-2.0 license that can be
// found in the LICENSE file.

#pragma once

#include <memory>
#include <span>
#include <string>

#include <openssl/evp.h>

#include "attestkit/blob.hpp"
#include "attestkit/bytes.hpp"
#include "attestkit/errors.hpp"
#include "attestkit/sha1.hpp"

namespace attestkit {

constexpr size_t kAesBlockSize = 16;
constexpr size_t kDefaultAesKeyBits = 128;

struct AesKey {
  Bytes bytes;  // 16, 24 or 32 bytes

  friend bool operator==(const AesKey&, const AesKey&) = default;
};

struct AesIv {
  Bytes bytes;  // always one cipher block

  friend bool operator==(const AesIv&, const AesIv&) = default;
};

inline AesKey aes_generate_key(size_t key_bits = kDefaultAesKeyBits) {
  if (key_bits != 128 && key_bits != 192 && key_bits != 256) {
    throw CryptoError("unsupported AES key size " + std::to_string(key_bits));
  }
  return AesKey{random_bytes(key_bits / 8)};
}

// Seeded variant: same seed, same key.
inline AesKey aes_generate_key(std::span<const uint8_t> seed,
                               size_t key_bits = kDefaultAesKeyBits) {
  if (key_bits != 128 && key_bits != 192 && key_bits != 256) {
    throw CryptoError("unsupported AES key size " + std::to_string(key_bits));
  }
  return AesKey{prng_stream("key", seed, key_bits / 8)};
}

inline AesIv aes_generate_iv() { return AesIv{random_bytes(kAesBlockSize)}; }

inline AesIv aes_generate_iv(std::span<const uint8_t> seed) {
  return AesIv{prng_stream("iv", seed, kAesBlockSize)};
}

namespace detail {

inline const EVP_CIPHER* aes_cbc_cipher(size_t key_len) {
  switch (key_len) {
    case 16: return EVP_aes_128_cbc();
    case 24: return EVP_aes_192_cbc();
    case 32: return EVP_aes_256_cbc();
    default:
      throw CryptoError("unsupported AES key length " +
                        std::to_string(key_len));
  }
}

struct CipherCtxFree {
  void operator()(EVP_CIPHER_CTX* c) const { EVP_CIPHER_CTX_free(c); }
};
using CipherCtx = std::unique_ptr<EVP_CIPHER_CTX, CipherCtxFree>;

inline Bytes aes_crypt(bool encrypt, const AesKey& key, const AesIv& iv,
                       std::span<const uint8_t> input) {
  if (iv.bytes.size() != kAesBlockSize) {
    throw CryptoError("IV must be one cipher block");
  }
  CipherCtx ctx(EVP_CIPHER_CTX_new());
  if (!ctx) throw CryptoError("EVP_CIPHER_CTX_new failed");
  const EVP_CIPHER* cipher = aes_cbc_cipher(key.bytes.size());
  if (EVP_CipherInit_ex(ctx.get(), cipher, nullptr, key.bytes.data(),
                        iv.bytes.data(), encrypt ? 1 : 0) != 1) {
    throw CryptoError("AES init failed");
  }
  Bytes out(input.size() + kAesBlockSize);
  int len1 = 0;
  if (EVP_CipherUpdate(ctx.get(), out.data(), &len1, input.data(),
                       static_cast<int>(input.size())) != 1) {
    throw CryptoError("AES update failed");
  }
  int len2 = 0;
  if (EVP_CipherFinal_ex(ctx.get(), out.data() + len1, &len2) != 1) {
    throw CryptoError(encrypt ? "AES encryption failed"
                              : "AES decryption failed (bad key or padding)");
  }
  out.resize(static_cast<size_t>(len1) + static_cast<size_t>(len2));
  return out;
}

}  // namespace detail

// CBC with PKCS#7 padding. A full-block input gains one padding block.
inline Bytes aes_encrypt(const AesKey& key, const AesIv& iv,
                         std::span<const uint8_t> plain) {
  return detail::aes_crypt(true, key, iv, plain);
}

inline Bytes aes_decrypt(const AesKey& key, const AesIv& iv,
                         std::span<const uint8_t> cipher) {
  if (cipher.size() % kAesBlockSize != 0) {
    throw CryptoError("ciphertext length is not a multiple of the block size");
  }
  return detail::aes_crypt(false, key, iv, cipher);
}

// Encode-then-encrypt / decrypt-then-decode.
inline Bytes aes_encrypt_record(const AesKey& key, const AesIv& iv,
                                const Record& record) {
  return aes_encrypt(key, iv, encode_record(record));
}

inline Record aes_decrypt_record(const AesKey& key, const AesIv& iv,
                                 std::span<const uint8_t> cipher) {
  return decode_record(aes_decrypt(key, iv, cipher));
}

}  // namespace attestkit
