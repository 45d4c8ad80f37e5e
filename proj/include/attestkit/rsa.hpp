// Copyright 2026 The attestkit Authors
// Use of this source code is governed by the Apache-2.0 license that can be
// found in the LICENSE file.
//
// RSA primitives: OAEP(SHA-1) for confidentiality, PKCS#1 v1.5 over a SHA-1
// DigestInfo for signatures. Keys are held as raw big-endian integers so the
// canonical encodings stay byte-stable across platforms.

#pragma once

#include <memory>
#include <span>
#include <string>

#include <openssl/bn.h>
#include <openssl/core_names.h>
#include <openssl/evp.h>
#include <openssl/param_build.h>
#include <openssl/rsa.h>

#include "attestkit/blob.hpp"
#include "attestkit/bytes.hpp"
#include "attestkit/errors.hpp"
#include "attestkit/sha1.hpp"

namespace attestkit {

constexpr size_t kDefaultRsaBits = 2048;
// OAEP with SHA-1: 2 * 20 hash bytes + 2.
constexpr size_t kOaepOverhead = 2 * Sha1Digest::kSize + 2;

struct RsaPublicKey {
  Bytes modulus;   // big-endian, no leading zeros
  Bytes exponent;  // big-endian

  size_t modulus_bytes() const { return modulus.size(); }
  size_t max_oaep_input() const { return modulus.size() - kOaepOverhead; }

  friend bool operator==(const RsaPublicKey&, const RsaPublicKey&) = default;
};

struct RsaPrivateKey {
  Bytes modulus;
  Bytes exponent;          // public exponent
  Bytes private_exponent;  // big-endian

  friend bool operator==(const RsaPrivateKey&, const RsaPrivateKey&) = default;
};

struct RsaKeyPair {
  RsaPublicKey public_part;
  RsaPrivateKey private_part;

  friend bool operator==(const RsaKeyPair&, const RsaKeyPair&) = default;
};

// ---------------------------------------------------------------------------
// OpenSSL plumbing

namespace detail {

struct PkeyFree {
  void operator()(EVP_PKEY* p) const { EVP_PKEY_free(p); }
};
using Pkey = std::unique_ptr<EVP_PKEY, PkeyFree>;

struct PkeyCtxFree {
  void operator()(EVP_PKEY_CTX* p) const { EVP_PKEY_CTX_free(p); }
};
using PkeyCtx = std::unique_ptr<EVP_PKEY_CTX, PkeyCtxFree>;

struct BnFree {
  void operator()(BIGNUM* b) const { BN_free(b); }
};
using Bn = std::unique_ptr<BIGNUM, BnFree>;

inline Bn bn_from_bytes(const Bytes& b) {
  Bn bn(BN_bin2bn(b.data(), static_cast<int>(b.size()), nullptr));
  if (!bn) throw CryptoError("BN_bin2bn failed");
  return bn;
}

inline Bytes bn_to_bytes(const BIGNUM* bn) {
  Bytes out(static_cast<size_t>(BN_num_bytes(bn)));
  BN_bn2bin(bn, out.data());
  return out;
}

inline Bytes get_bn_param(EVP_PKEY* pkey, const char* name) {
  BIGNUM* bn = nullptr;
  if (EVP_PKEY_get_bn_param(pkey, name, &bn) != 1) {
    throw CryptoError(std::string("missing RSA parameter ") + name);
  }
  Bn owned(bn);
  return bn_to_bytes(owned.get());
}

inline Pkey pkey_from_parts(const Bytes& n, const Bytes& e, const Bytes* d) {
  Bn n_bn = bn_from_bytes(n);
  Bn e_bn = bn_from_bytes(e);
  Bn d_bn;
  std::unique_ptr<OSSL_PARAM_BLD, decltype(&OSSL_PARAM_BLD_free)> bld(
      OSSL_PARAM_BLD_new(), OSSL_PARAM_BLD_free);
  if (!bld) throw CryptoError("OSSL_PARAM_BLD_new failed");
  OSSL_PARAM_BLD_push_BN(bld.get(), OSSL_PKEY_PARAM_RSA_N, n_bn.get());
  OSSL_PARAM_BLD_push_BN(bld.get(), OSSL_PKEY_PARAM_RSA_E, e_bn.get());
  if (d != nullptr) {
    d_bn = bn_from_bytes(*d);
    OSSL_PARAM_BLD_push_BN(bld.get(), OSSL_PKEY_PARAM_RSA_D, d_bn.get());
  }
  std::unique_ptr<OSSL_PARAM, decltype(&OSSL_PARAM_free)> params(
      OSSL_PARAM_BLD_to_param(bld.get()), OSSL_PARAM_free);
  if (!params) throw CryptoError("OSSL_PARAM_BLD_to_param failed");

  PkeyCtx ctx(EVP_PKEY_CTX_new_from_name(nullptr, "RSA", nullptr));
  if (!ctx || EVP_PKEY_fromdata_init(ctx.get()) != 1) {
    throw CryptoError("RSA fromdata init failed");
  }
  EVP_PKEY* raw = nullptr;
  int selection = d ? EVP_PKEY_KEYPAIR : EVP_PKEY_PUBLIC_KEY;
  if (EVP_PKEY_fromdata(ctx.get(), &raw, selection, params.get()) != 1) {
    throw CryptoError("RSA key construction failed");
  }
  return Pkey(raw);
}

inline Pkey pkey_from_public(const RsaPublicKey& pub) {
  return pkey_from_parts(pub.modulus, pub.exponent, nullptr);
}

inline Pkey pkey_from_private(const RsaPrivateKey& priv) {
  return pkey_from_parts(priv.modulus, priv.exponent, &priv.private_exponent);
}

}  // namespace detail

inline RsaKeyPair rsa_generate(size_t bits = kDefaultRsaBits) {
  detail::Pkey pkey(EVP_RSA_gen(static_cast<unsigned int>(bits)));
  if (!pkey) throw CryptoError("RSA key generation failed");
  Bytes n = detail::get_bn_param(pkey.get(), OSSL_PKEY_PARAM_RSA_N);
  Bytes e = detail::get_bn_param(pkey.get(), OSSL_PKEY_PARAM_RSA_E);
  Bytes d = detail::get_bn_param(pkey.get(), OSSL_PKEY_PARAM_RSA_D);
  return RsaKeyPair{RsaPublicKey{n, e}, RsaPrivateKey{n, e, d}};
}

// ---------------------------------------------------------------------------
// Canonical key encodings

inline Record public_key_record(const RsaPublicKey& pub) {
  return Record{RecordTag::kRsaPublicKey, {pub.modulus, pub.exponent}};
}

inline Bytes encode_public_key(const RsaPublicKey& pub) {
  return encode_record(public_key_record(pub));
}

inline RsaPublicKey decode_public_key(std::span<const uint8_t> encoded) {
  Record r = expect_tag(decode_record(encoded), RecordTag::kRsaPublicKey);
  return RsaPublicKey{record_field(r, 0), record_field(r, 1)};
}

inline Bytes encode_private_key(const RsaPrivateKey& priv) {
  return encode_record(Record{
      RecordTag::kRsaPrivateKey,
      {priv.modulus, priv.exponent, priv.private_exponent}});
}

inline RsaPrivateKey decode_private_key(std::span<const uint8_t> encoded) {
  Record r = expect_tag(decode_record(encoded), RecordTag::kRsaPrivateKey);
  return RsaPrivateKey{record_field(r, 0), record_field(r, 1),
                       record_field(r, 2)};
}

// Digest a public key's canonical encoding; this is the "hash of the AIK
// public key" carried inside activation blobs.
inline Sha1Digest public_key_digest(const RsaPublicKey& pub) {
  return sha1(encode_public_key(pub));
}

// ---------------------------------------------------------------------------
// OAEP encryption

inline Bytes rsa_encrypt(const RsaPublicKey& pub,
                         std::span<const uint8_t> data) {
  if (data.size() > pub.max_oaep_input()) {
    throw CryptoError("plaintext of " + std::to_string(data.size()) +
                      " bytes exceeds one OAEP block (" +
                      std::to_string(pub.max_oaep_input()) + ")");
  }
  detail::Pkey pkey = detail::pkey_from_public(pub);
  detail::PkeyCtx ctx(EVP_PKEY_CTX_new(pkey.get(), nullptr));
  if (!ctx || EVP_PKEY_encrypt_init(ctx.get()) != 1 ||
      EVP_PKEY_CTX_set_rsa_padding(ctx.get(), RSA_PKCS1_OAEP_PADDING) != 1) {
    throw CryptoError("RSA encrypt init failed");
  }
  size_t out_len = 0;
  if (EVP_PKEY_encrypt(ctx.get(), nullptr, &out_len, data.data(),
                       data.size()) != 1) {
    throw CryptoError("RSA encrypt sizing failed");
  }
  Bytes out(out_len);
  if (EVP_PKEY_encrypt(ctx.get(), out.data(), &out_len, data.data(),
                       data.size()) != 1) {
    throw CryptoError("RSA encryption failed");
  }
  out.resize(out_len);
  return out;
}

inline Bytes rsa_decrypt(const RsaPrivateKey& priv,
                         std::span<const uint8_t> cipher) {
  detail::Pkey pkey = detail::pkey_from_private(priv);
  detail::PkeyCtx ctx(EVP_PKEY_CTX_new(pkey.get(), nullptr));
  if (!ctx || EVP_PKEY_decrypt_init(ctx.get()) != 1 ||
      EVP_PKEY_CTX_set_rsa_padding(ctx.get(), RSA_PKCS1_OAEP_PADDING) != 1) {
    throw CryptoError("RSA decrypt init failed");
  }
  size_t out_len = 0;
  if (EVP_PKEY_decrypt(ctx.get(), nullptr, &out_len, cipher.data(),
                       cipher.size()) != 1) {
    throw CryptoError("RSA decrypt sizing failed");
  }
  Bytes out(out_len);
  if (EVP_PKEY_decrypt(ctx.get(), out.data(), &out_len, cipher.data(),
                       cipher.size()) != 1) {
    throw CryptoError("RSA decryption failed (wrong key or corrupt data)");
  }
  out.resize(out_len);
  return out;
}

// ---------------------------------------------------------------------------
// Signatures

// DER DigestInfo for a SHA-1 digest: fixed 15-byte algorithm prefix + digest.
inline Bytes digest_info(const Sha1Digest& d) {
  static constexpr uint8_t kSha1Prefix[15] = {0x30, 0x21, 0x30, 0x09, 0x06,
                                              0x05, 0x2b, 0x0e, 0x03, 0x02,
                                              0x1a, 0x05, 0x00, 0x04, 0x14};
  Bytes out(kSha1Prefix, kSha1Prefix + sizeof(kSha1Prefix));
  out.insert(out.end(), d.bytes().begin(), d.bytes().end());
  return out;
}

// PKCS#1 v1.5 signature over digest_info(sha1(data)).
inline Bytes rsa_sign(const RsaPrivateKey& priv, std::span<const uint8_t> data) {
  Bytes info = digest_info(sha1(data));
  detail::Pkey pkey = detail::pkey_from_private(priv);
  detail::PkeyCtx ctx(EVP_PKEY_CTX_new(pkey.get(), nullptr));
  if (!ctx || EVP_PKEY_sign_init(ctx.get()) != 1 ||
      EVP_PKEY_CTX_set_rsa_padding(ctx.get(), RSA_PKCS1_PADDING) != 1) {
    throw CryptoError("RSA sign init failed");
  }
  size_t sig_len = 0;
  if (EVP_PKEY_sign(ctx.get(), nullptr, &sig_len, info.data(), info.size()) !=
      1) {
    throw CryptoError("RSA sign sizing failed");
  }
  Bytes sig(sig_len);
  if (EVP_PKEY_sign(ctx.get(), sig.data(), &sig_len, info.data(),
                    info.size()) != 1) {
    throw CryptoError("RSA signing failed");
  }
  sig.resize(sig_len);
  return sig;
}

// Never throws on a bad signature: recover the padded payload and compare it
// to the expected DigestInfo.
inline bool rsa_verify(const RsaPublicKey& pub, std::span<const uint8_t> data,
                       std::span<const uint8_t> signature) {
  if (signature.size() != pub.modulus_bytes()) return false;
  try {
    detail::Pkey pkey = detail::pkey_from_public(pub);
    detail::PkeyCtx ctx(EVP_PKEY_CTX_new(pkey.get(), nullptr));
    if (!ctx || EVP_PKEY_verify_recover_init(ctx.get()) != 1 ||
        EVP_PKEY_CTX_set_rsa_padding(ctx.get(), RSA_PKCS1_PADDING) != 1) {
      return false;
    }
    size_t len = 0;
    if (EVP_PKEY_verify_recover(ctx.get(), nullptr, &len, signature.data(),
                                signature.size()) != 1) {
      return false;
    }
    Bytes recovered(len);
    if (EVP_PKEY_verify_recover(ctx.get(), recovered.data(), &len,
                                signature.data(), signature.size()) != 1) {
      return false;
    }
    recovered.resize(len);
    return recovered == digest_info(sha1(data));
  } catch (const Error&) {
    return false;
  }
}

// ---------------------------------------------------------------------------
// Chunked binding

// Split data into maximal OAEP-sized chunks, encrypt each to pub and prepend
// a 4-byte big-endian block count. Only the private-key holder can recover.
inline Bytes bind_external(const RsaPublicKey& pub,
                           std::span<const uint8_t> data) {
  size_t chunk = pub.max_oaep_input();
  size_t blocks = (data.size() + chunk - 1) / chunk;
  Bytes out;
  append_u32(out, static_cast<uint32_t>(blocks));
  for (size_t i = 0; i < blocks; ++i) {
    size_t off = i * chunk;
    size_t len = std::min(chunk, data.size() - off);
    Bytes enc = rsa_encrypt(pub, data.subspan(off, len));
    out.insert(out.end(), enc.begin(), enc.end());
  }
  return out;
}

inline Bytes unbind_chunked(const RsaPrivateKey& priv,
                            std::span<const uint8_t> bound) {
  uint32_t blocks = read_u32(bound);
  size_t mod_bytes = priv.modulus.size();
  if (bound.size() != 4 + static_cast<size_t>(blocks) * mod_bytes) {
    throw CryptoError("bound data length does not match its block count");
  }
  Bytes out;
  for (uint32_t i = 0; i < blocks; ++i) {
    Bytes plain = rsa_decrypt(priv, bound.subspan(4 + i * mod_bytes, mod_bytes));
    out.insert(out.end(), plain.begin(), plain.end());
  }
  return out;
}

}  // namespace attestkit
