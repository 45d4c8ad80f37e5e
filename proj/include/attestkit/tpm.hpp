// Copyright 2026 The attestkit Authors
// Use of this source code is governed by the Apache-2.0 license that can be
// found in the LICENSE file.
//
// Deterministic software TPM. One instance models one device: ownership
// lifecycle, 24 PCRs, EK with manufacturer certificate, identity keys,
// quoting, key creation/certification and bind/unbind. State persists as a
// canonical record so separate command invocations talk to the same TPM.

#pragma once

#include <mutex>
#include <optional>
#include <utility>

#include "attestkit/aes.hpp"
#include "attestkit/certificate.hpp"
#include "attestkit/config.hpp"
#include "attestkit/measurement.hpp"
#include "attestkit/rsa.hpp"
#include "attestkit/stores.hpp"
#include "attestkit/uuid.hpp"

namespace attestkit {

// TPM-1.2-style auth secret: SHA-1 of the UTF-8 password bytes; the empty
// password is the well-known all-zero secret.
inline Sha1Digest encode_password(const std::string& pwd) {
  if (pwd.empty()) return Sha1Digest::zero();
  return sha1(pwd);
}

// ---------------------------------------------------------------------------
// PCR selection and composite structures (TPM 1.2 byte layouts)

class PcrSelection {
 public:
  static constexpr size_t kMaskBytes = 3;

  static PcrSelection single(uint8_t index) {
    return from_indices({index});
  }

  static PcrSelection from_indices(std::vector<uint8_t> indices) {
    PcrSelection s;
    std::sort(indices.begin(), indices.end());
    indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
    for (uint8_t i : indices) {
      if (i >= kNumPcrs) {
        throw TpmError("PCR index " + std::to_string(i) + " out of range");
      }
    }
    s.indices_ = std::move(indices);
    return s;
  }

  static PcrSelection from_bitmap(std::span<const uint8_t> bitmap) {
    if (bitmap.size() != 2 + kMaskBytes || bitmap[0] != 0 ||
        bitmap[1] != kMaskBytes) {
      throw ParseError("malformed PCR selection bitmap");
    }
    std::vector<uint8_t> indices;
    for (uint8_t i = 0; i < kNumPcrs; ++i) {
      if (bitmap[2 + i / 8] & (1u << (i % 8))) indices.push_back(i);
    }
    return from_indices(std::move(indices));
  }

  // Mask bytes only: bit i%8 (LSB first) of byte i/8.
  Bytes mask() const {
    Bytes m(kMaskBytes, 0);
    for (uint8_t i : indices_) {
      m[i / 8] = static_cast<uint8_t>(m[i / 8] | (1u << (i % 8)));
    }
    return m;
  }

  // Full selection: 2-byte size prefix followed by the mask.
  Bytes bitmap() const {
    Bytes out{0x00, kMaskBytes};
    Bytes m = mask();
    out.insert(out.end(), m.begin(), m.end());
    return out;
  }

  const std::vector<uint8_t>& indices() const { return indices_; }
  bool empty() const { return indices_.empty(); }

  friend bool operator==(const PcrSelection&, const PcrSelection&) = default;

 private:
  std::vector<uint8_t> indices_;  // sorted, unique
};

// TPM_PCR_COMPOSITE: selection ∥ u32 total value length ∥ concatenated values.
inline Bytes pcr_composite(const PcrSelection& sel,
                           std::span<const Sha1Digest> values) {
  if (values.size() != sel.indices().size()) {
    throw TpmError("PCR value count does not match selection");
  }
  Bytes out = sel.bitmap();
  append_u32(out, static_cast<uint32_t>(Sha1Digest::kSize * values.size()));
  for (const Sha1Digest& v : values) {
    out.insert(out.end(), v.bytes().begin(), v.bytes().end());
  }
  return out;
}

inline Sha1Digest pcr_composite_digest(const PcrSelection& sel,
                                       std::span<const Sha1Digest> values) {
  return sha1(pcr_composite(sel, values));
}

// TPM_QUOTE_INFO: version 1.1.0.0, fixed fourcc "QUOT", composite digest,
// external nonce. This is the byte string the quote signature covers.
inline Bytes quote_info_bytes(const Sha1Digest& composite_digest,
                              std::span<const uint8_t> nonce) {
  if (nonce.size() != Sha1Digest::kSize) {
    throw TpmError("quote nonce must be 20 bytes");
  }
  Bytes out{0x01, 0x01, 0x00, 0x00, 'Q', 'U', 'O', 'T'};
  out.insert(out.end(), composite_digest.bytes().begin(),
             composite_digest.bytes().end());
  out.insert(out.end(), nonce.begin(), nonce.end());
  return out;
}

struct Quote {
  PcrSelection selection;
  Sha1Digest composite_digest;
  Bytes nonce;  // 20 bytes
  Bytes signature;

  friend bool operator==(const Quote&, const Quote&) = default;
};

inline Record quote_record(const Quote& q) {
  return Record{RecordTag::kQuote,
                {q.selection.bitmap(), q.composite_digest.to_vector(), q.nonce,
                 q.signature}};
}

inline Quote decode_quote(const Record& r) {
  expect_tag(r, RecordTag::kQuote);
  if (r.fields.size() != 4) throw ParseError("quote record field count");
  Quote q;
  q.selection = PcrSelection::from_bitmap(record_field(r, 0));
  q.composite_digest = Sha1Digest::from_bytes(record_field(r, 1));
  q.nonce = record_field(r, 2);
  if (q.nonce.size() != Sha1Digest::kSize) {
    throw ParseError("quote nonce must be 20 bytes");
  }
  q.signature = record_field(r, 3);
  return q;
}

// ---------------------------------------------------------------------------
// TPM-held keys

enum class KeyUsage : uint8_t {
  kBind = 1,
  kSeal = 2,
  kIdentity = 3,
  kSigning = 4,
};

struct TpmKey {
  KeyUsage usage = KeyUsage::kBind;
  bool is_volatile = false;
  bool is_migratable = false;
  std::optional<PcrSelection> pcr_binding;  // advisory
  Sha1Digest auth;
  RsaKeyPair keys;

  friend bool operator==(const TpmKey&, const TpmKey&) = default;
};

inline Record tpm_key_record(const TpmKey& k) {
  return Record{RecordTag::kTpmKey,
                {u8_field(static_cast<uint8_t>(k.usage)),
                 u8_field(k.is_volatile ? 1 : 0),
                 u8_field(k.is_migratable ? 1 : 0),
                 k.pcr_binding ? k.pcr_binding->bitmap() : Bytes{},
                 k.auth.to_vector(),
                 encode_public_key(k.keys.public_part),
                 encode_private_key(k.keys.private_part)}};
}

inline TpmKey decode_tpm_key(const Record& r) {
  expect_tag(r, RecordTag::kTpmKey);
  if (r.fields.size() != 7) throw ParseError("TPM key record field count");
  TpmKey k;
  uint8_t usage = field_as_u8(r, 0);
  if (usage < 1 || usage > 4) throw ParseError("TPM key usage out of range");
  k.usage = static_cast<KeyUsage>(usage);
  k.is_volatile = field_as_u8(r, 1) != 0;
  k.is_migratable = field_as_u8(r, 2) != 0;
  if (!record_field(r, 3).empty()) {
    k.pcr_binding = PcrSelection::from_bitmap(record_field(r, 3));
  }
  k.auth = Sha1Digest::from_bytes(record_field(r, 4));
  k.keys.public_part = decode_public_key(record_field(r, 5));
  k.keys.private_part = decode_private_key(record_field(r, 6));
  return k;
}

struct CertifyResult {
  RsaPublicKey public_part;
  Bytes certification;  // AIK signature over sha1(public part) ∥ nonce
  CertificateRecord aik_cert;
};

// ---------------------------------------------------------------------------
// EK-targeted activation blobs

// Wrap a payload so that only the TPM holding ek_pub's private part can open
// it, and only while a key whose public digest equals aik_digest is loaded.
inline Record make_ek_blob(const RsaPublicKey& ek_pub,
                           const Sha1Digest& aik_digest,
                           std::span<const uint8_t> payload) {
  Bytes session = random_bytes(kDefaultAesKeyBits / 8);
  AesIv iv = aes_generate_iv();
  Bytes secret = session;
  secret.insert(secret.end(), aik_digest.bytes().begin(),
                aik_digest.bytes().end());
  return Record{RecordTag::kEkWrappedBlob,
                {rsa_encrypt(ek_pub, secret), iv.bytes,
                 aes_encrypt(AesKey{session}, iv, payload)}};
}

// ---------------------------------------------------------------------------
// Built-in EK manufacturer

// Every soft TPM's EK certificate chains to this issuer, standing in for the
// vendor CA burned into real hardware. The private part ships here too: the
// whole point of the soft TPM is running both sides on a desk.
namespace detail {

constexpr const char* kEkIssuerModulusHex =
    "cfd63b4d500301c183cfcf7c5d4433e0668292ba5e968b9c09ba5a19b59f606df02f0f1d"
    "6ec4d03d36e4d5bca48472fc7f4d37e8844b0f27b3a9e2305cc8eb464931d2497db3eecc"
    "061ee6f87f62e03ec29725cc60e993b47e9c060164688d1a78d781a200e6b39482d152a8"
    "87f732f65bce88bfa45cacc0cc3af6d1b6511c5d6a409cb5ec3dcf4e26c9d64a162f1cc8"
    "62b78f10a7a1bbc2814452557ffe6e949043c092d7a9d4847d618c2f023f4e75836073e6"
    "143c1d29d1d83b12a87946b7a9be799367547061df198e120a7afcee511e2bd34ed67f7a"
    "e54a41c6a86685ad4345b1d1e212aec0389fe9e8c1d3a747f194e6212c31cebf18da2428"
    "666a1ffb";

constexpr const char* kEkIssuerPrivateExponentHex =
    "45aaba16204be1bacc444c78938ad918cf43d58b43499362aaa01cb3a17ddb04ff0dc733"
    "467e128f7267227e29677c63c7084b45559313716b77f6a9df7039ed457bbdd184a15bda"
    "67f2d3d95859fc710d293d325509f6c8f9e7b2dba49ca72fc871f4b2293b2bd70c42be42"
    "5fd12cf407b2238499c3b6e4a990da4b51a1beafb65dad8486851ddee3ace55371b98c64"
    "b30ae4ad2082defd2700cf72e68149ab3bc4713433a55fb3d767901060ceeebf7ddea4f2"
    "2b6a87ff8b7c0c99d2b9fac73ef58ac373df8e5445c4c3f6c3af1d27a45b9aaf698a9461"
    "260547d12d8d72fcf9ff8ef4d4e0f29c4c5e4492017d9fc7f98acfa2e40ae916e88d2b5f"
    "66eb4f01";

}  // namespace detail

constexpr const char* kEkIssuerName = "Soft TPM Manufacturer CA";

inline const RsaKeyPair& builtin_ek_issuer() {
  static const RsaKeyPair kp = [] {
    Bytes n = hex_decode(detail::kEkIssuerModulusHex);
    Bytes e = hex_decode("010001");
    Bytes d = hex_decode(detail::kEkIssuerPrivateExponentHex);
    return RsaKeyPair{RsaPublicKey{n, e}, RsaPrivateKey{n, e, d}};
  }();
  return kp;
}

// ---------------------------------------------------------------------------
// The device

class SoftTpm {
 public:
  // Fresh TPM with an EK certificate from the built-in manufacturer.
  static SoftTpm create(const Config& cfg) {
    return create(cfg, builtin_ek_issuer(), kEkIssuerName);
  }

  // Custom manufacturer, for modeling TPMs whose EK chain is not trusted.
  static SoftTpm create(const Config& cfg, const RsaKeyPair& ek_issuer,
                        const std::string& issuer_name) {
    SoftTpm tpm;
    tpm.state_path_ = state_path(cfg);
    tpm.ek_ = rsa_generate();
    CertAttributes attrs = cfg.cert_attributes("TPM_CLIcert");
    for (auto& a : cfg.cert_attributes("TPM_CLI_EK_")) {
      attrs.push_back(std::move(a));
    }
    uint64_t now = utc_now_seconds();
    tpm.ek_cert_ = issue_certificate(issuer_name, ek_issuer.private_part, "EK",
                                     tpm.ek_.public_part, now,
                                     now + kEkCertValiditySeconds, attrs);
    tpm.pcr_bank_.assign(kNumPcrs, Sha1Digest::zero());
    tpm.save_locked();
    return tpm;
  }

  static SoftTpm load(const Config& cfg) {
    SoftTpm tpm;
    tpm.state_path_ = state_path(cfg);
    Record r;
    try {
      r = load_record(tpm.state_path_);
    } catch (const IoError& e) {
      throw TpmError("no TPM state at " + tpm.state_path_.string() + ": " +
                     e.what());
    }
    tpm.restore(r);
    return tpm;
  }

  // Load the device if it exists, otherwise manufacture a fresh one.
  static SoftTpm open(const Config& cfg) {
    if (std::filesystem::exists(state_path(cfg))) return load(cfg);
    return create(cfg);
  }

  static std::filesystem::path state_path(const Config& cfg) {
    return cfg.path("ethembaDir") / "tpmstate";
  }

  SoftTpm(SoftTpm&& other) noexcept { *this = std::move(other); }
  SoftTpm& operator=(SoftTpm&& other) noexcept {
    state_path_ = std::move(other.state_path_);
    owned_ = other.owned_;
    owner_auth_ = other.owner_auth_;
    srk_auth_ = other.srk_auth_;
    ek_ = std::move(other.ek_);
    ek_cert_ = std::move(other.ek_cert_);
    srk_ = std::move(other.srk_);
    pcr_bank_ = std::move(other.pcr_bank_);
    persistent_ = std::move(other.persistent_);
    loaded_ = std::move(other.loaded_);
    next_handle_ = other.next_handle_;
    return *this;
  }

  // -- ownership ----------------------------------------------------------

  bool owned() const {
    std::lock_guard<std::mutex> lock(mu_);
    return owned_;
  }

  void take_ownership(const std::string& owner_pwd,
                      const std::string& srk_pwd) {
    std::lock_guard<std::mutex> lock(mu_);
    if (owned_) throw TpmError("TPM already has an owner");
    owner_auth_ = encode_password(owner_pwd);
    srk_auth_ = encode_password(srk_pwd);
    srk_ = rsa_generate();
    owned_ = true;
    save_locked();
  }

  void clear_ownership(const std::string& owner_pwd) {
    std::lock_guard<std::mutex> lock(mu_);
    if (!owned_) throw TpmError("TPM has no owner to clear");
    if (encode_password(owner_pwd) != owner_auth_) {
      throw AuthError("owner password rejected");
    }
    owned_ = false;
    owner_auth_ = Sha1Digest::zero();
    srk_auth_ = Sha1Digest::zero();
    srk_.reset();
    persistent_.clear();
    loaded_.clear();
    pcr_bank_.assign(kNumPcrs, Sha1Digest::zero());
    save_locked();
  }

  // -- PCRs ---------------------------------------------------------------

  Sha1Digest pcr_read(uint8_t index) const {
    std::lock_guard<std::mutex> lock(mu_);
    check_pcr_index(index);
    return pcr_bank_[index];
  }

  Sha1Digest pcr_extend(uint8_t index, const Sha1Digest& d) {
    std::lock_guard<std::mutex> lock(mu_);
    check_pcr_index(index);
    Bytes buf = pcr_bank_[index].to_vector();
    buf.insert(buf.end(), d.bytes().begin(), d.bytes().end());
    pcr_bank_[index] = sha1(buf);
    save_locked();
    return pcr_bank_[index];
  }

  const RsaPublicKey& ek_public() const { return ek_.public_part; }
  const CertificateRecord& ek_certificate() const { return ek_cert_; }

  // -- identity keys ------------------------------------------------------

  // Creates a fresh identity key and the encrypted request that carries its
  // public part plus the EK certificate to a Privacy CA.
  std::pair<uint32_t, Record> collate_identity_request(
      const std::string& srk_pwd, const std::string& aik_label,
      const std::string& aik_pwd, const RsaPublicKey& pca_pub) {
    std::lock_guard<std::mutex> lock(mu_);
    require_owned_srk(srk_pwd);
    TpmKey aik;
    aik.usage = KeyUsage::kIdentity;
    aik.is_volatile = true;
    aik.is_migratable = false;
    aik.auth = encode_password(aik_pwd);
    aik.keys = rsa_generate();
    uint32_t handle = next_handle_++;
    loaded_[handle] = aik;

    Record payload{RecordTag::kIdentityPayload,
                   {encode_public_key(aik.keys.public_part),
                    encode_certificate(ek_cert_), to_bytes(aik_label)}};
    AesKey key = aes_generate_key();
    AesIv iv = aes_generate_iv();
    Record request{RecordTag::kIdentityRequest,
                   {rsa_encrypt(pca_pub, key.bytes), iv.bytes,
                    aes_encrypt_record(key, iv, payload)}};
    return {handle, request};
  }

  // TPM_ActivateIdentity: open an EK-targeted blob, releasing the payload
  // only when the embedded digest names the loaded key.
  Bytes activate_identity(const std::string& srk_pwd, uint32_t handle,
                          const Record& blob) {
    std::lock_guard<std::mutex> lock(mu_);
    require_owned_srk(srk_pwd);
    const TpmKey& aik = loaded_key(handle);
    expect_tag(blob, RecordTag::kEkWrappedBlob);
    if (blob.fields.size() != 3) throw ParseError("EK blob field count");
    Bytes secret = rsa_decrypt(ek_.private_part, record_field(blob, 0));
    size_t key_len = kDefaultAesKeyBits / 8;
    if (secret.size() != key_len + Sha1Digest::kSize) {
      throw CryptoError("EK blob secret has unexpected size");
    }
    Bytes session(secret.begin(), secret.begin() + key_len);
    Sha1Digest digest = Sha1Digest::from_bytes(
        std::span<const uint8_t>(secret).subspan(key_len));
    if (digest != public_key_digest(aik.keys.public_part)) {
      throw ActivationError("activation blob names a different identity key");
    }
    return aes_decrypt(AesKey{session}, AesIv{record_field(blob, 1)},
                       record_field(blob, 2));
  }

  // Moves a loaded (volatile) key into persistent storage under a UUID.
  void persist_key(const std::string& srk_pwd, uint32_t handle,
                   const Uuid& uuid) {
    std::lock_guard<std::mutex> lock(mu_);
    require_owned_srk(srk_pwd);
    TpmKey key = loaded_key(handle);
    if (persistent_.count(uuid) != 0) {
      throw TpmError("UUID already occupied in persistent storage");
    }
    key.is_volatile = false;
    persistent_[uuid] = std::move(key);
    loaded_.erase(handle);
    save_locked();
  }

  void unload_key(uint32_t handle) {
    std::lock_guard<std::mutex> lock(mu_);
    loaded_.erase(handle);
  }

  // -- quoting ------------------------------------------------------------

  Quote quote(const std::string& srk_pwd, const std::string& aik_pwd,
              const std::string& aik_label, const PcrSelection& selection,
              std::span<const uint8_t> nonce, const TpmKeyDb& keydb) {
    std::lock_guard<std::mutex> lock(mu_);
    require_owned_srk(srk_pwd);
    if (selection.empty()) throw TpmError("empty PCR selection");
    const TpmKey& aik = persistent_by_label(aik_label, keydb);
    if (aik.usage != KeyUsage::kIdentity) {
      throw TpmError("key `" + aik_label + "` is not an identity key");
    }
    if (encode_password(aik_pwd) != aik.auth) {
      throw AuthError("AIK password rejected");
    }
    std::vector<Sha1Digest> values;
    for (uint8_t i : selection.indices()) values.push_back(pcr_bank_[i]);
    Quote q;
    q.selection = selection;
    q.composite_digest = pcr_composite_digest(selection, values);
    q.nonce.assign(nonce.begin(), nonce.end());
    q.signature = rsa_sign(aik.keys.private_part,
                           quote_info_bytes(q.composite_digest, nonce));
    return q;
  }

  // -- general keys -------------------------------------------------------

  RsaPublicKey create_key(bool is_binding, bool is_volatile,
                          bool is_migratable, const std::string& srk_pwd,
                          const std::string& key_pwd,
                          const std::string& key_label,
                          const std::optional<PcrSelection>& pcr_binding,
                          TpmKeyDb& keydb) {
    std::lock_guard<std::mutex> lock(mu_);
    return create_key_locked(is_binding, is_volatile, is_migratable, srk_pwd,
                             key_pwd, key_label, pcr_binding, keydb);
  }

  CertifyResult certify_key(bool is_binding, bool is_volatile,
                            bool is_migratable, const std::string& srk_pwd,
                            const std::string& key_pwd,
                            const std::string& key_label,
                            const std::optional<PcrSelection>& pcr_binding,
                            std::span<const uint8_t> nonce,
                            const std::string& aik_pwd,
                            const std::string& aik_label, TpmKeyDb& keydb,
                            const CertDb& certdb) {
    std::lock_guard<std::mutex> lock(mu_);
    if (nonce.size() != Sha1Digest::kSize) {
      throw TpmError("certification nonce must be 20 bytes");
    }
    std::optional<Uuid> aik_uuid = keydb.get(aik_label);
    if (!aik_uuid) throw NotFoundError("unknown AIK label `" + aik_label + "`");
    std::optional<CertificateRecord> aik_cert = certdb.get(*aik_uuid);
    if (!aik_cert) {
      throw TpmError("AIK `" + aik_label + "` has no certificate");
    }
    const TpmKey& aik = persistent_by_label(aik_label, keydb);
    if (encode_password(aik_pwd) != aik.auth) {
      throw AuthError("AIK password rejected");
    }
    CertifyResult result;
    result.public_part =
        create_key_locked(is_binding, is_volatile, is_migratable, srk_pwd,
                          key_pwd, key_label, pcr_binding, keydb);
    Bytes signed_data = public_key_digest(result.public_part).to_vector();
    signed_data.insert(signed_data.end(), nonce.begin(), nonce.end());
    result.certification = rsa_sign(aik.keys.private_part, signed_data);
    result.aik_cert = *aik_cert;
    return result;
  }

  Bytes bind(std::span<const uint8_t> data, const std::string& srk_pwd,
             const std::string& key_pwd, const std::string& key_label,
             const TpmKeyDb& keydb) {
    std::lock_guard<std::mutex> lock(mu_);
    const TpmKey& key = bind_key_checked(srk_pwd, key_pwd, key_label, keydb);
    return bind_external(key.keys.public_part, data);
  }

  Bytes unbind(std::span<const uint8_t> data, const std::string& srk_pwd,
               const std::string& key_pwd, const std::string& key_label,
               const TpmKeyDb& keydb) {
    std::lock_guard<std::mutex> lock(mu_);
    const TpmKey& key = bind_key_checked(srk_pwd, key_pwd, key_label, keydb);
    return unbind_chunked(key.keys.private_part, data);
  }

  void save() const {
    std::lock_guard<std::mutex> lock(mu_);
    save_locked();
  }

 private:
  static constexpr uint64_t kEkCertValiditySeconds = 3650ull * 86400;

  SoftTpm() = default;

  void check_pcr_index(uint8_t index) const {
    if (index >= kNumPcrs) {
      throw TpmError("PCR index " + std::to_string(index) + " out of range");
    }
  }

  void require_owned_srk(const std::string& srk_pwd) const {
    if (!owned_) throw TpmError("TPM is not owned");
    if (encode_password(srk_pwd) != srk_auth_) {
      throw AuthError("SRK password rejected");
    }
  }

  const TpmKey& loaded_key(uint32_t handle) const {
    auto it = loaded_.find(handle);
    if (it == loaded_.end()) {
      throw TpmError("no key loaded under handle " + std::to_string(handle));
    }
    return it->second;
  }

  const TpmKey& persistent_by_label(const std::string& label,
                                    const TpmKeyDb& keydb) const {
    std::optional<Uuid> uuid = keydb.get(label);
    if (!uuid) throw NotFoundError("unknown key label `" + label + "`");
    auto it = persistent_.find(*uuid);
    if (it == persistent_.end()) {
      throw StoreError("key database names UUID " + uuid->text() +
                       " absent from TPM persistent storage");
    }
    return it->second;
  }

  const TpmKey& bind_key_checked(const std::string& srk_pwd,
                                 const std::string& key_pwd,
                                 const std::string& key_label,
                                 const TpmKeyDb& keydb) const {
    require_owned_srk(srk_pwd);
    const TpmKey& key = persistent_by_label(key_label, keydb);
    if (key.usage != KeyUsage::kBind) {
      throw TpmError("key `" + key_label + "` is not a binding key");
    }
    if (encode_password(key_pwd) != key.auth) {
      throw AuthError("key password rejected");
    }
    return key;
  }

  RsaPublicKey create_key_locked(bool is_binding, bool is_volatile,
                                 bool is_migratable,
                                 const std::string& srk_pwd,
                                 const std::string& key_pwd,
                                 const std::string& key_label,
                                 const std::optional<PcrSelection>& pcr_binding,
                                 TpmKeyDb& keydb) {
    require_owned_srk(srk_pwd);
    if (keydb.get(key_label)) {
      throw TpmError("key label `" + key_label + "` already in use");
    }
    TpmKey key;
    key.usage = is_binding ? KeyUsage::kBind : KeyUsage::kSeal;
    key.is_volatile = is_volatile;
    key.is_migratable = is_migratable;
    key.pcr_binding = pcr_binding;
    key.auth = encode_password(key_pwd);
    key.keys = rsa_generate();
    Uuid uuid = Uuid::random();
    persistent_[uuid] = key;
    keydb.put(key_label, uuid);
    save_locked();
    return key.keys.public_part;
  }

  void save_locked() const {
    Record r{RecordTag::kTpmState, {}};
    r.fields.push_back(u8_field(owned_ ? 1 : 0));
    r.fields.push_back(owner_auth_.to_vector());
    r.fields.push_back(srk_auth_.to_vector());
    r.fields.push_back(encode_public_key(ek_.public_part));
    r.fields.push_back(encode_private_key(ek_.private_part));
    r.fields.push_back(encode_certificate(ek_cert_));
    r.fields.push_back(srk_ ? encode_public_key(srk_->public_part) : Bytes{});
    r.fields.push_back(srk_ ? encode_private_key(srk_->private_part)
                            : Bytes{});
    Bytes bank;
    for (const Sha1Digest& v : pcr_bank_) {
      bank.insert(bank.end(), v.bytes().begin(), v.bytes().end());
    }
    r.fields.push_back(std::move(bank));
    for (const auto& [uuid, key] : persistent_) {
      Bytes f = uuid.to_vector();
      Bytes kb = encode_record(tpm_key_record(key));
      f.insert(f.end(), kb.begin(), kb.end());
      r.fields.push_back(std::move(f));
    }
    std::filesystem::create_directories(state_path_.parent_path());
    save_record(state_path_, r);
  }

  void restore(const Record& r) {
    expect_tag(r, RecordTag::kTpmState);
    if (r.fields.size() < 9) throw ParseError("TPM state record field count");
    owned_ = field_as_u8(r, 0) != 0;
    owner_auth_ = Sha1Digest::from_bytes(record_field(r, 1));
    srk_auth_ = Sha1Digest::from_bytes(record_field(r, 2));
    ek_.public_part = decode_public_key(record_field(r, 3));
    ek_.private_part = decode_private_key(record_field(r, 4));
    ek_cert_ = decode_certificate(record_field(r, 5));
    if (!record_field(r, 6).empty()) {
      srk_ = RsaKeyPair{decode_public_key(record_field(r, 6)),
                        decode_private_key(record_field(r, 7))};
    }
    const Bytes& bank = record_field(r, 8);
    if (bank.size() != kNumPcrs * Sha1Digest::kSize) {
      throw ParseError("PCR bank has wrong size");
    }
    pcr_bank_.clear();
    for (size_t i = 0; i < kNumPcrs; ++i) {
      pcr_bank_.push_back(Sha1Digest::from_bytes(
          std::span<const uint8_t>(bank).subspan(i * Sha1Digest::kSize,
                                                 Sha1Digest::kSize)));
    }
    for (size_t i = 9; i < r.fields.size(); ++i) {
      const Bytes& f = r.fields[i];
      if (f.size() < Uuid::kSize) throw ParseError("persistent key entry");
      Uuid uuid = Uuid::from_bytes(
          std::span<const uint8_t>(f).subspan(0, Uuid::kSize));
      persistent_[uuid] = decode_tpm_key(decode_record(
          std::span<const uint8_t>(f).subspan(Uuid::kSize)));
    }
  }

  mutable std::mutex mu_;
  std::filesystem::path state_path_;

  bool owned_ = false;
  Sha1Digest owner_auth_ = Sha1Digest::zero();
  Sha1Digest srk_auth_ = Sha1Digest::zero();
  RsaKeyPair ek_;
  CertificateRecord ek_cert_;
  std::optional<RsaKeyPair> srk_;
  std::vector<Sha1Digest> pcr_bank_;
  std::map<Uuid, TpmKey> persistent_;
  std::map<uint32_t, TpmKey> loaded_;
  uint32_t next_handle_ = 1;
};

}  // namespace attestkit
