// Copyright 2026 The attestkit Authors
// Use of this source code is governed by the Apache-2.0 license that can be
// found in the LICENSE file.
//
// AIK certification against a Privacy CA. The client proves possession of a
// TPM with a vendor-certified EK without ever showing the EK identity to the
// attestation verifier; the CA proves the AIK lives in that TPM by wrapping
// its messages so only TPM_ActivateIdentity can open them.

#pragma once

#include "attestkit/net.hpp"
#include "attestkit/tpm.hpp"

namespace attestkit {

struct PcaServerConfig {
  RsaKeyPair pca_keys;
  std::string pca_name;
  RsaPublicKey ek_issuer_pub;
  uint64_t aik_validity_seconds = 365ull * 86400;
  CertAttributes cert_attributes;
};

inline PcaServerConfig pca_server_config(const Config& cfg,
                                         RsaKeyPair pca_keys) {
  PcaServerConfig sc;
  sc.pca_keys = std::move(pca_keys);
  sc.pca_name = cfg.get("PCAcertCommonName");
  sc.ek_issuer_pub = builtin_ek_issuer().public_part;
  sc.cert_attributes = cfg.cert_attributes("PCAcert");
  for (auto& a : cfg.cert_attributes("TPM_CLI_AIK_")) {
    sc.cert_attributes.push_back(std::move(a));
  }
  return sc;
}

enum class PcaOutcome {
  kIssued,
  kBadRequest,
  kRejectedEk,
  kRejectedNonce,
};

// Serves one certification session on an accepted connection.
inline PcaOutcome pca_server_handle(Endpoint& peer,
                                    const PcaServerConfig& cfg) {
  if (peer.receive_command() != NetCommand::kPcaRequest) {
    peer.send_nack();
    return PcaOutcome::kBadRequest;
  }
  std::optional<Record> request =
      peer.receive_record(RecordTag::kIdentityRequest);
  RsaPublicKey aik_pub;
  CertificateRecord ek_cert;
  std::string aik_label;
  try {
    if (!request || request->fields.size() != 3) {
      throw ParseError("malformed identity request");
    }
    Bytes aes_key =
        rsa_decrypt(cfg.pca_keys.private_part, record_field(*request, 0));
    Record payload =
        aes_decrypt_record(AesKey{std::move(aes_key)},
                           AesIv{record_field(*request, 1)},
                           record_field(*request, 2));
    expect_tag(payload, RecordTag::kIdentityPayload);
    if (payload.fields.size() != 3) {
      throw ParseError("malformed identity payload");
    }
    aik_pub = decode_public_key(record_field(payload, 0));
    ek_cert = decode_certificate(record_field(payload, 1));
    aik_label = field_as_string(payload, 2);
  } catch (const Error&) {
    peer.send_nack();
    return PcaOutcome::kBadRequest;
  }

  if (!verify_certificate(ek_cert, cfg.ek_issuer_pub, utc_now_seconds())) {
    peer.send_nack();
    return PcaOutcome::kRejectedEk;
  }

  // Challenge: the nonce travels only inside an EK-targeted blob, so a
  // correct echo proves the requesting platform holds the certified EK and
  // the named AIK.
  Bytes nonce = random_bytes(Sha1Digest::kSize);
  Sha1Digest aik_digest = public_key_digest(aik_pub);
  Record blob1 = make_ek_blob(ek_cert.subject_public_key, aik_digest, nonce);
  peer.send_command(NetCommand::kPcaResponse);
  peer.send_record(
      Record{RecordTag::kPcaResponse1, {encode_record(blob1)}});

  std::optional<Record> echo = peer.receive_record(RecordTag::kRaw);
  if (!echo || echo->fields.size() != 1 ||
      record_field(*echo, 0) != nonce) {
    peer.send_nack();
    return PcaOutcome::kRejectedNonce;
  }

  // Issue and wrap: certificate under a one-time AES key, key and IV under
  // the same EK+AIK targeting as the nonce.
  uint64_t now = utc_now_seconds();
  CertificateRecord cert = issue_certificate(
      cfg.pca_name, cfg.pca_keys.private_part, aik_label, aik_pub, now,
      now + cfg.aik_validity_seconds, cfg.cert_attributes);
  AesKey key2 = aes_generate_key();
  AesIv iv2 = aes_generate_iv();
  Bytes key_iv = key2.bytes;
  key_iv.insert(key_iv.end(), iv2.bytes.begin(), iv2.bytes.end());
  Record blob2 = make_ek_blob(ek_cert.subject_public_key, aik_digest, key_iv);
  Bytes cert_cipher =
      aes_encrypt(key2, iv2, to_bytes(armor_certificate(cert)));
  peer.send_command(NetCommand::kPcaResponse);
  peer.send_record(Record{RecordTag::kPcaResponse2,
                          {encode_record(blob2), std::move(cert_cipher)}});
  return PcaOutcome::kIssued;
}

struct PcaClientParams {
  std::string host;
  uint16_t port = 0;
  std::string aik_label;
  std::string srk_pwd;
  std::string aik_pwd;
  RsaPublicKey pca_pub;
};

struct PcaClientResult {
  Uuid aik_uuid;
  CertificateRecord aik_cert;
};

// Runs the whole certification from the client side: collate an identity
// request, prove EK+AIK possession by activating the CA's blobs, then store
// key and certificate under a fresh UUID.
inline PcaClientResult pca_client_run(SoftTpm& tpm, TpmKeyDb& keydb,
                                      CertDb& certdb,
                                      const PcaClientParams& p) {
  if (keydb.get(p.aik_label)) {
    throw StoreError("AIK label `" + p.aik_label + "` already registered");
  }
  auto [handle, request] = tpm.collate_identity_request(
      p.srk_pwd, p.aik_label, p.aik_pwd, p.pca_pub);
  struct Unloader {
    SoftTpm* tpm;
    uint32_t handle;
    ~Unloader() { tpm->unload_key(handle); }
  } unloader{&tpm, handle};

  Endpoint peer = Endpoint::connect(p.host, p.port);

  auto tagged = [](int phase, const std::string& msg) {
    return ProtocolError("pca phase " + std::to_string(phase) + ": " + msg);
  };

  Bytes nonce;
  try {
    peer.send_command(NetCommand::kPcaRequest);
    peer.send_record(request);
    if (peer.receive_command() != NetCommand::kPcaResponse) {
      throw ProtocolError("server refused the identity request");
    }
    std::optional<Record> resp1 =
        peer.receive_record(RecordTag::kPcaResponse1);
    if (!resp1 || resp1->fields.size() != 1) {
      throw ProtocolError("malformed certification challenge");
    }
    Record blob1 = decode_record(record_field(*resp1, 0));
    nonce = tpm.activate_identity(p.srk_pwd, handle, blob1);
  } catch (const Error& e) {
    throw tagged(1, e.what());
  }

  CertificateRecord cert;
  try {
    peer.send_record(raw_record(nonce));
    if (peer.receive_command() != NetCommand::kPcaResponse) {
      throw ProtocolError("server rejected the nonce echo");
    }
    std::optional<Record> resp2 =
        peer.receive_record(RecordTag::kPcaResponse2);
    if (!resp2 || resp2->fields.size() != 2) {
      throw ProtocolError("malformed certificate response");
    }
    Record blob2 = decode_record(record_field(*resp2, 0));
    Bytes key_iv = tpm.activate_identity(p.srk_pwd, handle, blob2);
    size_t key_len = kDefaultAesKeyBits / 8;
    if (key_iv.size() != key_len + kAesBlockSize) {
      throw ProtocolError("unexpected key material size");
    }
    AesKey key2{Bytes(key_iv.begin(), key_iv.begin() + key_len)};
    AesIv iv2{Bytes(key_iv.begin() + key_len, key_iv.end())};
    Bytes armored = aes_decrypt(key2, iv2, record_field(*resp2, 1));
    cert = parse_armored_certificate(
        std::string(armored.begin(), armored.end()));
  } catch (const Error& e) {
    throw tagged(2, e.what());
  }

  Uuid uuid = Uuid::random();
  tpm.persist_key(p.srk_pwd, handle, uuid);
  keydb.put(p.aik_label, uuid);
  certdb.put(uuid, cert);
  return {uuid, cert};
}

}  // namespace attestkit
