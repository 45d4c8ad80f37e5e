// Copyright 2026 The attestkit Authors
// Use of this source code is governed by the Apache-2.0 license that can be
// found in the LICENSE file.
//
// Remote attestation. The server challenges with a fresh nonce; the client
// answers with an AIK-signed quote of PCR-10, the AIK certificate and its
// measurement list. The server re-derives a virtual PCR from the whitelisted
// list and accepts only when the quoted register agrees. Also houses the
// validation half of certified signing keys.

#pragma once

#include "attestkit/net.hpp"
#include "attestkit/pca.hpp"
#include "attestkit/tpm.hpp"

namespace attestkit {

inline PcrSelection select_pcr(uint8_t index) {
  return PcrSelection::single(index);
}

enum class RaFailure {
  kBadAikCert,
  kUnknownMeasurement,
  kVpcrMismatch,
  kBadSignature,
  kBadNonce,
};

inline const char* ra_failure_reason(RaFailure f) {
  switch (f) {
    case RaFailure::kBadAikCert:
      return "bad-aik-cert";
    case RaFailure::kUnknownMeasurement:
      return "unknown-measurement";
    case RaFailure::kVpcrMismatch:
      return "vpcr-mismatch";
    case RaFailure::kBadSignature:
      return "bad-signature";
    case RaFailure::kBadNonce:
      return "bad-nonce";
  }
  return "unknown";
}

struct MeasurementCheck {
  bool ok = false;
  Sha1Digest vpcr;  // valid when ok
  MeasurementEntry offending;  // valid when not ok
};

// Every PCR-10 entry must be whitelisted under its exact hash and path; the
// reward is the virtual PCR the honest register must equal.
inline MeasurementCheck validate_measurements(const MeasurementList& ml,
                                              const KnownHashesList& khl) {
  for (const MeasurementEntry& e : ml.entries) {
    if (e.pcr != kImaPcr) continue;
    if (!khl.contains(e.hash.hex(), e.path)) {
      return {false, Sha1Digest::zero(), e};
    }
  }
  return {true, compute_vpcr(ml, kImaPcr), MeasurementEntry{}};
}

// The three legs of quote checking, separable so a verifier can name the
// first one that fails.

// Signature must cover the exact quote structure, and the claimed selection
// must be the one the verifier asked for (the selection itself is not under
// the signature, only the composite digest is).
inline bool quote_signature_valid(const PcrSelection& expected,
                                  const Quote& q,
                                  const CertificateRecord& aik_cert) {
  if (q.selection != expected) return false;
  if (q.nonce.size() != Sha1Digest::kSize) return false;
  return rsa_verify(aik_cert.subject_public_key,
                    quote_info_bytes(q.composite_digest, q.nonce),
                    q.signature);
}

inline bool quote_nonce_matches(const Quote& q,
                                std::span<const uint8_t> nonce) {
  return q.nonce.size() == nonce.size() &&
         std::equal(q.nonce.begin(), q.nonce.end(), nonce.begin());
}

// Single-register selections only: each candidate is one expected value for
// the selected PCR.
inline bool quote_composite_matches(const PcrSelection& selection,
                                    const Quote& q,
                                    std::span<const Sha1Digest> candidates) {
  if (selection.indices().size() != 1) return false;
  for (const Sha1Digest& c : candidates) {
    std::vector<Sha1Digest> values{c};
    if (pcr_composite_digest(selection, values) == q.composite_digest) {
      return true;
    }
  }
  return false;
}

inline bool quote_validation(const PcrSelection& selection, const Quote& q,
                             const CertificateRecord& aik_cert,
                             std::span<const Sha1Digest> vpcr_candidates,
                             std::span<const uint8_t> nonce) {
  return quote_signature_valid(selection, q, aik_cert) &&
         quote_nonce_matches(q, nonce) &&
         quote_composite_matches(selection, q, vpcr_candidates);
}

// Certified-signing-key check: the AIK signed sha1(public part) ∥ nonce, so
// signature validity pins both the key material and the challenge.
inline bool certify_key_validation(const CertifyResult& r,
                                   std::span<const uint8_t> nonce) {
  Bytes data = public_key_digest(r.public_part).to_vector();
  data.insert(data.end(), nonce.begin(), nonce.end());
  return rsa_verify(r.aik_cert.subject_public_key, data, r.certification);
}

// Attestation certificates live under a fixed UUID prefix plus the AIK's
// node, so clients can retrieve them knowing only the AIK.
inline Uuid attestation_cert_uuid(const Uuid& aik_uuid) {
  return Uuid::from_text("00000009-0008-0007-0605-" + aik_uuid.node_hex());
}

struct RaServerConfig {
  RsaKeyPair ra_keys;
  std::string ra_name;
  RsaPublicKey pca_trusted_pub;
  std::string pca_trusted_name;
  KnownHashesList khl;
  uint64_t cert_expiry_seconds = 300;
  CertAttributes cert_attributes;
};

inline RaServerConfig ra_server_config(const Config& cfg, RsaKeyPair ra_keys,
                                       KnownHashesList khl,
                                       RsaPublicKey pca_pub) {
  RaServerConfig sc;
  sc.ra_keys = std::move(ra_keys);
  sc.ra_name = cfg.get("RAcertCommonName");
  sc.pca_trusted_pub = std::move(pca_pub);
  sc.pca_trusted_name = cfg.get("PCAcertCommonName");
  sc.khl = std::move(khl);
  sc.cert_expiry_seconds = cfg.integer("RAcert_Expiry");
  sc.cert_attributes = cfg.cert_attributes("RAcert");
  return sc;
}

struct RaVerdict {
  bool ok = false;
  std::optional<RaFailure> failure;
  std::optional<CertificateRecord> attestation_cert;
};

// Serves one attestation session: challenge, evidence, pipeline of checks in
// fixed order, certificate or refusal. The reported reason is the first
// failing check.
inline RaVerdict ra_server_handle(Endpoint& peer, const RaServerConfig& cfg) {
  if (peer.receive_command() != NetCommand::kRaRequest) {
    peer.send_nack();
    throw ProtocolError("peer did not open with an attestation request");
  }
  Bytes nonce = random_bytes(Sha1Digest::kSize);
  peer.send_command(NetCommand::kRaResponse);
  peer.send_record(Record{RecordTag::kRaChallenge, {nonce}});

  std::optional<Record> ev = peer.receive_record(RecordTag::kRaEvidence);
  if (!ev || ev->fields.size() != 3) {
    peer.send_nack();
    peer.send_record(raw_record(to_bytes("malformed-evidence")));
    throw ProtocolError("malformed attestation evidence");
  }
  Quote quote;
  CertificateRecord aik_cert;
  MeasurementList ml;
  try {
    quote = decode_quote(decode_record(record_field(*ev, 0)));
    aik_cert = decode_certificate(record_field(*ev, 1));
    ml = decode_measurement_list(decode_record(record_field(*ev, 2)));
  } catch (const ParseError& e) {
    peer.send_nack();
    peer.send_record(raw_record(to_bytes("malformed-evidence")));
    throw ProtocolError(std::string("undecodable evidence: ") + e.what());
  }

  auto refuse = [&](RaFailure f) {
    peer.send_nack();
    peer.send_record(raw_record(to_bytes(ra_failure_reason(f))));
    RaVerdict v;
    v.failure = f;
    return v;
  };

  if (aik_cert.issuer_name != cfg.pca_trusted_name ||
      !verify_certificate(aik_cert, cfg.pca_trusted_pub,
                          utc_now_seconds())) {
    return refuse(RaFailure::kBadAikCert);
  }
  MeasurementCheck mc = validate_measurements(ml, cfg.khl);
  if (!mc.ok) return refuse(RaFailure::kUnknownMeasurement);

  PcrSelection expected = select_pcr(kImaPcr);
  if (!quote_signature_valid(expected, quote, aik_cert)) {
    return refuse(RaFailure::kBadSignature);
  }
  if (!quote_nonce_matches(quote, nonce)) {
    return refuse(RaFailure::kBadNonce);
  }
  std::vector<Sha1Digest> candidates{mc.vpcr};
  if (!quote_composite_matches(expected, quote, candidates)) {
    return refuse(RaFailure::kVpcrMismatch);
  }

  uint64_t now = utc_now_seconds();
  CertificateRecord cert = issue_certificate(
      cfg.ra_name, cfg.ra_keys.private_part, aik_cert.subject_label,
      aik_cert.subject_public_key, now, now + cfg.cert_expiry_seconds,
      cfg.cert_attributes);
  peer.send_ack();
  peer.send_record(certificate_record(cert));
  RaVerdict v;
  v.ok = true;
  v.attestation_cert = cert;
  return v;
}

struct RaClientParams {
  std::string host;
  uint16_t port = 0;
  std::string aik_label;
  std::string srk_pwd;
  std::string aik_pwd;
  std::filesystem::path ima_log;
};

// Runs one attestation from the client side; returns the UUID the received
// attestation certificate was stored under.
inline Uuid ra_client_run(SoftTpm& tpm, const TpmKeyDb& keydb, CertDb& certdb,
                          const RaClientParams& p) {
  std::optional<Uuid> aik_uuid = keydb.get(p.aik_label);
  if (!aik_uuid) {
    throw NotFoundError("unknown AIK label `" + p.aik_label + "`");
  }
  std::optional<CertificateRecord> aik_cert = certdb.get(*aik_uuid);
  if (!aik_cert) {
    throw NotFoundError("AIK `" + p.aik_label +
                        "` has no certificate; certify it first");
  }
  MeasurementList ml = measurement_list_from_file(p.ima_log);

  Endpoint peer = Endpoint::connect(p.host, p.port);
  peer.send_command(NetCommand::kRaRequest);
  if (peer.receive_command() != NetCommand::kRaResponse) {
    throw ProtocolError("server refused the attestation request");
  }
  std::optional<Record> challenge =
      peer.receive_record(RecordTag::kRaChallenge);
  if (!challenge || challenge->fields.size() != 1 ||
      record_field(*challenge, 0).size() != Sha1Digest::kSize) {
    throw ProtocolError("malformed attestation challenge");
  }
  Bytes nonce = record_field(*challenge, 0);

  Quote quote = tpm.quote(p.srk_pwd, p.aik_pwd, p.aik_label,
                          select_pcr(kImaPcr), nonce, keydb);
  peer.send_record(Record{RecordTag::kRaEvidence,
                          {encode_record(quote_record(quote)),
                           encode_certificate(*aik_cert),
                           encode_record(measurement_list_record(ml))}});

  NetCommand reply = peer.receive_command();
  if (reply == NetCommand::kAck) {
    std::optional<Record> certr =
        peer.receive_record(RecordTag::kCertificate);
    if (!certr) throw ProtocolError("missing attestation certificate");
    CertificateRecord att = decode_certificate(encode_record(*certr));
    Uuid att_uuid = attestation_cert_uuid(*aik_uuid);
    certdb.put(att_uuid, att);
    return att_uuid;
  }
  if (reply == NetCommand::kNack) {
    std::optional<Record> reason = peer.receive_record(RecordTag::kRaw);
    std::string text =
        reason ? field_as_string(*reason, 0) : std::string("unspecified");
    throw ProtocolError("attestation rejected: " + text);
  }
  throw ProtocolError("unexpected server reply");
}

}  // namespace attestkit
