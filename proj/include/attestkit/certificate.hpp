// Copyright 2026 The attestkit Authors
// Use of this source code is governed by the Apache-2.0 license that can be
// found in the LICENSE file.
//
// Minimal certificate record used for EK, AIK and attestation certificates:
// a canonical encoding signed with RSA instead of full X.509, so signatures
// stay language-portable without an ASN.1 stack.

#pragma once

#include <chrono>
#include <string>
#include <utility>
#include <vector>

#include "attestkit/blob.hpp"
#include "attestkit/rsa.hpp"

namespace attestkit {

constexpr const char* kCertificateArmorLabel = "ATTESTKIT CERTIFICATE";

inline uint64_t utc_now_seconds() {
  return static_cast<uint64_t>(std::chrono::duration_cast<std::chrono::seconds>(
                                   std::chrono::system_clock::now()
                                       .time_since_epoch())
                                   .count());
}

using CertAttributes = std::vector<std::pair<std::string, std::string>>;

struct CertificateRecord {
  std::string subject_label;
  std::string issuer_name;
  uint64_t serial = 0;
  uint64_t not_before = 0;  // UTC seconds
  uint64_t not_after = 0;
  RsaPublicKey subject_public_key;
  CertAttributes attributes;  // order-preserving
  Bytes signature;

  friend bool operator==(const CertificateRecord&,
                         const CertificateRecord&) = default;
};

namespace detail {

inline Bytes encode_attributes(const CertAttributes& attrs) {
  Bytes out;
  append_u32(out, static_cast<uint32_t>(attrs.size()));
  for (const auto& [k, v] : attrs) {
    append_u32(out, static_cast<uint32_t>(k.size()));
    out.insert(out.end(), k.begin(), k.end());
    append_u32(out, static_cast<uint32_t>(v.size()));
    out.insert(out.end(), v.begin(), v.end());
  }
  return out;
}

inline CertAttributes decode_attributes(std::span<const uint8_t> in) {
  uint32_t count = read_u32(in);
  size_t pos = 4;
  CertAttributes attrs;
  attrs.reserve(count);
  auto take = [&](size_t n) {
    if (pos + n > in.size()) throw ParseError("attribute block truncated");
    std::string s(in.begin() + pos, in.begin() + pos + n);
    pos += n;
    return s;
  };
  for (uint32_t i = 0; i < count; ++i) {
    uint32_t klen = read_u32(in.subspan(pos));
    pos += 4;
    std::string k = take(klen);
    if (pos + 4 > in.size()) throw ParseError("attribute block truncated");
    uint32_t vlen = read_u32(in.subspan(pos));
    pos += 4;
    std::string v = take(vlen);
    attrs.emplace_back(std::move(k), std::move(v));
  }
  if (pos != in.size()) throw ParseError("trailing bytes in attribute block");
  return attrs;
}

// The to-be-signed portion: everything but the signature field.
inline Bytes certificate_tbs(const CertificateRecord& c) {
  return encode_record(Record{RecordTag::kCertificate,
                              {to_bytes(c.subject_label),
                               to_bytes(c.issuer_name),
                               u64_field(c.serial),
                               u64_field(c.not_before),
                               u64_field(c.not_after),
                               encode_public_key(c.subject_public_key),
                               encode_attributes(c.attributes)}});
}

}  // namespace detail

inline Record certificate_record(const CertificateRecord& c) {
  return Record{RecordTag::kCertificate,
                {to_bytes(c.subject_label),
                 to_bytes(c.issuer_name),
                 u64_field(c.serial),
                 u64_field(c.not_before),
                 u64_field(c.not_after),
                 encode_public_key(c.subject_public_key),
                 detail::encode_attributes(c.attributes),
                 c.signature}};
}

inline Bytes encode_certificate(const CertificateRecord& c) {
  return encode_record(certificate_record(c));
}

inline CertificateRecord decode_certificate(std::span<const uint8_t> encoded) {
  Record r = expect_tag(decode_record(encoded), RecordTag::kCertificate);
  if (r.fields.size() != 8) {
    throw ParseError("certificate record has wrong field count");
  }
  CertificateRecord c;
  c.subject_label = field_as_string(r, 0);
  c.issuer_name = field_as_string(r, 1);
  c.serial = field_as_u64(r, 2);
  c.not_before = field_as_u64(r, 3);
  c.not_after = field_as_u64(r, 4);
  c.subject_public_key = decode_public_key(record_field(r, 5));
  c.attributes = detail::decode_attributes(record_field(r, 6));
  c.signature = record_field(r, 7);
  return c;
}

inline CertificateRecord issue_certificate(const std::string& issuer_name,
                                           const RsaPrivateKey& issuer_priv,
                                           const std::string& subject_label,
                                           const RsaPublicKey& subject_pub,
                                           uint64_t not_before,
                                           uint64_t not_after,
                                           const CertAttributes& attributes) {
  if (not_before > not_after) {
    throw Error("certificate validity window is inverted");
  }
  CertificateRecord c;
  c.subject_label = subject_label;
  c.issuer_name = issuer_name;
  c.serial = read_u64(random_bytes(8)) >> 1;
  c.not_before = not_before;
  c.not_after = not_after;
  c.subject_public_key = subject_pub;
  c.attributes = attributes;
  c.signature = rsa_sign(issuer_priv, detail::certificate_tbs(c));
  return c;
}

// Total check: signature under issuer_pub and the validity window both hold.
// Never throws; malformed material simply verifies false.
inline bool verify_certificate(const CertificateRecord& c,
                               const RsaPublicKey& issuer_pub, uint64_t now) {
  try {
    if (now < c.not_before || now > c.not_after) return false;
    return rsa_verify(issuer_pub, detail::certificate_tbs(c), c.signature);
  } catch (const Error&) {
    return false;
  }
}

inline std::string armor_certificate(const CertificateRecord& c) {
  return armor(kCertificateArmorLabel, encode_certificate(c));
}

inline CertificateRecord parse_armored_certificate(std::string_view text) {
  return decode_certificate(dearmor(kCertificateArmorLabel, text));
}

}  // namespace attestkit
