// Copyright 2026 The attestkit Authors
// Use of this source code is governed by the Apache-2.0 license that can be
// found in the LICENSE file.
//
// Canonical record encoding shared by persistence and the wire protocol.
// Layout: [tag:1][field count:4 BE] then per field [length:4 BE][bytes].
// The encoding is deterministic and self-delimiting; every domain record
// (certificates, quotes, TPM state, ...) flattens to one of these.

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "attestkit/bytes.hpp"
#include "attestkit/errors.hpp"

namespace attestkit {

enum class RecordTag : uint8_t {
  kRaw = 1,          // single opaque byte field ("string" records on the wire)
  kRsaPublicKey = 2,
  kRsaPrivateKey = 3,
  kCertificate = 4,
  kMeasurementList = 5,
  kQuote = 6,
  kIdentityPayload = 7,   // plaintext inside an identity request
  kIdentityRequest = 8,   // hybrid-encrypted identity request
  kEkWrappedBlob = 9,
  kPcaResponse1 = 10,
  kPcaResponse2 = 11,
  kRaChallenge = 12,
  kRaEvidence = 13,
  kTpmKey = 14,
  kTpmState = 15,
  kKeyCertification = 16,
};

struct Record {
  RecordTag tag;
  std::vector<Bytes> fields;

  friend bool operator==(const Record&, const Record&) = default;
};

inline bool is_known_tag(uint8_t b) {
  return b >= static_cast<uint8_t>(RecordTag::kRaw) &&
         b <= static_cast<uint8_t>(RecordTag::kKeyCertification);
}

inline Bytes encode_record(const Record& r) {
  Bytes out;
  out.push_back(static_cast<uint8_t>(r.tag));
  append_u32(out, static_cast<uint32_t>(r.fields.size()));
  for (const Bytes& f : r.fields) {
    append_u32(out, static_cast<uint32_t>(f.size()));
    out.insert(out.end(), f.begin(), f.end());
  }
  return out;
}

// Strict decode: header and every length must be consistent and the input
// must be consumed exactly.
inline Record decode_record(std::span<const uint8_t> in) {
  if (in.size() < 5) throw ParseError("record too short for header");
  if (!is_known_tag(in[0])) {
    throw ParseError("unknown record tag " + std::to_string(in[0]));
  }
  Record r;
  r.tag = static_cast<RecordTag>(in[0]);
  uint32_t count = read_u32(in.subspan(1));
  size_t pos = 5;
  r.fields.reserve(count);
  for (uint32_t i = 0; i < count; ++i) {
    if (in.size() - pos < 4) throw ParseError("truncated field length");
    uint32_t len = read_u32(in.subspan(pos));
    pos += 4;
    if (in.size() - pos < len) throw ParseError("truncated field body");
    r.fields.emplace_back(in.begin() + pos, in.begin() + pos + len);
    pos += len;
  }
  if (pos != in.size()) throw ParseError("trailing bytes after record");
  return r;
}

// Peek at the tag without decoding; used for typed receive on the wire.
inline RecordTag record_tag(std::span<const uint8_t> encoded) {
  if (encoded.empty()) throw ParseError("empty record");
  return static_cast<RecordTag>(encoded[0]);
}

inline const Bytes& record_field(const Record& r, size_t index) {
  if (index >= r.fields.size()) {
    throw ParseError("record is missing field " + std::to_string(index));
  }
  return r.fields[index];
}

inline Record expect_tag(const Record& r, RecordTag tag) {
  if (r.tag != tag) {
    throw ParseError("unexpected record tag " +
                     std::to_string(static_cast<int>(r.tag)));
  }
  return r;
}

// Fixed-width field helpers.

inline Bytes u64_field(uint64_t v) {
  Bytes b;
  append_u64(b, v);
  return b;
}

inline uint64_t field_as_u64(const Record& r, size_t index) {
  const Bytes& f = record_field(r, index);
  if (f.size() != 8) throw ParseError("field is not a u64");
  return read_u64(f);
}

inline Bytes u8_field(uint8_t v) { return Bytes{v}; }

inline uint8_t field_as_u8(const Record& r, size_t index) {
  const Bytes& f = record_field(r, index);
  if (f.size() != 1) throw ParseError("field is not a u8");
  return f[0];
}

inline std::string field_as_string(const Record& r, size_t index) {
  const Bytes& f = record_field(r, index);
  return std::string(f.begin(), f.end());
}

// A raw record carries exactly one opaque field.
inline Record raw_record(std::span<const uint8_t> payload) {
  return Record{RecordTag::kRaw, {Bytes(payload.begin(), payload.end())}};
}

inline Bytes raw_record_payload(const Record& r) {
  expect_tag(r, RecordTag::kRaw);
  return record_field(r, 0);
}

// File persistence of records.

inline void save_record(const std::filesystem::path& path, const Record& r) {
  save_bytes(path, encode_record(r));
}

inline Record load_record(const std::filesystem::path& path) {
  return decode_record(load_bytes(path));
}

}  // namespace attestkit
