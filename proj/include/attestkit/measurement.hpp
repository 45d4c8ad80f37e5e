// Copyright 2026 The attestkit Authors
// Use of this source code is governed by the Apache-2.0 license that can be
// found in the LICENSE file.
//
// IMA-style measurement lists and the known-hashes whitelist.

#pragma once

#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "attestkit/blob.hpp"
#include "attestkit/sha1.hpp"

namespace attestkit {

constexpr uint8_t kNumPcrs = 24;
constexpr uint8_t kImaPcr = 10;

struct MeasurementEntry {
  uint8_t pcr = 0;
  Sha1Digest hash;
  std::string path;

  friend bool operator==(const MeasurementEntry&,
                         const MeasurementEntry&) = default;
};

struct MeasurementList {
  std::vector<MeasurementEntry> entries;

  friend bool operator==(const MeasurementList&,
                         const MeasurementList&) = default;
};

namespace detail {

inline std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

inline std::string strip_sha1_prefix(const std::string& tok) {
  if (tok.rfind("sha1:", 0) == 0) return tok.substr(5);
  return tok;
}

inline uint8_t parse_pcr_index(const std::string& tok, size_t lineno) {
  for (char c : tok) {
    if (c < '0' || c > '9') {
      throw ParseError("line " + std::to_string(lineno) +
                       ": PCR index is not a number");
    }
  }
  if (tok.empty() || tok.size() > 2 || std::stoul(tok) >= kNumPcrs) {
    throw ParseError("line " + std::to_string(lineno) +
                     ": PCR index out of range");
  }
  return static_cast<uint8_t>(std::stoul(tok));
}

}  // namespace detail

// Accepts the short `<pcr> <40-hex> <path>` form (path keeps any inner
// spaces) and the real 5-field IMA template form, where the file hash and
// path are the last two fields.
inline MeasurementEntry parse_measurement_line(const std::string& line,
                                               size_t lineno) {
  std::vector<std::string> f = detail::split_fields(line);
  MeasurementEntry e;
  if (f.size() == 5) {
    std::string h = detail::strip_sha1_prefix(f[3]);
    if (h.size() == 40 && is_hex(h)) {
      e.pcr = detail::parse_pcr_index(f[0], lineno);
      e.hash = Sha1Digest::from_hex(h);
      e.path = f[4];
      return e;
    }
  }
  if (f.size() < 3) {
    throw ParseError("line " + std::to_string(lineno) +
                     ": expected `pcr hash path`");
  }
  std::string h = detail::strip_sha1_prefix(f[1]);
  if (h.size() != 40 || !is_hex(h)) {
    throw ParseError("line " + std::to_string(lineno) +
                     ": measurement hash is not 40 hex characters");
  }
  e.pcr = detail::parse_pcr_index(f[0], lineno);
  e.hash = Sha1Digest::from_hex(h);
  size_t path_pos = line.find(f[1]);
  path_pos = line.find_first_not_of(" \t", path_pos + f[1].size());
  e.path = line.substr(path_pos);
  return e;
}

inline MeasurementList measurement_list_from_text(const std::string& text) {
  MeasurementList ml;
  std::istringstream in(text);
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string trimmed = line;
    size_t start = trimmed.find_first_not_of(" \t");
    if (start == std::string::npos) continue;
    if (trimmed[start] == '#') continue;
    ml.entries.push_back(parse_measurement_line(line, lineno));
  }
  return ml;
}

inline MeasurementList measurement_list_from_file(
    const std::filesystem::path& path) {
  return measurement_list_from_text(load_text(path));
}

inline std::string format_measurement_list(const MeasurementList& ml) {
  std::string out;
  for (const MeasurementEntry& e : ml.entries) {
    out += std::to_string(e.pcr);
    out += ' ';
    out += e.hash.hex();
    out += ' ';
    out += e.path;
    out += '\n';
  }
  return out;
}

inline MeasurementList for_pcr(const MeasurementList& ml, uint8_t pcr) {
  MeasurementList out;
  for (const MeasurementEntry& e : ml.entries) {
    if (e.pcr == pcr) out.entries.push_back(e);
  }
  return out;
}

// Verifier-side PCR recomputation: fold the per-PCR entries into a zeroed
// register exactly as pcr_extend would.
inline Sha1Digest compute_vpcr(const MeasurementList& ml, uint8_t pcr) {
  Sha1Digest v = Sha1Digest::zero();
  for (const MeasurementEntry& e : for_pcr(ml, pcr).entries) {
    Bytes buf = v.to_vector();
    Bytes h = e.hash.to_vector();
    buf.insert(buf.end(), h.begin(), h.end());
    v = sha1(buf);
  }
  return v;
}

inline Record measurement_list_record(const MeasurementList& ml) {
  Record r{RecordTag::kMeasurementList, {}};
  for (const MeasurementEntry& e : ml.entries) {
    Bytes f;
    f.push_back(e.pcr);
    Bytes h = e.hash.to_vector();
    f.insert(f.end(), h.begin(), h.end());
    f.insert(f.end(), e.path.begin(), e.path.end());
    r.fields.push_back(std::move(f));
  }
  return r;
}

inline MeasurementList decode_measurement_list(const Record& r) {
  expect_tag(r, RecordTag::kMeasurementList);
  MeasurementList ml;
  for (const Bytes& f : r.fields) {
    if (f.size() < 1 + Sha1Digest::kSize + 1) {
      throw ParseError("measurement entry field too short");
    }
    if (f[0] >= kNumPcrs) {
      throw ParseError("measurement entry PCR index out of range");
    }
    MeasurementEntry e;
    e.pcr = f[0];
    e.hash = Sha1Digest::from_bytes(
        std::span<const uint8_t>(f).subspan(1, Sha1Digest::kSize));
    e.path.assign(f.begin() + 1 + Sha1Digest::kSize, f.end());
    ml.entries.push_back(std::move(e));
  }
  return ml;
}

// ---------------------------------------------------------------------------
// Known-hashes whitelist

// Maps hex(sha1) -> application path. One path per hash; many hashes may
// name the same path (several trusted versions of one binary).
class KnownHashesList {
 public:
  KnownHashesList() = default;

  static KnownHashesList load(const std::filesystem::path& path) {
    std::string text;
    try {
      text = load_text(path);
    } catch (const IoError& e) {
      throw StoreError("known-hashes list unavailable: " +
                       std::string(e.what()));
    }
    KnownHashesList khl;
    std::istringstream in(text);
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      size_t tab = line.find('\t');
      if (tab == std::string::npos) {
        throw StoreError("known-hashes list line " + std::to_string(lineno) +
                         " has no separator");
      }
      khl.put(line.substr(0, tab), line.substr(tab + 1));
    }
    return khl;
  }

  void save(const std::filesystem::path& path) const {
    std::string out;
    for (const auto& [hash, tag] : by_hash_) {
      out += hash;
      out += '\t';
      out += tag;
      out += '\n';
    }
    save_text(path, out);
  }

  // Returns the displaced path when the hash was already mapped.
  std::optional<std::string> put(const std::string& hash_hex,
                                 const std::string& tag) {
    std::string key = normalize(hash_hex);
    auto it = by_hash_.find(key);
    if (it != by_hash_.end()) {
      std::string old = it->second;
      it->second = tag;
      return old;
    }
    by_hash_.emplace(std::move(key), tag);
    return std::nullopt;
  }

  std::optional<std::string> get(const std::string& hash_hex) const {
    auto it = by_hash_.find(normalize(hash_hex));
    if (it == by_hash_.end()) return std::nullopt;
    return it->second;
  }

  bool contains_hash(const std::string& hash_hex) const {
    return by_hash_.count(normalize(hash_hex)) != 0;
  }

  bool contains_tag(const std::string& tag) const {
    for (const auto& [hash, t] : by_hash_) {
      if (t == tag) return true;
    }
    return false;
  }

  bool contains(const std::string& hash_hex, const std::string& tag) const {
    auto v = get(hash_hex);
    return v.has_value() && *v == tag;
  }

  size_t remove_hash(const std::string& hash_hex) {
    return by_hash_.erase(normalize(hash_hex));
  }

  // Drops every entry whose path contains the given substring.
  size_t remove_where_tag_contains(const std::string& needle) {
    size_t removed = 0;
    for (auto it = by_hash_.begin(); it != by_hash_.end();) {
      if (it->second.find(needle) != std::string::npos) {
        it = by_hash_.erase(it);
        ++removed;
      } else {
        ++it;
      }
    }
    return removed;
  }

  void add_measurements(const MeasurementList& ml) {
    for (const MeasurementEntry& e : ml.entries) put(e.hash.hex(), e.path);
  }

  size_t size() const { return by_hash_.size(); }
  bool empty() const { return by_hash_.empty(); }

  // Sorted by hash; the on-disk order.
  const std::map<std::string, std::string>& entries() const {
    return by_hash_;
  }

  friend bool operator==(const KnownHashesList&,
                         const KnownHashesList&) = default;

 private:
  static std::string normalize(const std::string& hash_hex) {
    if (hash_hex.size() != 40 || !is_hex(hash_hex)) {
      throw ParseError("known-hashes key is not 40 hex characters");
    }
    std::string out = hash_hex;
    for (char& c : out) {
      if (c >= 'A' && c <= 'F') c = static_cast<char>(c - 'A' + 'a');
    }
    return out;
  }

  std::map<std::string, std::string> by_hash_;
};

}  // namespace attestkit
