// Copyright 2026 The attestkit Authors
// Use of this source code is governed by the Apache-2.0 license that can be
// found in the LICENSE file.
//
// File-backed stores: label->UUID, UUID->certificate and the server key
// storage. All three persist as sorted text indexes written atomically, with
// an advisory lock file serializing access between processes.

#pragma once

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "attestkit/certificate.hpp"
#include "attestkit/uuid.hpp"

namespace attestkit {

constexpr const char* kPublicKeyArmorLabel = "ATTESTKIT PUBLIC KEY";
constexpr const char* kPrivateKeyArmorLabel = "ATTESTKIT PRIVATE KEY";

namespace detail {

class FileLock {
 public:
  explicit FileLock(const std::filesystem::path& path) {
    if (!path.parent_path().empty()) {
      std::error_code ec;
      std::filesystem::create_directories(path.parent_path(), ec);
    }
    fd_ = ::open(path.c_str(), O_CREAT | O_RDWR, 0644);
    if (fd_ < 0) throw IoError("cannot open lock file " + path.string());
    if (::flock(fd_, LOCK_EX) != 0) {
      ::close(fd_);
      throw IoError("cannot lock " + path.string());
    }
  }
  FileLock(const FileLock&) = delete;
  FileLock& operator=(const FileLock&) = delete;
  ~FileLock() {
    if (fd_ >= 0) ::close(fd_);
  }

 private:
  int fd_;
};

inline void check_store_token(const std::string& s, const char* what) {
  if (s.empty() || s.find('\t') != std::string::npos ||
      s.find('\n') != std::string::npos) {
    throw ParseError(std::string(what) + " must be non-empty and free of "
                                         "tabs and newlines");
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// TpmKeyDb: label -> UUID

class TpmKeyDb {
 public:
  explicit TpmKeyDb(std::filesystem::path file) : file_(std::move(file)) {}

  std::optional<Uuid> get(const std::string& label) const {
    detail::FileLock lock(lock_path());
    auto map = load_map();
    auto it = map.find(label);
    if (it == map.end()) return std::nullopt;
    return it->second;
  }

  void put(const std::string& label, const Uuid& uuid) {
    detail::check_store_token(label, "key label");
    detail::FileLock lock(lock_path());
    auto map = load_map();
    map[label] = uuid;
    save_map(map);
  }

  void remove(const std::string& label) {
    detail::FileLock lock(lock_path());
    auto map = load_map();
    map.erase(label);
    save_map(map);
  }

  std::map<std::string, Uuid> all() const {
    detail::FileLock lock(lock_path());
    return load_map();
  }

 private:
  std::filesystem::path lock_path() const {
    std::filesystem::path p = file_;
    p += ".lock";
    return p;
  }

  std::map<std::string, Uuid> load_map() const {
    std::map<std::string, Uuid> out;
    if (!std::filesystem::exists(file_)) return out;
    std::istringstream in(load_text(file_));
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      size_t tab = line.find('\t');
      if (tab == std::string::npos) {
        throw StoreError("corrupt key database " + file_.string());
      }
      out[line.substr(0, tab)] = Uuid::from_text(line.substr(tab + 1));
    }
    return out;
  }

  void save_map(const std::map<std::string, Uuid>& map) {
    std::string out;
    for (const auto& [label, uuid] : map) {
      out += label;
      out += '\t';
      out += uuid.text();
      out += '\n';
    }
    save_text(file_, out);
  }

  std::filesystem::path file_;
};

// ---------------------------------------------------------------------------
// CertDb: UUID -> certificate

class CertDb {
 public:
  explicit CertDb(std::filesystem::path file) : file_(std::move(file)) {}

  std::optional<CertificateRecord> get(const Uuid& uuid) const {
    detail::FileLock lock(lock_path());
    auto map = load_map();
    auto it = map.find(uuid.text());
    if (it == map.end()) return std::nullopt;
    return decode_certificate(it->second);
  }

  void put(const Uuid& uuid, const CertificateRecord& cert) {
    detail::FileLock lock(lock_path());
    auto map = load_map();
    map[uuid.text()] = encode_certificate(cert);
    save_map(map);
  }

  void remove(const Uuid& uuid) {
    detail::FileLock lock(lock_path());
    auto map = load_map();
    map.erase(uuid.text());
    save_map(map);
  }

  void export_cert(const Uuid& uuid, const std::filesystem::path& out) const {
    auto cert = get(uuid);
    if (!cert) {
      throw NotFoundError("no certificate stored under " + uuid.text());
    }
    save_text(out, armor_certificate(*cert));
  }

  size_t size() const {
    detail::FileLock lock(lock_path());
    return load_map().size();
  }

 private:
  std::filesystem::path lock_path() const {
    std::filesystem::path p = file_;
    p += ".lock";
    return p;
  }

  std::map<std::string, Bytes> load_map() const {
    std::map<std::string, Bytes> out;
    if (!std::filesystem::exists(file_)) return out;
    std::istringstream in(load_text(file_));
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      size_t tab = line.find('\t');
      if (tab == std::string::npos) {
        throw StoreError("corrupt certificate database " + file_.string());
      }
      out[line.substr(0, tab)] = base64_decode(line.substr(tab + 1));
    }
    return out;
  }

  void save_map(const std::map<std::string, Bytes>& map) {
    std::string out;
    for (const auto& [uuid, cert] : map) {
      out += uuid;
      out += '\t';
      out += base64_encode(cert);
      out += '\n';
    }
    save_text(file_, out);
  }

  std::filesystem::path file_;
};

// ---------------------------------------------------------------------------
// KeyStorage: tag -> (public key file, private key file)

class KeyStorage {
 public:
  KeyStorage(std::filesystem::path base_dir, std::filesystem::path index_file)
      : base_dir_(std::move(base_dir)), index_(std::move(index_file)) {}

  // Stores a full keypair; returns the displaced file names when the tag
  // already existed.
  std::vector<std::string> put(const std::string& tag,
                               const std::string& pub_file,
                               const RsaPublicKey& pub,
                               const std::string& priv_file,
                               const RsaPrivateKey& priv) {
    check_names(tag, pub_file);
    check_names(tag, priv_file);
    detail::FileLock lock(lock_path());
    auto map = load_map();
    std::vector<std::string> displaced = displaced_names(map, tag);
    write_key_file(pub_file, kPublicKeyArmorLabel, encode_public_key(pub));
    write_key_file(priv_file, kPrivateKeyArmorLabel, encode_private_key(priv));
    map[tag] = {pub_file, priv_file};
    save_map(map);
    return displaced;
  }

  std::vector<std::string> put_public(const std::string& tag,
                                      const std::string& pub_file,
                                      const RsaPublicKey& pub) {
    check_names(tag, pub_file);
    detail::FileLock lock(lock_path());
    auto map = load_map();
    std::vector<std::string> displaced;
    auto it = map.find(tag);
    if (it != map.end() && !it->second.first.empty()) {
      displaced.push_back(it->second.first);
    }
    write_key_file(pub_file, kPublicKeyArmorLabel, encode_public_key(pub));
    map[tag].first = pub_file;
    save_map(map);
    return displaced;
  }

  std::vector<std::string> put_private(const std::string& tag,
                                       const std::string& priv_file,
                                       const RsaPrivateKey& priv) {
    check_names(tag, priv_file);
    detail::FileLock lock(lock_path());
    auto map = load_map();
    std::vector<std::string> displaced;
    auto it = map.find(tag);
    if (it != map.end() && !it->second.second.empty()) {
      displaced.push_back(it->second.second);
    }
    write_key_file(priv_file, kPrivateKeyArmorLabel, encode_private_key(priv));
    map[tag].second = priv_file;
    save_map(map);
    return displaced;
  }

  RsaPublicKey get_public(const std::string& tag) const {
    return decode_public_key(
        read_key_file(file_for(tag, true), kPublicKeyArmorLabel));
  }

  RsaPrivateKey get_private(const std::string& tag) const {
    return decode_private_key(
        read_key_file(file_for(tag, false), kPrivateKeyArmorLabel));
  }

  std::filesystem::path public_file(const std::string& tag) const {
    return base_dir_ / file_for(tag, true);
  }

  std::filesystem::path private_file(const std::string& tag) const {
    return base_dir_ / file_for(tag, false);
  }

  bool has_tag(const std::string& tag) const {
    detail::FileLock lock(lock_path());
    auto map = load_map();
    return map.find(tag) != map.end();
  }

 private:
  std::filesystem::path lock_path() const {
    std::filesystem::path p = index_;
    p += ".lock";
    return p;
  }

  static void check_names(const std::string& tag, const std::string& file) {
    detail::check_store_token(tag, "key tag");
    detail::check_store_token(file, "key file name");
    if (file.find('/') != std::string::npos) {
      throw ParseError("key file name must not contain path separators");
    }
  }

  static std::vector<std::string> displaced_names(
      const std::map<std::string, std::pair<std::string, std::string>>& map,
      const std::string& tag) {
    std::vector<std::string> out;
    auto it = map.find(tag);
    if (it != map.end()) {
      if (!it->second.first.empty()) out.push_back(it->second.first);
      if (!it->second.second.empty()) out.push_back(it->second.second);
    }
    return out;
  }

  std::string file_for(const std::string& tag, bool want_public) const {
    detail::FileLock lock(lock_path());
    auto map = load_map();
    auto it = map.find(tag);
    if (it == map.end()) {
      throw NotFoundError("no key stored under tag `" + tag + "`");
    }
    const std::string& name = want_public ? it->second.first
                                          : it->second.second;
    if (name.empty()) {
      throw NotFoundError(std::string("no ") +
                          (want_public ? "public" : "private") +
                          " key stored under tag `" + tag + "`");
    }
    return name;
  }

  void write_key_file(const std::string& name, const char* label,
                      const Bytes& encoded) {
    std::filesystem::create_directories(base_dir_);
    save_text(base_dir_ / name, armor(label, encoded));
  }

  Bytes read_key_file(const std::string& name, const char* label) const {
    std::filesystem::path path = base_dir_ / name;
    std::string text;
    try {
      text = load_text(path);
    } catch (const IoError&) {
      throw StoreError("key storage index names missing file " +
                       path.string());
    }
    try {
      return dearmor(label, text);
    } catch (const ParseError&) {
      throw StoreError("corrupt key file " + path.string());
    }
  }

  std::map<std::string, std::pair<std::string, std::string>> load_map() const {
    std::map<std::string, std::pair<std::string, std::string>> out;
    if (!std::filesystem::exists(index_)) return out;
    std::istringstream in(load_text(index_));
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      size_t t1 = line.find('\t');
      size_t t2 = t1 == std::string::npos ? std::string::npos
                                          : line.find('\t', t1 + 1);
      if (t1 == std::string::npos || t2 == std::string::npos) {
        throw StoreError("corrupt key storage index " + index_.string());
      }
      out[line.substr(0, t1)] = {line.substr(t1 + 1, t2 - t1 - 1),
                                 line.substr(t2 + 1)};
    }
    return out;
  }

  void save_map(const std::map<std::string,
                               std::pair<std::string, std::string>>& map) {
    std::string out;
    for (const auto& [tag, files] : map) {
      out += tag;
      out += '\t';
      out += files.first;
      out += '\t';
      out += files.second;
      out += '\n';
    }
    save_text(index_, out);
  }

  std::filesystem::path base_dir_;
  std::filesystem::path index_;
};

}  // namespace attestkit
