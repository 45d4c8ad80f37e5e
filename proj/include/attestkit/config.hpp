// Copyright 2026 The attestkit Authors
// Use of this source code is governed by the Apache-2.0 license that can be
// found in the LICENSE file.
//
// Global settings. Every key has a documented default; file-system paths
// default to locations under ethembaDir. Unknown keys are rejected at load
// so typos surface immediately.

#pragma once

#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "attestkit/bytes.hpp"
#include "attestkit/certificate.hpp"

namespace attestkit {

namespace detail {

// Fixed-value defaults, in declaration order.
inline const std::vector<std::pair<std::string, std::string>>&
config_simple_defaults() {
  static const std::vector<std::pair<std::string, std::string>> kDefaults = {
      {"ethembaDir", "ethemba"},
      {"PCAServerIP", "127.0.0.1"},
      {"PCAServerPort", "30000"},
      {"PCAServer_KeyTag", "PCA"},
      {"PCAdefault_AIKtag", "AIK"},
      {"PCAcertCountry", "DE"},
      {"PCAcertOrganization", "ethemba"},
      {"PCAcertOU", "Privacy CA"},
      {"PCAcertCommonName", "ethemba Privacy CA"},
      {"PCAcertSerialNumber", "1"},
      {"PCAcertPrivateKeySize", "2048"},
      {"PCAcertPolicyOID", "1.3.6.1.4.1.99999.1.1"},
      {"PCAcertPolicyURL", "http://localhost/policy/pca"},
      {"RAServerIP", "127.0.0.1"},
      {"RAServerPort", "30001"},
      {"RAServer_KeyTag", "RA"},
      {"RAdefault_AIKtag", "AIK"},
      {"RAcert_Expiry", "300"},
      {"RAcertCountry", "DE"},
      {"RAcertOrganization", "ethemba"},
      {"RAcertOU", "Remote Attestation"},
      {"RAcertCommonName", "ethemba Remote Attestation Server"},
      {"OwnerPwd", "owner"},
      {"SRKPwd", "srk"},
      {"AIKPwd", "aik"},
      {"pwdEncoding", "UTF-8"},
      {"TPM_CLIcertCountry", "DE"},
      {"TPM_CLIcertOrganization", "ethemba"},
      {"TPM_CLIcertOU", "TPM Client"},
      {"TPM_CLI_PE_policyOID", "1.3.6.1.4.1.99999.2.1"},
      {"TPM_CLI_PE_policyURL", "http://localhost/policy/pe"},
      {"TPM_CLI_PE_Pmanufacturer", "ethemba"},
      {"TPM_CLI_PE_Pmodel", "softplatform"},
      {"TPM_CLI_PE_Pversion", "1.0"},
      {"TPM_CLI_PE_Pclass", "PC"},
      {"TPM_CLI_PE_majorVersion", "1"},
      {"TPM_CLI_PE_minorVersion", "2"},
      {"TPM_CLI_PE_revision", "1"},
      {"TPM_CLI_EK_policyOID", "1.3.6.1.4.1.99999.2.2"},
      {"TPM_CLI_EK_policyURL", "http://localhost/policy/ek"},
      {"TPM_CLI_EK_TPMmanufacturer", "ethemba"},
      {"TPM_CLI_EK_TPMmodel", "softtpm"},
      {"TPM_CLI_EK_TPMversion", "1.2"},
      {"TPM_CLI_EK_SpecFamily", "1.2"},
      {"TPM_CLI_EK_SpecLevel", "2"},
      {"TPM_CLI_EK_SpecRevision", "103"},
      {"TPM_CLI_AIK_policyOID", "1.3.6.1.4.1.99999.2.3"},
      {"TPM_CLI_AIK_policyURL", "http://localhost/policy/aik"},
      {"ServerKeyAlgorithm", "RSA"},
      {"ServerKeySize", "2048"},
      {"ServerSignAlgorithmID", "SHA1withRSA"},
      {"aesKeySize", "128"},
      {"aesCipherMode", "CBC/PKCS7"},
  };
  return kDefaults;
}

// Path keys whose default hangs off ethembaDir.
inline const std::vector<std::pair<std::string, std::string>>&
config_path_defaults() {
  static const std::vector<std::pair<std::string, std::string>> kPaths = {
      {"IMAruntimeFile", "ima_runtime"},
      {"RAServer_KnownHashesList", "known_hashes"},
      {"TpmKeyDBfile", "tpmkeydb"},
      {"KeyStorageBaseDir", "keystorage"},
      {"KeyStorageDB", "keystorage.db"},
      {"CertDBfile", "certdb"},
      {"CertExportBaseDir", "certexport"},
  };
  return kPaths;
}

}  // namespace detail

class Config {
 public:
  Config() = default;

  static bool is_known_key(const std::string& key) {
    for (const auto& [k, v] : detail::config_simple_defaults()) {
      if (k == key) return true;
    }
    for (const auto& [k, v] : detail::config_path_defaults()) {
      if (k == key) return true;
    }
    return false;
  }

  static Config from_text(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      std::string trimmed = trim(line);
      if (trimmed.empty() || trimmed[0] == '#') continue;
      size_t eq = trimmed.find('=');
      if (eq == std::string::npos) {
        throw ParseError("config line " + std::to_string(lineno) +
                         ": expected `key = value`");
      }
      std::string key = trim(trimmed.substr(0, eq));
      std::string value = trim(trimmed.substr(eq + 1));
      if (!is_known_key(key)) {
        throw ParseError("config line " + std::to_string(lineno) +
                         ": unknown key `" + key + "`");
      }
      cfg.overrides_[key] = value;
    }
    return cfg;
  }

  static Config load(const std::filesystem::path& path) {
    return from_text(load_text(path));
  }

  std::string get(const std::string& key) const {
    auto it = overrides_.find(key);
    if (it != overrides_.end()) return it->second;
    for (const auto& [k, v] : detail::config_simple_defaults()) {
      if (k == key) return v;
    }
    for (const auto& [k, leaf] : detail::config_path_defaults()) {
      if (k == key) {
        return (std::filesystem::path(get("ethembaDir")) / leaf).string();
      }
    }
    throw ParseError("unknown config key `" + key + "`");
  }

  void set(const std::string& key, const std::string& value) {
    if (!is_known_key(key)) {
      throw ParseError("unknown config key `" + key + "`");
    }
    overrides_[key] = value;
  }

  std::filesystem::path path(const std::string& key) const {
    return std::filesystem::path(get(key));
  }

  uint64_t integer(const std::string& key) const {
    std::string v = get(key);
    for (char c : v) {
      if (c < '0' || c > '9') {
        throw ParseError("config key `" + key + "` is not a number: " + v);
      }
    }
    if (v.empty() || v.size() > 19) {
      throw ParseError("config key `" + key + "` is not a number: " + v);
    }
    return std::stoull(v);
  }

  uint16_t port(const std::string& key) const {
    uint64_t v = integer(key);
    if (v == 0 || v > 65535) {
      throw ParseError("config key `" + key + "` is not a valid port");
    }
    return static_cast<uint16_t>(v);
  }

  // Certificate attributes for one prefix family, in declaration order.
  CertAttributes cert_attributes(const std::string& prefix) const {
    CertAttributes out;
    for (const auto& [k, v] : detail::config_simple_defaults()) {
      if (k.rfind(prefix, 0) == 0 && k != "RAcert_Expiry") {
        out.emplace_back(k, get(k));
      }
    }
    return out;
  }

  // Effective configuration, every key, sorted; byte-stable for diffing.
  std::string print() const {
    std::map<std::string, std::string> all;
    for (const auto& [k, v] : detail::config_simple_defaults()) all[k] = get(k);
    for (const auto& [k, v] : detail::config_path_defaults()) all[k] = get(k);
    std::string out;
    for (const auto& [k, v] : all) {
      out += k;
      out += " = ";
      out += v;
      out += '\n';
    }
    return out;
  }

 private:
  static std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
  }

  std::map<std::string, std::string> overrides_;
};

}  // namespace attestkit
