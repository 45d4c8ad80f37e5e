// Copyright 2026 The attestkit Authors
// Use of this source code is governed by the Apache-2.0 license that can be
// found in the LICENSE file.
//
// Self-contained good/evil demonstration. Both variants synthesize the same
// measured platform; the evil one runs a helloworld binary whose contents
// were altered after its hash was whitelisted. Everything happens in-process
// against ephemeral-port servers under <ethembaDir>/demo.

#pragma once

#include <ostream>
#include <thread>

#include "attestkit/ra.hpp"

namespace attestkit {

enum class DemoVariant { kGood, kEvil };

namespace detail {

struct DemoApp {
  const char* path;
  const char* content;
};

inline constexpr const char* kDemoHelloPath = "/usr/local/bin/helloworld";
inline constexpr const char* kDemoHelloGood = "hello, world\n";
inline constexpr const char* kDemoHelloEvil = "hello, world!\n";

inline const std::vector<DemoApp>& demo_applications() {
  static const std::vector<DemoApp> apps = {
      {"/sbin/init", "init-1.0\n"},
      {"/bin/sh", "sh-5.1\n"},
      {"/sbin/imad", "imad-0.9\n"},
      {"/usr/bin/login", "login-3.3\n"},
      {"/usr/sbin/sshd", "sshd-9.2\n"},
      {"/usr/lib/libssl.so", "libssl-3.0\n"},
      {"/usr/lib/libc.so", "libc-2.35\n"},
      {"/usr/sbin/cron", "cron-1.5\n"},
      {"/usr/bin/attestd", "attestd-1.1\n"},
      {kDemoHelloPath, kDemoHelloGood},
      {"/usr/bin/logger", "logger-2.2\n"},
      {"/etc/policy.conf", "policy v7\n"},
  };
  return apps;
}

// The list the platform actually measured while running.
inline MeasurementList demo_measurement_log(DemoVariant variant) {
  MeasurementList ml;
  for (const DemoApp& app : demo_applications()) {
    std::string content = app.content;
    if (variant == DemoVariant::kEvil &&
        std::string(app.path) == kDemoHelloPath) {
      content = kDemoHelloEvil;
    }
    ml.entries.push_back(
        MeasurementEntry{kImaPcr, sha1(content), app.path});
  }
  return ml;
}

struct ThreadJoiner {
  std::thread t;
  ~ThreadJoiner() {
    if (t.joinable()) t.join();
  }
};

}  // namespace detail

// Runs the full PCA + RA pipeline over a synthetic measured platform.
// Returns 0 when the variant behaves as it should: success for good, a
// whitelist-rooted attestation failure for evil.
inline int run_demo(DemoVariant variant, const Config& user_cfg,
                    std::ostream& out) {
  std::filesystem::path demo_dir = user_cfg.path("ethembaDir") / "demo";
  std::filesystem::remove_all(demo_dir);
  std::filesystem::create_directories(demo_dir);
  Config cfg;
  cfg.set("ethembaDir", demo_dir.string());
  out << "DEMO-DIR: " << demo_dir.string() << "\n";

  MeasurementList good_log = detail::demo_measurement_log(DemoVariant::kGood);
  MeasurementList run_log = detail::demo_measurement_log(variant);

  KnownHashesList khl;
  khl.add_measurements(good_log);
  std::filesystem::path operator_khl =
      user_cfg.path("RAServer_KnownHashesList");
  if (std::filesystem::exists(operator_khl)) {
    KnownHashesList merged = KnownHashesList::load(operator_khl);
    for (const auto& [hash, path] : merged.entries()) {
      khl.put(hash, path);
    }
  }
  Sha1Digest evil_hash = sha1(std::string(detail::kDemoHelloEvil));
  if (variant == DemoVariant::kEvil &&
      khl.contains(evil_hash.hex(), detail::kDemoHelloPath)) {
    out << "MISCONFIGURATION: the altered helloworld hash is whitelisted; "
           "the demonstration cannot fail as intended\n";
    return 1;
  }
  khl.save(cfg.path("RAServer_KnownHashesList"));
  save_text(cfg.path("IMAruntimeFile"), format_measurement_list(run_log));
  out << "MEASUREMENTS: " << run_log.entries.size() << "\n";

  TpmKeyDb keydb(cfg.path("TpmKeyDBfile"));
  CertDb certdb(cfg.path("CertDBfile"));

  SoftTpm tpm = SoftTpm::create(cfg);
  tpm.take_ownership(cfg.get("OwnerPwd"), cfg.get("SRKPwd"));
  for (const MeasurementEntry& e : run_log.entries) {
    tpm.pcr_extend(e.pcr, e.hash);
  }
  out << "PCR10: " << tpm.pcr_read(kImaPcr).hex() << "\n";

  size_t key_bits = cfg.integer("ServerKeySize");
  RsaKeyPair pca_keys = rsa_generate(key_bits);
  RsaKeyPair ra_keys = rsa_generate(key_bits);
  PcaServerConfig pca_cfg = pca_server_config(cfg, pca_keys);
  RaServerConfig ra_cfg =
      ra_server_config(cfg, ra_keys, khl, pca_keys.public_part);

  Listener pca_listener(0);
  uint16_t pca_port = pca_listener.local_port();
  detail::ThreadJoiner pca_server{std::thread([&] {
    try {
      Endpoint peer = pca_listener.accept();
      pca_server_handle(peer, pca_cfg);
    } catch (const Error&) {
    }
  })};
  PcaClientParams pca_params;
  pca_params.host = "127.0.0.1";
  pca_params.port = pca_port;
  pca_params.aik_label = cfg.get("PCAdefault_AIKtag");
  pca_params.srk_pwd = cfg.get("SRKPwd");
  pca_params.aik_pwd = cfg.get("AIKPwd");
  pca_params.pca_pub = pca_keys.public_part;
  PcaClientResult enrolled = pca_client_run(tpm, keydb, certdb, pca_params);
  out << "AIK-UUID: " << enrolled.aik_uuid.text() << "\n";
  out << "AIK-CERT-SUBJECT: " << enrolled.aik_cert.subject_label << "\n";

  Listener ra_listener(0);
  uint16_t ra_port = ra_listener.local_port();
  detail::ThreadJoiner ra_server{std::thread([&] {
    try {
      Endpoint peer = ra_listener.accept();
      ra_server_handle(peer, ra_cfg);
    } catch (const Error&) {
    }
  })};
  RaClientParams ra_params;
  ra_params.host = "127.0.0.1";
  ra_params.port = ra_port;
  ra_params.aik_label = pca_params.aik_label;
  ra_params.srk_pwd = pca_params.srk_pwd;
  ra_params.aik_pwd = pca_params.aik_pwd;
  ra_params.ima_log = cfg.path("IMAruntimeFile");
  try {
    Uuid att_uuid = ra_client_run(tpm, keydb, certdb, ra_params);
    if (variant == DemoVariant::kEvil) {
      out << "UNEXPECTED: the altered platform attested successfully\n";
      return 1;
    }
    std::optional<CertificateRecord> att = certdb.get(att_uuid);
    out << "ATTESTATION-UUID: " << att_uuid.text() << "\n";
    if (att) {
      out << "ATTESTATION-VALIDITY: " << (att->not_after - att->not_before)
          << "\n";
    }
    out << "VERDICT: trusted\n";
    return 0;
  } catch (const ProtocolError& e) {
    std::string msg = e.what();
    bool whitelist_rooted =
        msg.find(ra_failure_reason(RaFailure::kUnknownMeasurement)) !=
            std::string::npos ||
        msg.find(ra_failure_reason(RaFailure::kVpcrMismatch)) !=
            std::string::npos;
    if (variant == DemoVariant::kEvil && whitelist_rooted) {
      out << "VERDICT: untrusted (" << msg << ")\n";
      return 0;
    }
    out << "ERROR: " << msg << "\n";
    return 1;
  }
}

}  // namespace attestkit
