// Copyright 2026 The attestkit Authors
// Use of this source code is governed by the Apache-2.0 license that can be
// found in the LICENSE file.

#include "attestkit/config.hpp"

#include <gtest/gtest.h>

#include "support/testutil.hpp"

namespace attestkit {
namespace {

TEST(Config, Defaults) {
  Config cfg;
  EXPECT_EQ(cfg.get("ethembaDir"), "ethemba");
  EXPECT_EQ(cfg.get("PCAServerIP"), "127.0.0.1");
  EXPECT_EQ(cfg.get("PCAServerPort"), "30000");
  EXPECT_EQ(cfg.get("RAServerPort"), "30001");
  EXPECT_EQ(cfg.get("RAcert_Expiry"), "300");
  EXPECT_EQ(cfg.get("PCAServer_KeyTag"), "PCA");
  EXPECT_EQ(cfg.get("RAServer_KeyTag"), "RA");
  EXPECT_EQ(cfg.get("PCAdefault_AIKtag"), "AIK");
  EXPECT_EQ(cfg.get("OwnerPwd"), "owner");
  EXPECT_EQ(cfg.get("pwdEncoding"), "UTF-8");
  EXPECT_EQ(cfg.get("ServerKeyAlgorithm"), "RSA");
  EXPECT_EQ(cfg.get("ServerKeySize"), "2048");
  EXPECT_EQ(cfg.get("aesKeySize"), "128");
}

TEST(Config, UnknownKeyRejected) {
  Config cfg;
  EXPECT_THROW(cfg.get("NoSuchKey"), ParseError);
  EXPECT_FALSE(Config::is_known_key("NoSuchKey"));
  EXPECT_TRUE(Config::is_known_key("RAcert_Expiry"));
}

TEST(Config, PathsDeriveFromEthembaDir) {
  Config cfg;
  EXPECT_EQ(cfg.path("TpmKeyDBfile"),
            std::filesystem::path("ethemba") / "tpmkeydb");
  EXPECT_EQ(cfg.path("RAServer_KnownHashesList"),
            std::filesystem::path("ethemba") / "known_hashes");
  cfg.set("ethembaDir", "/srv/att");
  EXPECT_EQ(cfg.path("CertDBfile"),
            std::filesystem::path("/srv/att") / "certdb");
  EXPECT_EQ(cfg.path("KeyStorageBaseDir"),
            std::filesystem::path("/srv/att") / "keystorage");
}

TEST(Config, ExplicitPathOverrideWins) {
  Config cfg;
  cfg.set("TpmKeyDBfile", "/elsewhere/keydb");
  EXPECT_EQ(cfg.path("TpmKeyDBfile"),
            std::filesystem::path("/elsewhere/keydb"));
}

TEST(Config, ParsesKeyValueLines) {
  Config cfg = Config::from_text(
      "# comment\n"
      "\n"
      "PCAServerPort = 30500\r\n"
      "PCAcertCommonName = My Privacy CA\n");
  EXPECT_EQ(cfg.get("PCAServerPort"), "30500");
  EXPECT_EQ(cfg.get("PCAcertCommonName"), "My Privacy CA");
  EXPECT_EQ(cfg.get("RAServerPort"), "30001");
}

TEST(Config, ValueMayContainEquals) {
  Config cfg = Config::from_text("PCAcertOU = a = b\n");
  EXPECT_EQ(cfg.get("PCAcertOU"), "a = b");
}

TEST(Config, UnknownKeyInFileRejectedWithLineNumber) {
  try {
    Config::from_text("PCAServerPort = 1\nbogusKey = 2\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    std::string msg = e.what();
    EXPECT_NE(msg.find("line 2"), std::string::npos) << msg;
    EXPECT_NE(msg.find("bogusKey"), std::string::npos) << msg;
  }
}

TEST(Config, MalformedLineRejected) {
  EXPECT_THROW(Config::from_text("no equals sign\n"), ParseError);
}

TEST(Config, LoadFromFile) {
  testutil::TempDir dir;
  save_text(dir / "cfg", "RAcert_Expiry = 120\n");
  Config cfg = Config::load(dir / "cfg");
  EXPECT_EQ(cfg.integer("RAcert_Expiry"), 120u);
}

TEST(Config, LoadMissingFileFails) {
  testutil::TempDir dir;
  EXPECT_THROW(Config::load(dir / "absent"), IoError);
}

TEST(Config, IntegerAndPort) {
  Config cfg;
  EXPECT_EQ(cfg.integer("PCAServerPort"), 30000u);
  EXPECT_EQ(cfg.port("RAServerPort"), 30001);
  cfg.set("PCAServerPort", "notanumber");
  EXPECT_THROW(cfg.integer("PCAServerPort"), ParseError);
  cfg.set("PCAServerPort", "70000");
  EXPECT_THROW(cfg.port("PCAServerPort"), ParseError);
  cfg.set("PCAServerPort", "0");
  EXPECT_THROW(cfg.port("PCAServerPort"), ParseError);
}

TEST(Config, CertAttributesInDeclarationOrder) {
  Config cfg;
  CertAttributes pca = cfg.cert_attributes("PCAcert");
  ASSERT_GE(pca.size(), 4u);
  EXPECT_EQ(pca[0].first, "PCAcertCountry");
  EXPECT_EQ(pca[0].second, "DE");
  EXPECT_EQ(pca[1].first, "PCAcertOrganization");
  for (const auto& [k, v] : pca) EXPECT_NE(k, "RAcert_Expiry");

  CertAttributes ra = cfg.cert_attributes("RAcert");
  for (const auto& [k, v] : ra) EXPECT_NE(k, "RAcert_Expiry");
  EXPECT_FALSE(ra.empty());

  CertAttributes ek = cfg.cert_attributes("TPM_CLI_EK_");
  bool has_family = false;
  for (const auto& [k, v] : ek) {
    if (k == "TPM_CLI_EK_SpecFamily") has_family = true;
  }
  EXPECT_TRUE(has_family);
}

TEST(Config, PrintIsStableAndComplete) {
  Config cfg;
  std::string a = cfg.print();
  EXPECT_EQ(a, cfg.print());
  EXPECT_NE(a.find("ethembaDir = ethemba\n"), std::string::npos);
  EXPECT_NE(a.find("RAcert_Expiry = 300\n"), std::string::npos);
  EXPECT_NE(a.find("TpmKeyDBfile = "), std::string::npos);
  cfg.set("RAcert_Expiry", "120");
  std::string b = cfg.print();
  EXPECT_NE(a, b);
  EXPECT_NE(b.find("RAcert_Expiry = 120\n"), std::string::npos);
}

TEST(Config, PrintRoundTripsThroughParser) {
  Config cfg;
  cfg.set("PCAcertCommonName", "Custom CA");
  Config back = Config::from_text(cfg.print());
  EXPECT_EQ(back.print(), cfg.print());
}

}  // namespace
}  // namespace attestkit
