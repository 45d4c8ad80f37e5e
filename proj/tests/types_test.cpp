// Copyright 2026 The attestkit Authors
// Use of this source code is governed by the Apache-2.0 license that can be
// found in the LICENSE file.

#include <random>

#include <gtest/gtest.h>

#include "attestkit/certificate.hpp"
#include "attestkit/measurement.hpp"
#include "support/ref_sha1.hpp"
#include "support/testutil.hpp"

namespace attestkit {
namespace {

constexpr const char* kHexA = "a9993e364706816aba3e25717850c26c9cd0d89d";
constexpr const char* kHexB = "5ba93c9db0cff93f52b521d7420e43f6eda2784f";

// -- measurement lists ------------------------------------------------------

TEST(MeasurementList, ParsesThreeFieldLine) {
  MeasurementList ml = measurement_list_from_text(
      std::string("10 ") + kHexA + " /bin/ls\n");
  ASSERT_EQ(ml.entries.size(), 1u);
  EXPECT_EQ(ml.entries[0].pcr, 10);
  EXPECT_EQ(ml.entries[0].hash.hex(), kHexA);
  EXPECT_EQ(ml.entries[0].path, "/bin/ls");
}

TEST(MeasurementList, EmptyFileGivesEmptyList) {
  EXPECT_TRUE(measurement_list_from_text("").entries.empty());
  EXPECT_TRUE(measurement_list_from_text("\n\n# comment\n").entries.empty());
}

TEST(MeasurementList, RejectsPcrOutOfRange) {
  try {
    measurement_list_from_text(std::string("25 ") + kHexA + " /bin/ls\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 1"), std::string::npos);
  }
}

TEST(MeasurementList, ReportsLineNumbers) {
  std::string text = std::string("10 ") + kHexA + " /bin/ls\njunk\n";
  try {
    measurement_list_from_text(text);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(MeasurementList, AcceptsFiveFieldImaTemplate) {
  std::string line = std::string("10 ") + kHexB + " ima-ng sha1:" + kHexA +
                     " /usr/bin/true\n";
  MeasurementList ml = measurement_list_from_text(line);
  ASSERT_EQ(ml.entries.size(), 1u);
  EXPECT_EQ(ml.entries[0].pcr, 10);
  EXPECT_EQ(ml.entries[0].hash.hex(), kHexA);
  EXPECT_EQ(ml.entries[0].path, "/usr/bin/true");
}

TEST(MeasurementList, AcceptsSha1PrefixInThreeFieldForm) {
  MeasurementList ml = measurement_list_from_text(
      std::string("10 sha1:") + kHexA + " /bin/ls\n");
  ASSERT_EQ(ml.entries.size(), 1u);
  EXPECT_EQ(ml.entries[0].hash.hex(), kHexA);
}

TEST(MeasurementList, KeepsSpacesInsidePath) {
  MeasurementList ml = measurement_list_from_text(
      std::string("10 ") + kHexA + " /opt/my app/run\n");
  ASSERT_EQ(ml.entries.size(), 1u);
  EXPECT_EQ(ml.entries[0].path, "/opt/my app/run");
}

TEST(MeasurementList, CarriageReturnsStripped) {
  MeasurementList ml = measurement_list_from_text(
      std::string("10 ") + kHexA + " /bin/ls\r\n");
  ASSERT_EQ(ml.entries.size(), 1u);
  EXPECT_EQ(ml.entries[0].path, "/bin/ls");
}

TEST(MeasurementList, FileRoundTrip) {
  testutil::TempDir dir;
  MeasurementList ml;
  ml.entries.push_back({10, Sha1Digest::from_hex(kHexA), "/bin/ls"});
  ml.entries.push_back({8, Sha1Digest::from_hex(kHexB), "/bin/cp"});
  save_text(dir / "log", format_measurement_list(ml));
  EXPECT_EQ(measurement_list_from_file(dir / "log"), ml);
}

TEST(MeasurementList, ForPcrFiltersPreservingOrder) {
  MeasurementList ml;
  for (int i = 0; i < 20; ++i) {
    ml.entries.push_back({static_cast<uint8_t>(i % 2 == 0 ? 10 : 11),
                          random_hash(), "/app/" + std::to_string(i)});
  }
  MeasurementList ten = for_pcr(ml, 10);
  ASSERT_EQ(ten.entries.size(), 10u);
  for (size_t i = 0; i < ten.entries.size(); ++i) {
    EXPECT_EQ(ten.entries[i].path, "/app/" + std::to_string(2 * i));
  }
  EXPECT_EQ(for_pcr(ten, 10), ten);
  EXPECT_TRUE(for_pcr(ml, 7).entries.empty());
}

TEST(MeasurementList, VpcrOfEmptyListIsZero) {
  EXPECT_TRUE(compute_vpcr(MeasurementList{}, 10).is_zero());
}

TEST(MeasurementList, VpcrOfSingleEntryMatchesOracle) {
  Sha1Digest h = random_hash();
  MeasurementList ml;
  ml.entries.push_back({10, h, "/a"});
  std::vector<uint8_t> buf(20, 0);
  buf.insert(buf.end(), h.bytes().begin(), h.bytes().end());
  EXPECT_EQ(compute_vpcr(ml, 10).hex(), refcrypto::ref_sha1_hex(buf));
}

TEST(MeasurementList, VpcrMatchesOracleOnMixedLists) {
  std::mt19937 rng(7);
  for (int round = 0; round < 50; ++round) {
    MeasurementList ml;
    size_t n = rng() % 40;
    for (size_t i = 0; i < n; ++i) {
      ml.entries.push_back({static_cast<uint8_t>(rng() % 24), random_hash(),
                            "/app/" + std::to_string(i)});
    }
    std::vector<uint8_t> v(20, 0);
    for (const auto& e : ml.entries) {
      if (e.pcr != 10) continue;
      v.insert(v.end(), e.hash.bytes().begin(), e.hash.bytes().end());
      std::array<uint8_t, 20> d = refcrypto::ref_sha1(v);
      v.assign(d.begin(), d.end());
    }
    EXPECT_EQ(compute_vpcr(ml, 10).to_vector(), v);
  }
}

TEST(MeasurementList, RecordRoundTrip) {
  MeasurementList ml;
  ml.entries.push_back({10, random_hash(), "/bin/ls"});
  ml.entries.push_back({0, random_hash(), "/opt/my app/run"});
  EXPECT_EQ(decode_measurement_list(measurement_list_record(ml)), ml);
}

TEST(MeasurementList, RecordRejectsEmptyPath) {
  Record r = measurement_list_record(MeasurementList{});
  Bytes f{10};
  Sha1Digest h = random_hash();
  f.insert(f.end(), h.bytes().begin(), h.bytes().end());
  r.fields.push_back(f);
  EXPECT_THROW(decode_measurement_list(r), ParseError);
}

// -- known-hashes list ------------------------------------------------------

TEST(KnownHashes, PutGetDisplace) {
  KnownHashesList khl;
  EXPECT_EQ(khl.put(kHexA, "/bin/ls"), std::nullopt);
  EXPECT_EQ(khl.get(kHexA), "/bin/ls");
  EXPECT_EQ(khl.put(kHexA, "/bin/cp"), "/bin/ls");
  EXPECT_EQ(khl.get(kHexA), "/bin/cp");
  EXPECT_EQ(khl.get(kHexB), std::nullopt);
}

TEST(KnownHashes, PutRejectsMalformedHash) {
  KnownHashesList khl;
  EXPECT_THROW(khl.put("zz", "/bin/ls"), ParseError);
  EXPECT_THROW(khl.put(std::string(kHexA) + "00", "/bin/ls"), ParseError);
}

TEST(KnownHashes, HashLookupIsCaseInsensitive) {
  KnownHashesList khl;
  std::string upper = kHexA;
  for (char& c : upper) c = std::toupper(static_cast<unsigned char>(c));
  khl.put(upper, "/bin/ls");
  EXPECT_TRUE(khl.contains_hash(kHexA));
  EXPECT_EQ(khl.get(kHexA), "/bin/ls");
}

TEST(KnownHashes, ContainsVariants) {
  KnownHashesList khl;
  khl.put(kHexA, "/bin/ls");
  khl.put(kHexB, "/bin/ls");
  EXPECT_TRUE(khl.contains(kHexA, "/bin/ls"));
  EXPECT_FALSE(khl.contains(kHexA, "/bin/cp"));
  EXPECT_TRUE(khl.contains_tag("/bin/ls"));
  EXPECT_FALSE(khl.contains_tag("/bin/cp"));
  EXPECT_TRUE(khl.contains_hash(kHexB));
}

TEST(KnownHashes, SaveLoadRoundTrip) {
  testutil::TempDir dir;
  KnownHashesList khl;
  for (int i = 0; i < 100; ++i) {
    khl.put(random_hash().hex(), "/app/" + std::to_string(i));
  }
  khl.save(dir / "khl");
  EXPECT_EQ(KnownHashesList::load(dir / "khl"), khl);
}

TEST(KnownHashes, SaveIsDeterministicAndSorted) {
  testutil::TempDir dir;
  KnownHashesList khl;
  khl.put(kHexB, "/b");
  khl.put(kHexA, "/a");
  khl.save(dir / "one");
  khl.save(dir / "two");
  std::string one = load_text(dir / "one");
  EXPECT_EQ(one, load_text(dir / "two"));
  EXPECT_EQ(one, std::string(kHexB) + "\t/b\n" + kHexA + "\t/a\n");
}

TEST(KnownHashes, LoadMissingFileFails) {
  testutil::TempDir dir;
  EXPECT_THROW(KnownHashesList::load(dir / "absent"), StoreError);
}

TEST(KnownHashes, LoadCorruptFileFails) {
  testutil::TempDir dir;
  save_text(dir / "khl", "no separator here\n");
  EXPECT_THROW(KnownHashesList::load(dir / "khl"), StoreError);
}

TEST(KnownHashes, RemoveHash) {
  KnownHashesList khl;
  khl.put(kHexA, "/bin/ls");
  EXPECT_EQ(khl.remove_hash(kHexA), 1u);
  EXPECT_EQ(khl.remove_hash(kHexA), 0u);
  EXPECT_TRUE(khl.empty());
}

TEST(KnownHashes, RemoveWhereTagContains) {
  KnownHashesList khl;
  khl.put(kHexA, "/usr/bin/vim");
  khl.put(kHexB, "/usr/bin/emacs");
  EXPECT_EQ(khl.remove_where_tag_contains("vim"), 1u);
  EXPECT_FALSE(khl.contains_tag("/usr/bin/vim"));
  EXPECT_TRUE(khl.contains_tag("/usr/bin/emacs"));
}

TEST(KnownHashes, AddMeasurementsCollapsesDuplicates) {
  MeasurementList ml;
  Sha1Digest h = random_hash();
  ml.entries.push_back({10, h, "/bin/ls"});
  ml.entries.push_back({10, h, "/bin/ls"});
  ml.entries.push_back({10, random_hash(), "/bin/cp"});
  KnownHashesList khl;
  khl.add_measurements(ml);
  EXPECT_EQ(khl.size(), 2u);
}

// -- certificates -----------------------------------------------------------

const RsaKeyPair& issuer_keys() {
  static const RsaKeyPair kp = rsa_generate();
  return kp;
}

const RsaKeyPair& subject_keys() {
  static const RsaKeyPair kp = rsa_generate();
  return kp;
}

CertificateRecord sample_cert(uint64_t now) {
  CertAttributes attrs{{"country", "DE"},
                       {"organization", "ethemba"},
                       {"commonName", "sample subject"}};
  return issue_certificate("Test Issuer", issuer_keys().private_part,
                           "sample subject", subject_keys().public_part,
                           now - 10, now + 3600, attrs);
}

TEST(Certificate, IssueThenVerify) {
  uint64_t now = utc_now_seconds();
  CertificateRecord c = sample_cert(now);
  EXPECT_TRUE(verify_certificate(c, issuer_keys().public_part, now));
  EXPECT_EQ(c.subject_label, "sample subject");
  EXPECT_EQ(c.issuer_name, "Test Issuer");
}

TEST(Certificate, VerifyFailsWithOtherKey) {
  uint64_t now = utc_now_seconds();
  CertificateRecord c = sample_cert(now);
  EXPECT_FALSE(verify_certificate(c, subject_keys().public_part, now));
}

TEST(Certificate, VerifyRespectsValidityWindow) {
  uint64_t now = utc_now_seconds();
  CertificateRecord c = sample_cert(now);
  EXPECT_FALSE(verify_certificate(c, issuer_keys().public_part,
                                  c.not_after + 1));
  EXPECT_FALSE(verify_certificate(c, issuer_keys().public_part,
                                  c.not_before - 1));
  EXPECT_TRUE(verify_certificate(c, issuer_keys().public_part, c.not_after));
  EXPECT_TRUE(verify_certificate(c, issuer_keys().public_part, c.not_before));
}

TEST(Certificate, InvertedWindowRejected) {
  uint64_t now = utc_now_seconds();
  EXPECT_THROW(
      issue_certificate("Test Issuer", issuer_keys().private_part, "s",
                        subject_keys().public_part, now, now - 1, {}),
      Error);
}

TEST(Certificate, MutationSweepBreaksVerification) {
  uint64_t now = utc_now_seconds();
  CertificateRecord base = sample_cert(now);
  auto check_broken = [&](CertificateRecord c) {
    EXPECT_FALSE(verify_certificate(c, issuer_keys().public_part, now));
  };
  {
    CertificateRecord c = base;
    c.subject_label = "other subject";
    check_broken(c);
  }
  {
    CertificateRecord c = base;
    c.issuer_name = "Other Issuer";
    check_broken(c);
  }
  {
    CertificateRecord c = base;
    c.serial ^= 1;
    check_broken(c);
  }
  {
    CertificateRecord c = base;
    c.not_before -= 1;
    check_broken(c);
  }
  {
    CertificateRecord c = base;
    c.not_after += 1;
    check_broken(c);
  }
  {
    CertificateRecord c = base;
    c.subject_public_key.modulus[0] ^= 1;
    check_broken(c);
  }
  {
    CertificateRecord c = base;
    c.attributes[0].second = "AT";
    check_broken(c);
  }
  {
    CertificateRecord c = base;
    c.attributes.emplace_back("extra", "field");
    check_broken(c);
  }
  {
    CertificateRecord c = base;
    c.signature[5] ^= 1;
    check_broken(c);
  }
}

TEST(Certificate, VerifyIsTotalOnGarbage) {
  uint64_t now = utc_now_seconds();
  CertificateRecord c = sample_cert(now);
  c.signature = Bytes{1, 2, 3};
  EXPECT_FALSE(verify_certificate(c, issuer_keys().public_part, now));
  c.signature.clear();
  EXPECT_FALSE(verify_certificate(c, issuer_keys().public_part, now));
}

TEST(Certificate, EncodeDecodeRoundTrip) {
  CertificateRecord c = sample_cert(utc_now_seconds());
  EXPECT_EQ(decode_certificate(encode_certificate(c)), c);
}

TEST(Certificate, ArmorRoundTrip) {
  CertificateRecord c = sample_cert(utc_now_seconds());
  std::string armored = armor_certificate(c);
  EXPECT_NE(armored.find("-----BEGIN ATTESTKIT CERTIFICATE-----"),
            std::string::npos);
  EXPECT_EQ(parse_armored_certificate(armored), c);
}

TEST(Certificate, AttributeOrderPreserved) {
  CertAttributes attrs{{"z", "1"}, {"a", "2"}, {"m", "3"}};
  uint64_t now = utc_now_seconds();
  CertificateRecord c =
      issue_certificate("Test Issuer", issuer_keys().private_part, "s",
                        subject_keys().public_part, now, now + 10, attrs);
  CertificateRecord back = decode_certificate(encode_certificate(c));
  EXPECT_EQ(back.attributes, attrs);
}

TEST(Certificate, SerialsAreFresh) {
  uint64_t now = utc_now_seconds();
  std::set<uint64_t> seen;
  for (int i = 0; i < 16; ++i) seen.insert(sample_cert(now).serial);
  EXPECT_GT(seen.size(), 14u);
}

}  // namespace
}  // namespace attestkit
