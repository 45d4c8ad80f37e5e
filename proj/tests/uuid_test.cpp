// Copyright 2026 The attestkit Authors
// Use of this source code is governed by the Apache-2.0 license that can be
// found in the LICENSE file.

#include "attestkit/uuid.hpp"

#include <set>

#include <gtest/gtest.h>

namespace attestkit {
namespace {

TEST(Uuid, TextRoundTrip) {
  Uuid u = Uuid::random();
  EXPECT_EQ(Uuid::from_text(u.text()), u);
}

TEST(Uuid, BytesRoundTrip) {
  Uuid u = Uuid::random();
  EXPECT_EQ(Uuid::from_bytes(u.to_vector()), u);
}

TEST(Uuid, TextShape) {
  std::string t = Uuid::random().text();
  ASSERT_EQ(t.size(), 36u);
  EXPECT_EQ(t[8], '-');
  EXPECT_EQ(t[13], '-');
  EXPECT_EQ(t[18], '-');
  EXPECT_EQ(t[23], '-');
  for (size_t i = 0; i < t.size(); ++i) {
    if (i == 8 || i == 13 || i == 18 || i == 23) continue;
    EXPECT_TRUE(std::isxdigit(static_cast<unsigned char>(t[i]))) << t;
    EXPECT_FALSE(std::isupper(static_cast<unsigned char>(t[i])));
  }
}

TEST(Uuid, KnownText) {
  Uuid u = Uuid::from_text("00000009-0008-0007-0605-0a0b0c0d0e0f");
  Bytes expected{0x00, 0x00, 0x00, 0x09, 0x00, 0x08, 0x00, 0x07,
                 0x06, 0x05, 0x0a, 0x0b, 0x0c, 0x0d, 0x0e, 0x0f};
  EXPECT_EQ(u.to_vector(), expected);
  EXPECT_EQ(u.text(), "00000009-0008-0007-0605-0a0b0c0d0e0f");
}

TEST(Uuid, FromTextRejectsMalformed) {
  EXPECT_THROW(Uuid::from_text(""), ParseError);
  EXPECT_THROW(Uuid::from_text("00000009-0008-0007-0605-0a0b0c0d0e"),
               ParseError);
  EXPECT_THROW(Uuid::from_text("00000009-0008-0007-0605-0a0b0c0d0e0f0a"),
               ParseError);
  EXPECT_THROW(Uuid::from_text("000000090008-0007-0605-0a0b0c0d0e0fxx"),
               ParseError);
  EXPECT_THROW(Uuid::from_text("00000009-0008-0007-0605-0a0b0c0d0e0g"),
               ParseError);
}

TEST(Uuid, FromBytesRejectsWrongLength) {
  EXPECT_THROW(Uuid::from_bytes(Bytes(15)), ParseError);
  EXPECT_THROW(Uuid::from_bytes(Bytes(17)), ParseError);
}

TEST(Uuid, RandomHasVersion4Layout) {
  for (int i = 0; i < 32; ++i) {
    Uuid u = Uuid::random();
    EXPECT_EQ(u.bytes()[6] >> 4, 0x4);
    EXPECT_EQ(u.bytes()[8] >> 6, 0x2);
  }
}

TEST(Uuid, NodeIsFinalSixBytes) {
  Uuid u = Uuid::from_text("00000009-0008-0007-0605-0a0b0c0d0e0f");
  Bytes node = u.node();
  EXPECT_EQ(node, (Bytes{0x0a, 0x0b, 0x0c, 0x0d, 0x0e, 0x0f}));
  EXPECT_EQ(u.node_hex(), "0a0b0c0d0e0f");
}

TEST(Uuid, RandomIsFresh) {
  std::set<std::string> seen;
  for (int i = 0; i < 1000; ++i) seen.insert(Uuid::random().text());
  EXPECT_EQ(seen.size(), 1000u);
}

TEST(Uuid, DefaultIsZero) {
  EXPECT_EQ(Uuid().text(), "00000000-0000-0000-0000-000000000000");
}

TEST(Uuid, Ordering) {
  Uuid a = Uuid::from_text("00000000-0000-0000-0000-000000000001");
  Uuid b = Uuid::from_text("00000000-0000-0000-0000-000000000002");
  EXPECT_LT(a, b);
  EXPECT_NE(a, b);
  EXPECT_EQ(a, a);
}

}  // namespace
}  // namespace attestkit
