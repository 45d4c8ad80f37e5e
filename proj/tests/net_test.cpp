// Copyright 2026 The attestkit Authors
// Use of this source code is governed by the Apache-2.0 license that can be
// found in the LICENSE file.

#include "attestkit/net.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <future>
#include <random>
#include <thread>

#include <gtest/gtest.h>

#include "attestkit/measurement.hpp"
#include "support/testutil.hpp"

namespace attestkit {
namespace {

// Server/client endpoint pair on loopback.
struct Pair {
  Listener listener{0};
  Endpoint client;
  Endpoint server;

  Pair() {
    auto accepted = std::async(std::launch::async,
                               [this] { return listener.accept(); });
    client = Endpoint::connect("127.0.0.1", listener.local_port());
    server = accepted.get();
  }
};

int raw_connect(uint16_t port) {
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  EXPECT_GE(fd, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  ::inet_pton(AF_INET, "127.0.0.1", &addr.sin_addr);
  EXPECT_EQ(::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)),
            0);
  return fd;
}

TEST(Net, CommandRoundTrip) {
  Pair p;
  p.client.send_command(NetCommand::kRaRequest);
  EXPECT_EQ(p.server.receive_command(), NetCommand::kRaRequest);
  p.server.send_ack();
  EXPECT_TRUE(p.client.receive_ack());
  p.server.send_nack();
  EXPECT_FALSE(p.client.receive_ack());
  EXPECT_EQ(static_cast<uint8_t>(NetCommand::kPcaResponse), 10);
  EXPECT_EQ(static_cast<uint8_t>(NetCommand::kString), 6);
}

TEST(Net, RecordRoundTrip) {
  Pair p;
  Record r = raw_record(to_bytes("payload bytes"));
  p.client.send_record(r);
  std::optional<Record> got = p.server.receive_record(RecordTag::kRaw);
  ASSERT_TRUE(got.has_value());
  EXPECT_EQ(*got, r);
}

TEST(Net, WrongExpectedTagIsAbsent) {
  Pair p;
  p.client.send_record(raw_record(to_bytes("x")));
  EXPECT_FALSE(p.server.receive_record(RecordTag::kQuote).has_value());
}

TEST(Net, RecordFrameDecodesAsUnknownCommand) {
  Pair p;
  p.client.send_record(raw_record(to_bytes("x")));
  EXPECT_EQ(p.server.receive_command(), NetCommand::kUnknown);
}

TEST(Net, CommandFrameIsAbsentRecord) {
  Pair p;
  p.client.send_ack();
  EXPECT_FALSE(p.server.receive_record(RecordTag::kRaw).has_value());
}

TEST(Net, UnknownCommandCode) {
  Pair p;
  p.client.send_frame(kFrameCommand, Bytes{0xee});
  EXPECT_EQ(p.server.receive_command(), NetCommand::kUnknown);
  p.client.send_frame(kFrameCommand, Bytes{1, 2});
  EXPECT_EQ(p.server.receive_command(), NetCommand::kUnknown);
}

TEST(Net, FrameSizes) {
  Pair p;
  std::mt19937 rng(7);
  for (size_t n : {size_t{0}, size_t{1}, size_t{16}, size_t{65536},
                   size_t{1} << 20}) {
    Bytes payload = testutil::random_vec(rng, n);
    p.client.send_frame(kFrameRecord, payload);
    auto [kind, got] = p.server.receive_frame();
    EXPECT_EQ(kind, kFrameRecord);
    EXPECT_EQ(got, payload) << "payload size " << n;
  }
}

TEST(Net, RandomPayloadSweep) {
  Pair p;
  std::mt19937 rng(8);
  for (int round = 0; round < 40; ++round) {
    Bytes payload = testutil::random_vec(rng, rng() % 20000);
    p.client.send_frame(kFrameRecord, payload);
    auto [kind, got] = p.server.receive_frame();
    EXPECT_EQ(got, payload);
  }
}

TEST(Net, InterleavedKinds) {
  Pair p;
  p.client.send_command(NetCommand::kInit);
  p.client.send_record(raw_record(to_bytes("mid")));
  p.client.send_command(NetCommand::kClose);
  EXPECT_EQ(p.server.receive_command(), NetCommand::kInit);
  std::optional<Record> r = p.server.receive_record(RecordTag::kRaw);
  ASSERT_TRUE(r.has_value());
  EXPECT_EQ(raw_record_payload(*r), to_bytes("mid"));
  EXPECT_EQ(p.server.receive_command(), NetCommand::kClose);
}

TEST(Net, LargeRecord) {
  Pair p;
  MeasurementList ml;
  for (int i = 0; i < 2000; ++i) {
    ml.entries.push_back(
        {10, sha1("app" + std::to_string(i)), "/bin/app" + std::to_string(i)});
  }
  Record r = measurement_list_record(ml);
  auto sent = std::async(std::launch::async,
                         [&] { p.client.send_record(r); });
  std::optional<Record> got =
      p.server.receive_record(RecordTag::kMeasurementList);
  sent.get();
  ASSERT_TRUE(got.has_value());
  EXPECT_EQ(decode_measurement_list(*got), ml);
}

TEST(Net, MidFrameDisconnect) {
  Listener listener(0);
  auto accepted = std::async(std::launch::async,
                             [&] { return listener.accept(); });
  int fd = raw_connect(listener.local_port());
  Endpoint server = accepted.get();
  // Header promises 100 payload bytes; deliver 3 and hang up.
  uint8_t torn[] = {kFrameRecord, 0, 0, 0, 100, 1, 2, 3};
  ASSERT_EQ(::send(fd, torn, sizeof(torn), 0),
            static_cast<ssize_t>(sizeof(torn)));
  ::close(fd);
  EXPECT_THROW(server.receive_record(RecordTag::kRaw), TransportError);
  EXPECT_FALSE(server.is_open());
}

TEST(Net, TornHeaderDisconnect) {
  Listener listener(0);
  auto accepted = std::async(std::launch::async,
                             [&] { return listener.accept(); });
  int fd = raw_connect(listener.local_port());
  Endpoint server = accepted.get();
  uint8_t partial[] = {kFrameRecord, 0};
  ASSERT_EQ(::send(fd, partial, sizeof(partial), 0), 2);
  ::close(fd);
  EXPECT_THROW(server.receive_command(), TransportError);
}

TEST(Net, OversizeFrameRejected) {
  Listener listener(0);
  auto accepted = std::async(std::launch::async,
                             [&] { return listener.accept(); });
  int fd = raw_connect(listener.local_port());
  Endpoint server = accepted.get();
  // 128 MiB announced length, twice the cap.
  uint8_t header[] = {kFrameRecord, 0x08, 0x00, 0x00, 0x00};
  ASSERT_EQ(::send(fd, header, sizeof(header), 0), 5);
  EXPECT_THROW(server.receive_frame(), ProtocolError);
  EXPECT_FALSE(server.is_open());
  ::close(fd);
}

TEST(Net, OversizeSendRejected) {
  Pair p;
  Bytes huge(kMaxFrameBytes + 1);
  EXPECT_THROW(p.client.send_frame(kFrameRecord, huge), ProtocolError);
}

TEST(Net, CloseIsIdempotent) {
  Pair p;
  p.client.close();
  EXPECT_NO_THROW(p.client.close());
  EXPECT_FALSE(p.client.is_open());
}

TEST(Net, RemotePeerAddress) {
  Pair p;
  EXPECT_EQ(p.server.remote_ip(), "127.0.0.1");
  EXPECT_FALSE(p.server.remote_hostname().empty());
  EXPECT_EQ(p.client.remote_ip(), "127.0.0.1");
  p.server.close();
  EXPECT_THROW(p.server.remote_ip(), TransportError);
  EXPECT_THROW(p.server.remote_hostname(), TransportError);
}

TEST(Net, ConnectToClosedPort) {
  uint16_t dead_port;
  {
    Listener listener(0);
    dead_port = listener.local_port();
  }
  EXPECT_THROW(Endpoint::connect("127.0.0.1", dead_port), TransportError);
}

TEST(Net, ObserverSeesBothDirections) {
  Pair p;
  std::vector<std::pair<bool, uint8_t>> seen;
  p.client.set_frame_observer(
      [&](bool outgoing, uint8_t kind, const Bytes&) {
        seen.emplace_back(outgoing, kind);
      });
  p.client.send_record(raw_record(to_bytes("a")));
  p.server.receive_record(RecordTag::kRaw);
  p.server.send_ack();
  p.client.receive_ack();
  ASSERT_EQ(seen.size(), 2u);
  EXPECT_EQ(seen[0], (std::pair<bool, uint8_t>{true, kFrameRecord}));
  EXPECT_EQ(seen[1], (std::pair<bool, uint8_t>{false, kFrameCommand}));
}

TEST(Net, ListenerReportsPort) {
  Listener listener(0);
  EXPECT_GT(listener.local_port(), 0);
}

}  // namespace
}  // namespace attestkit
