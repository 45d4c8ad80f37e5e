// Copyright 2026 The attestkit Authors
// Use of this source code is governed by the Apache-2.0 license that can be
// found in the LICENSE file.
//
// Framed TCP transport. Every frame is [kind:1][length:4 BE][payload]; kind 0
// carries a one-byte command code, kind 1 carries an encoded record. Receivers
// that find the other frame kind (or an unexpected tag) consume the frame and
// report absence, so a protocol peer can always resynchronize on the next
// frame boundary.

#pragma once

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <functional>
#include <optional>
#include <string>

#include "attestkit/blob.hpp"

namespace attestkit {

enum class NetCommand : uint8_t {
  kUnknown = 0,
  kAck = 1,
  kNack = 2,
  kInit = 3,
  kClose = 4,
  kKnownHashes = 5,
  kString = 6,
  kRaRequest = 7,
  kRaResponse = 8,
  kPcaRequest = 9,
  kPcaResponse = 10,
};

inline constexpr uint8_t kFrameCommand = 0;
inline constexpr uint8_t kFrameRecord = 1;
inline constexpr uint32_t kMaxFrameBytes = 64u * 1024 * 1024;

// Observer for tests that want to inspect raw frames (kind, payload) as they
// pass in either direction.
using FrameObserver =
    std::function<void(bool outgoing, uint8_t kind, const Bytes& payload)>;

class Endpoint {
 public:
  Endpoint() = default;
  explicit Endpoint(int fd) : fd_(fd) { configure(); }

  Endpoint(Endpoint&& other) noexcept { *this = std::move(other); }
  Endpoint& operator=(Endpoint&& other) noexcept {
    close();
    fd_ = other.fd_;
    observer_ = std::move(other.observer_);
    other.fd_ = -1;
    return *this;
  }
  Endpoint(const Endpoint&) = delete;
  Endpoint& operator=(const Endpoint&) = delete;
  ~Endpoint() { close(); }

  static Endpoint connect(const std::string& host, uint16_t port) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    int rc = ::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints,
                           &res);
    if (rc != 0) {
      throw TransportError("cannot resolve " + host + ": " +
                           gai_strerror(rc));
    }
    int fd = -1;
    for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
      fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
      if (fd < 0) continue;
      if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
      ::close(fd);
      fd = -1;
    }
    ::freeaddrinfo(res);
    if (fd < 0) {
      throw TransportError("cannot connect to " + host + ":" +
                           std::to_string(port));
    }
    return Endpoint(fd);
  }

  bool is_open() const { return fd_ >= 0; }

  void close() {
    if (fd_ >= 0) {
      ::close(fd_);
      fd_ = -1;
    }
  }

  void set_frame_observer(FrameObserver obs) { observer_ = std::move(obs); }

  std::string remote_ip() const {
    sockaddr_storage addr{};
    socklen_t len = peer_address(addr);
    char host[NI_MAXHOST];
    if (::getnameinfo(reinterpret_cast<sockaddr*>(&addr), len, host,
                      sizeof(host), nullptr, 0, NI_NUMERICHOST) != 0) {
      throw TransportError("cannot format peer address");
    }
    return host;
  }

  std::string remote_hostname() const {
    sockaddr_storage addr{};
    socklen_t len = peer_address(addr);
    char host[NI_MAXHOST];
    if (::getnameinfo(reinterpret_cast<sockaddr*>(&addr), len, host,
                      sizeof(host), nullptr, 0, 0) == 0) {
      return host;
    }
    return remote_ip();
  }

  // -- frame primitives ---------------------------------------------------

  void send_command(NetCommand cmd) {
    send_frame(kFrameCommand, Bytes{static_cast<uint8_t>(cmd)});
  }

  NetCommand receive_command() {
    auto [kind, payload] = receive_frame();
    if (kind != kFrameCommand || payload.size() != 1) {
      return NetCommand::kUnknown;
    }
    uint8_t code = payload[0];
    if (code > static_cast<uint8_t>(NetCommand::kPcaResponse)) {
      return NetCommand::kUnknown;
    }
    return static_cast<NetCommand>(code);
  }

  void send_record(const Record& r) {
    send_frame(kFrameRecord, encode_record(r));
  }

  // Typed receive: the tag byte leads the payload, so a frame carrying the
  // wrong record type is skipped without deserializing it.
  std::optional<Record> receive_record(RecordTag expected) {
    auto [kind, payload] = receive_frame();
    if (kind != kFrameRecord) return std::nullopt;
    if (payload.empty() || payload[0] != static_cast<uint8_t>(expected)) {
      return std::nullopt;
    }
    return decode_record(payload);
  }

  void send_ack() { send_command(NetCommand::kAck); }
  void send_nack() { send_command(NetCommand::kNack); }
  bool receive_ack() { return receive_command() == NetCommand::kAck; }

  void send_frame(uint8_t kind, const Bytes& payload) {
    if (payload.size() > kMaxFrameBytes) {
      throw ProtocolError("outgoing frame exceeds size limit");
    }
    if (observer_) observer_(true, kind, payload);
    Bytes header{kind};
    append_u32(header, static_cast<uint32_t>(payload.size()));
    write_all(header.data(), header.size());
    write_all(payload.data(), payload.size());
  }

  std::pair<uint8_t, Bytes> receive_frame() {
    uint8_t header[5];
    read_exact(header, sizeof(header));
    uint32_t length = read_u32(std::span<const uint8_t>(header + 1, 4));
    if (length > kMaxFrameBytes) {
      close();
      throw ProtocolError("incoming frame exceeds size limit");
    }
    Bytes payload(length);
    if (length > 0) read_exact(payload.data(), length);
    if (observer_) observer_(false, header[0], payload);
    return {header[0], std::move(payload)};
  }

 private:
  socklen_t peer_address(sockaddr_storage& addr) const {
    socklen_t len = sizeof(addr);
    if (fd_ < 0) throw TransportError("endpoint is not connected");
    if (::getpeername(fd_, reinterpret_cast<sockaddr*>(&addr), &len) != 0) {
      throw TransportError("cannot read peer address");
    }
    return len;
  }

  void configure() {
    timeval tv{};
    tv.tv_sec = 30;
    ::setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
    ::setsockopt(fd_, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof(tv));
  }

  void read_exact(uint8_t* buf, size_t n) {
    size_t got = 0;
    while (got < n) {
      ssize_t rc = ::recv(fd_, buf + got, n - got, 0);
      if (rc == 0) {
        close();
        throw TransportError("connection closed mid-frame");
      }
      if (rc < 0) {
        if (errno == EINTR) continue;
        close();
        throw TransportError(std::string("recv failed: ") + strerror(errno));
      }
      got += static_cast<size_t>(rc);
    }
  }

  void write_all(const uint8_t* buf, size_t n) {
    size_t sent = 0;
    while (sent < n) {
      ssize_t rc = ::send(fd_, buf + sent, n - sent, MSG_NOSIGNAL);
      if (rc < 0) {
        if (errno == EINTR) continue;
        close();
        throw TransportError(std::string("send failed: ") + strerror(errno));
      }
      sent += static_cast<size_t>(rc);
    }
  }

  int fd_ = -1;
  FrameObserver observer_;
};

class Listener {
 public:
  // Binds to the given port; port 0 picks a free one (see local_port()).
  explicit Listener(uint16_t port) {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd_ < 0) throw TransportError("cannot create listening socket");
    int one = 1;
    ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_ANY);
    addr.sin_port = htons(port);
    if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
      int err = errno;
      ::close(fd_);
      fd_ = -1;
      throw TransportError("cannot bind port " + std::to_string(port) + ": " +
                           strerror(err));
    }
    if (::listen(fd_, 8) != 0) {
      ::close(fd_);
      fd_ = -1;
      throw TransportError("cannot listen");
    }
  }

  Listener(Listener&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }
  Listener(const Listener&) = delete;
  Listener& operator=(const Listener&) = delete;
  ~Listener() { close(); }

  uint16_t local_port() const {
    sockaddr_in addr{};
    socklen_t len = sizeof(addr);
    if (fd_ < 0 ||
        ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len) != 0) {
      throw TransportError("cannot read listening port");
    }
    return ntohs(addr.sin_port);
  }

  Endpoint accept() {
    int fd = -1;
    do {
      fd = ::accept(fd_, nullptr, nullptr);
    } while (fd < 0 && errno == EINTR);
    if (fd < 0) {
      throw TransportError(std::string("accept failed: ") + strerror(errno));
    }
    return Endpoint(fd);
  }

  void close() {
    if (fd_ >= 0) {
      ::close(fd_);
      fd_ = -1;
    }
  }

 private:
  int fd_ = -1;
};

}  // namespace attestkit
