// Copyright 2026 The attestkit Authors
// Use of this source code is governed by the Apache-2.0 license that can be
// found in the LICENSE file.

#pragma once

#include <stdexcept>
#include <string>

namespace attestkit {

// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input: bad hex, bad record encoding, bad file line.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Cipher, padding or key-size failures from the crypto layer.
class CryptoError : public Error {
 public:
  using Error::Error;
};

// Wrong owner/SRK/key password.
class AuthError : public Error {
 public:
  using Error::Error;
};

// TPM state violations: not owned, already owned, PCR out of range.
class TpmError : public Error {
 public:
  using Error::Error;
};

// ActivateIdentity refused the blob (embedded AIK digest mismatch).
class ActivationError : public Error {
 public:
  using Error::Error;
};

// Filesystem failures.
class IoError : public Error {
 public:
  using Error::Error;
};

// Persistent store problems: missing entries behind an index, lock failures.
class StoreError : public Error {
 public:
  using Error::Error;
};

// Lookup of a label, tag or UUID that is not present.
class NotFoundError : public Error {
 public:
  using Error::Error;
};

// Socket-level failures: connect, bind, torn connection.
class TransportError : public Error {
 public:
  using Error::Error;
};

// Peer violated the wire protocol (oversize frame, bad frame kind) or a
// protocol session failed; messages are tagged with the failing phase.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

}  // namespace attestkit
