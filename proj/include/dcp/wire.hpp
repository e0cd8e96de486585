/*
 * Copyright 2026 The dcp Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Dashcam <-> device messages and their framing.
//
//   frame := length (u32, payload bytes) | type (u8) | payload
//
// All integers are big-endian. Decoding is strict: unknown types, short
// payloads and trailing bytes are all DecodeErrors.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>

#include "dcp/bytes.hpp"
#include "dcp/command.hpp"
#include "dcp/elgamal.hpp"
#include "dcp/zkp.hpp"

namespace dcp {

enum class MessageType : std::uint8_t {
  kConnectRequest = 1,
  kConnectAccept = 2,
  kEnrollmentTransfer = 3,
  kScoreChallenge = 4,
  kScoreProof = 5,
  kPaymentRequest = 6,
  kPaymentAck = 7,
  kRecourseNotice = 8,
};

inline const char* to_string(MessageType t) {
  switch (t) {
    case MessageType::kConnectRequest: return "ConnectRequest";
    case MessageType::kConnectAccept: return "ConnectAccept";
    case MessageType::kEnrollmentTransfer: return "EnrollmentTransfer";
    case MessageType::kScoreChallenge: return "ScoreChallenge";
    case MessageType::kScoreProof: return "ScoreProof";
    case MessageType::kPaymentRequest: return "PaymentRequest";
    case MessageType::kPaymentAck: return "PaymentAck";
    case MessageType::kRecourseNotice: return "RecourseNotice";
  }
  return "Unknown";
}

inline constexpr std::size_t kFrameHeaderBytes = 5;
inline constexpr std::uint32_t kMaxPayloadBytes = 1u << 20;
inline constexpr std::uint32_t kMaxTextBytes = 1024;

struct ConnectRequest {
  friend bool operator==(const ConnectRequest&, const ConnectRequest&) = default;
};

struct ConnectAccept {
  std::uint64_t device_id = 0;  // assigned by the dashcam
  std::uint64_t session = 0;
  friend bool operator==(const ConnectAccept&, const ConnectAccept&) = default;
};

template <PrimeOrderGroup G>
struct EnrollmentTransfer {
  std::uint64_t device_id = 0;
  PublicKey<G> pk;
  EncryptedTemplate<G> face;
  EncryptedTemplate<G> voice;
  friend bool operator==(const EnrollmentTransfer&, const EnrollmentTransfer&) = default;
};

template <PrimeOrderGroup G>
struct ScoreChallenge {
  Modality modality = Modality::kFace;
  std::uint64_t nonce = 0;
  Ciphertext<G> score;  // encrypted inner product with the probe
  friend bool operator==(const ScoreChallenge&, const ScoreChallenge&) = default;
};

template <PrimeOrderGroup G>
struct ScoreProof {
  std::uint64_t device_id = 0;
  Threshold threshold;  // the device's own threshold, bound into the proof
  MatchProof<G> proof;  // carries the challenge nonce in its context
  friend bool operator==(const ScoreProof&, const ScoreProof&) = default;
};

struct PaymentRequest {
  std::uint64_t device_id = 0;  // m_s
  UseCase use_case = UseCase::kToll;
  std::optional<std::uint32_t> slot;
  std::string merchant;
  friend bool operator==(const PaymentRequest&, const PaymentRequest&) = default;
};

struct PaymentAck {
  std::uint64_t device_id = 0;
  std::string receipt;
  friend bool operator==(const PaymentAck&, const PaymentAck&) = default;
};

enum class RecourseReason : std::uint8_t {
  kNoMatch = 0,
  kMultipleMatches = 1,
  kDecryptionFailure = 2,
  kTimeout = 3,
  kCommandError = 4,
};

inline const char* to_string(RecourseReason r) {
  switch (r) {
    case RecourseReason::kNoMatch: return "no-match";
    case RecourseReason::kMultipleMatches: return "multiple-matches";
    case RecourseReason::kDecryptionFailure: return "decryption-failure";
    case RecourseReason::kTimeout: return "timeout";
    case RecourseReason::kCommandError: return "command-error";
  }
  return "unknown";
}

struct RecourseNotice {
  RecourseReason reason = RecourseReason::kNoMatch;
  std::uint64_t nonce = 0;  // challenge nonce when device-originated, else 0
  friend bool operator==(const RecourseNotice&, const RecourseNotice&) = default;
};

template <PrimeOrderGroup G>
using Message = std::variant<ConnectRequest, ConnectAccept, EnrollmentTransfer<G>, ScoreChallenge<G>,
                             ScoreProof<G>, PaymentRequest, PaymentAck, RecourseNotice>;

template <PrimeOrderGroup G>
MessageType type_of(const Message<G>& m) {
  return static_cast<MessageType>(m.index() + 1);
}

namespace detail {

inline void write_text(ByteWriter& w, const std::string& s) {
  if (s.size() > kMaxTextBytes) throw std::invalid_argument("text field too long");
  w.str(s);
}

inline std::string read_text(ByteReader& r) {
  const std::uint32_t n = r.u32();
  if (n > kMaxTextBytes) throw DecodeError(DecodeError::Kind::kBadLength, "text field too long");
  const ByteView b = r.raw(n);
  return std::string(b.begin(), b.end());
}

inline UseCase read_use_case(ByteReader& r) {
  const std::uint8_t u = r.u8();
  if (u > static_cast<std::uint8_t>(UseCase::kFastFood)) {
    throw DecodeError(DecodeError::Kind::kMalformed, "unknown use case " + std::to_string(u));
  }
  return static_cast<UseCase>(u);
}

template <PrimeOrderGroup G>
struct PayloadWriter {
  ByteWriter& w;

  void operator()(const ConnectRequest&) {}
  void operator()(const ConnectAccept& m) {
    w.u64(m.device_id);
    w.u64(m.session);
  }
  void operator()(const EnrollmentTransfer<G>& m) {
    w.u64(m.device_id);
    G::write(w, m.pk.element);
    m.face.write(w);
    m.voice.write(w);
  }
  void operator()(const ScoreChallenge<G>& m) {
    w.u8(static_cast<std::uint8_t>(m.modality));
    w.u64(m.nonce);
    m.score.write(w);
  }
  void operator()(const ScoreProof<G>& m) {
    w.u64(m.device_id);
    w.i64(m.threshold.value);
    w.blob(m.proof.serialize());
  }
  void operator()(const PaymentRequest& m) {
    if (m.use_case == UseCase::kToll && m.slot) throw std::invalid_argument("toll takes no slot");
    w.u64(m.device_id);
    w.u8(static_cast<std::uint8_t>(m.use_case));
    w.u8(m.slot ? 1 : 0);
    w.u32(m.slot.value_or(0));
    write_text(w, m.merchant);
  }
  void operator()(const PaymentAck& m) {
    w.u64(m.device_id);
    write_text(w, m.receipt);
  }
  void operator()(const RecourseNotice& m) {
    w.u8(static_cast<std::uint8_t>(m.reason));
    w.u64(m.nonce);
  }
};

template <PrimeOrderGroup G>
Message<G> read_payload(MessageType type, ByteReader& r) {
  switch (type) {
    case MessageType::kConnectRequest:
      return ConnectRequest{};
    case MessageType::kConnectAccept: {
      ConnectAccept m;
      m.device_id = r.u64();
      m.session = r.u64();
      return m;
    }
    case MessageType::kEnrollmentTransfer: {
      EnrollmentTransfer<G> m;
      m.device_id = r.u64();
      m.pk.element = G::read_element(r);
      m.face = EncryptedTemplate<G>::read(r);
      m.voice = EncryptedTemplate<G>::read(r);
      if (m.face.modality != Modality::kFace || m.voice.modality != Modality::kVoice) {
        throw DecodeError(DecodeError::Kind::kMalformed, "enrollment templates out of order");
      }
      m.face.owner = m.voice.owner = m.device_id;
      return m;
    }
    case MessageType::kScoreChallenge: {
      ScoreChallenge<G> m;
      m.modality = modality_from_byte(r.u8());
      m.nonce = r.u64();
      m.score = Ciphertext<G>::read(r);
      return m;
    }
    case MessageType::kScoreProof: {
      ScoreProof<G> m;
      m.device_id = r.u64();
      m.threshold = Threshold{r.i64()};
      m.proof = MatchProof<G>::deserialize(r.blob());
      return m;
    }
    case MessageType::kPaymentRequest: {
      PaymentRequest m;
      m.device_id = r.u64();
      m.use_case = read_use_case(r);
      const std::uint8_t has_slot = r.u8();
      const std::uint32_t slot = r.u32();
      if (has_slot > 1 || (has_slot == 0 && slot != 0)) {
        throw DecodeError(DecodeError::Kind::kMalformed, "bad slot encoding");
      }
      if (has_slot) {
        if (m.use_case == UseCase::kToll) throw DecodeError(DecodeError::Kind::kMalformed, "toll with slot");
        m.slot = slot;
      }
      m.merchant = read_text(r);
      return m;
    }
    case MessageType::kPaymentAck: {
      PaymentAck m;
      m.device_id = r.u64();
      m.receipt = read_text(r);
      return m;
    }
    case MessageType::kRecourseNotice: {
      RecourseNotice m;
      const std::uint8_t reason = r.u8();
      if (reason > static_cast<std::uint8_t>(RecourseReason::kCommandError)) {
        throw DecodeError(DecodeError::Kind::kMalformed, "unknown recourse reason");
      }
      m.reason = static_cast<RecourseReason>(reason);
      m.nonce = r.u64();
      return m;
    }
  }
  throw DecodeError(DecodeError::Kind::kUnknownType,
                    "unknown message type " + std::to_string(static_cast<int>(type)));
}

}  // namespace detail

template <PrimeOrderGroup G>
Bytes encode_frame(const Message<G>& m) {
  ByteWriter payload;
  std::visit(detail::PayloadWriter<G>{payload}, m);
  if (payload.size() > kMaxPayloadBytes) throw std::invalid_argument("payload too large");
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(payload.size()));
  w.u8(static_cast<std::uint8_t>(type_of<G>(m)));
  w.raw(payload.bytes());
  return std::move(w).take();
}

// Decodes exactly one frame. Throws DecodeError.
template <PrimeOrderGroup G>
Message<G> decode_frame(ByteView frame) {
  ByteReader r(frame);
  const std::uint32_t len = r.u32();
  const std::uint8_t type = r.u8();
  if (type < 1 || type > 8) {
    throw DecodeError(DecodeError::Kind::kUnknownType, "unknown message type " + std::to_string(type));
  }
  if (len > kMaxPayloadBytes) throw DecodeError(DecodeError::Kind::kBadLength, "payload too large");
  if (len != r.remaining()) {
    throw DecodeError(r.remaining() < len ? DecodeError::Kind::kTruncated : DecodeError::Kind::kBadLength,
                      "frame length " + std::to_string(len) + " but " + std::to_string(r.remaining()) +
                          " payload bytes");
  }
  Message<G> m = detail::read_payload<G>(static_cast<MessageType>(type), r);
  r.expect_end();
  return m;
}

// Splits a byte stream into frames.
class FrameAssembler {
 public:
  void feed(ByteView bytes) { buf_.insert(buf_.end(), bytes.begin(), bytes.end()); }

  // Next complete frame, if any. Throws DecodeError on an oversized length.
  std::optional<Bytes> next() {
    if (buf_.size() < kFrameHeaderBytes) return std::nullopt;
    ByteReader r(buf_);
    const std::uint32_t len = r.u32();
    if (len > kMaxPayloadBytes) throw DecodeError(DecodeError::Kind::kBadLength, "payload too large");
    const std::size_t total = kFrameHeaderBytes + len;
    if (buf_.size() < total) return std::nullopt;
    Bytes frame(buf_.begin(), buf_.begin() + static_cast<std::ptrdiff_t>(total));
    buf_.erase(buf_.begin(), buf_.begin() + static_cast<std::ptrdiff_t>(total));
    return frame;
  }

  std::size_t buffered() const { return buf_.size(); }

 private:
  Bytes buf_;
};

}  // namespace dcp
