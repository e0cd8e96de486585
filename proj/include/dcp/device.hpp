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

// Device role: sans-IO state machine for one passenger's phone.
//
// The device owns the key pair and the plaintext templates. It answers each
// score challenge with a proof of whether the decrypted score exceeds its own
// threshold, and executes (stubbed) payments addressed to it.

#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dcp/audit.hpp"
#include "dcp/elgamal.hpp"
#include "dcp/elgamal_secret.hpp"
#include "dcp/embedding.hpp"
#include "dcp/wire.hpp"
#include "dcp/zkp.hpp"
#include "dcp/zkp_prover.hpp"

namespace dcp {

struct DeviceThresholds {
  Threshold face;
  Threshold voice;

  Threshold for_modality(Modality m) const { return m == Modality::kFace ? face : voice; }
};

struct Receipt {
  std::uint64_t device = 0;
  std::string text;
  PaymentRequest request;
  friend bool operator==(const Receipt&, const Receipt&) = default;
};

template <PrimeOrderGroup G>
class Device {
 public:
  // Enrollment: fresh key pair and encrypted copies of both templates.
  Device(QuantizedTemplate face, QuantizedTemplate voice, DeviceThresholds thresholds, Rng rng,
         bool send_enrollment = true)
      : face_(std::move(face)),
        voice_(std::move(voice)),
        thresholds_(thresholds),
        rng_(std::move(rng)),
        send_enrollment_(send_enrollment),
        audit_("device") {
    if (face_.modality() != Modality::kFace || voice_.modality() != Modality::kVoice) {
      throw ShapeError("device templates must be one face and one voice template");
    }
    if (face_.dim() != voice_.dim() || face_.scale() != voice_.scale()) {
      throw ShapeError("face and voice templates must share dimension and scale");
    }
    keys_ = keygen<G>(rng_);
    enc_face_ = encrypt_template(keys_.pub, face_, 0, rng_);
    enc_voice_ = encrypt_template(keys_.pub, voice_, 0, rng_);
  }

  std::vector<Bytes> start(double now) {
    audit_.add(now, "connect-request");
    return {encode_frame<G>(ConnectRequest{})};
  }

  // Never throws on any input bytes; failures are audited.
  std::vector<Bytes> on_message(double now, ByteView frame) {
    std::vector<Bytes> out;
    Message<G> msg;
    try {
      msg = decode_frame<G>(frame);
    } catch (const DecodeError& e) {
      audit_.add(now, "decode-error", std::string(to_string(e.kind())) + ": " + e.what());
      return out;
    }
    try {
      std::visit([&](const auto& m) { handle(now, m, out); }, msg);
    } catch (const std::exception& e) {
      audit_.add(now, "handler-error", e.what());
    }
    return out;
  }

  std::optional<std::uint64_t> id() const { return id_; }
  const PublicKey<G>& public_key() const { return keys_.pub; }
  const KeyPair<G>& keys() const { return keys_; }
  const QuantizedTemplate& face() const { return face_; }
  const QuantizedTemplate& voice() const { return voice_; }
  const DeviceThresholds& thresholds() const { return thresholds_; }
  std::int64_t bound() const { return score_bound(face_.dim(), face_.scale()); }
  const std::vector<Receipt>& receipts() const { return receipts_; }
  const std::vector<RecourseNotice>& notices() const { return notices_; }
  const AuditLog& audit() const { return audit_; }
  AuditLog& audit() { return audit_; }

  EnrollmentTransfer<G> enrollment() const {
    EnrollmentTransfer<G> m{id_.value_or(0), keys_.pub, enc_face_, enc_voice_};
    m.face.owner = m.voice.owner = m.device_id;
    return m;
  }

 private:
  void handle(double now, const ConnectAccept& m, std::vector<Bytes>& out) {
    if (id_) {
      audit_.add(now, "duplicate-accept");
      return;
    }
    id_ = m.device_id;
    session_ = m.session;
    audit_.add(now, "connected");
    if (send_enrollment_) out.push_back(encode_frame<G>(enrollment()));
  }

  void handle(double now, const ScoreChallenge<G>& m, std::vector<Bytes>& out) {
    if (!id_) {
      audit_.add(now, "challenge-before-connect");
      return;
    }
    if (!seen_.insert(m.nonce).second) {
      audit_.add(now, "replayed-challenge");
      return;
    }
    const ProofContext ctx{*id_, m.modality, m.nonce};
    const Threshold t = thresholds_.for_modality(m.modality);
    try {
      auto proof = prove_match(keys_, m.score, t, bound(), ctx, rng_);
      out.push_back(encode_frame<G>(ScoreProof<G>{*id_, t, std::move(proof)}));
    } catch (const CannotProve& e) {
      audit_.add(now, "decryption-failure", e.what());
      out.push_back(encode_frame<G>(RecourseNotice{RecourseReason::kDecryptionFailure, m.nonce}));
    }
  }

  void handle(double now, const PaymentRequest& m, std::vector<Bytes>& out) {
    if (!id_ || m.device_id != *id_) {
      audit_.add(now, "payment-for-other-device");
      return;
    }
    // Payment execution is a stub: the receipt only records what was paid.
    std::string text = "receipt-" + std::to_string(receipts_.size() + 1) + ":" + to_string(m.use_case);
    if (m.slot) text += ":" + std::to_string(*m.slot);
    text += "@" + m.merchant;
    if (text.size() > kMaxTextBytes) text.resize(kMaxTextBytes);
    receipts_.push_back({*id_, text, m});
    audit_.add(now, "payment", text);
    out.push_back(encode_frame<G>(PaymentAck{*id_, text}));
  }

  void handle(double now, const RecourseNotice& m, std::vector<Bytes>&) {
    notices_.push_back(m);
    audit_.add(now, "recourse", to_string(m.reason));
  }

  template <class M>
  void handle(double now, const M& m, std::vector<Bytes>&) {
    audit_.add(now, "unexpected-message", to_string(type_of<G>(Message<G>{m})));
  }

  QuantizedTemplate face_;
  QuantizedTemplate voice_;
  DeviceThresholds thresholds_;
  Rng rng_;
  bool send_enrollment_ = true;
  AuditLog audit_;
  KeyPair<G> keys_;
  EncryptedTemplate<G> enc_face_;
  EncryptedTemplate<G> enc_voice_;
  std::optional<std::uint64_t> id_;
  std::uint64_t session_ = 0;
  std::set<std::uint64_t> seen_;
  std::vector<Receipt> receipts_;
  std::vector<RecourseNotice> notices_;
};

}  // namespace dcp
