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

// Dashcam role: sans-IO state machine.
//
// The dashcam holds device public keys and encrypted templates only. It turns
// captured probes into encrypted scores, forwards them to the owning device,
// and verifies the proofs that come back. This header deliberately pulls in
// no secret-key or prover code.
//
// Fusion: a face capture challenges every enrolled device with every captured
// face; a device is a candidate iff at least one of its face proofs verified
// as a match. A payment challenges candidates with the speaker's voice, and
// the payer is the unique device with a verified voice match.

#pragma once

#include <bit>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "dcp/audit.hpp"
#include "dcp/command.hpp"
#include "dcp/elgamal.hpp"
#include "dcp/embedding.hpp"
#include "dcp/wire.hpp"
#include "dcp/zkp.hpp"

namespace dcp {

using LinkId = std::uint32_t;

struct Outbound {
  LinkId link = 0;
  Bytes frame;
  friend bool operator==(const Outbound&, const Outbound&) = default;
};

struct DashcamConfig {
  std::uint32_t dim = 128;
  std::int32_t scale = 127;
  double challenge_timeout = 5.0;  // simulated seconds
  std::string merchant = "merchant";

  std::int64_t bound() const { return score_bound(dim, scale); }
};

enum class ChallengeOutcome : std::uint8_t { kMatch, kNonMatch, kInvalidProof, kTimeout, kDeviceFailure };

inline const char* to_string(ChallengeOutcome o) {
  switch (o) {
    case ChallengeOutcome::kMatch: return "match";
    case ChallengeOutcome::kNonMatch: return "non-match";
    case ChallengeOutcome::kInvalidProof: return "invalid-proof";
    case ChallengeOutcome::kTimeout: return "timeout";
    case ChallengeOutcome::kDeviceFailure: return "device-failure";
  }
  return "unknown";
}

struct ChallengeRecord {
  std::uint32_t round = 0;
  Modality modality = Modality::kFace;
  std::uint64_t device = 0;
  std::uint32_t probe = 0;  // index of the face within its capture; 0 for voice
  ChallengeOutcome outcome = ChallengeOutcome::kNonMatch;
  friend bool operator==(const ChallengeRecord&, const ChallengeRecord&) = default;
};

enum class DecisionOutcome : std::uint8_t { kUniquePayer, kNoMatch, kMultipleMatches };

inline const char* to_string(DecisionOutcome o) {
  switch (o) {
    case DecisionOutcome::kUniquePayer: return "unique-payer";
    case DecisionOutcome::kNoMatch: return "no-match";
    case DecisionOutcome::kMultipleMatches: return "multiple-matches";
  }
  return "unknown";
}

struct PayerDecision {
  DecisionOutcome outcome = DecisionOutcome::kNoMatch;
  std::optional<std::uint64_t> payer;
  std::vector<std::uint64_t> matched;     // sorted
  std::vector<std::uint64_t> candidates;  // C when the voice round started, sorted
  std::vector<ChallengeRecord> rounds;    // voice challenges of this payment
  PaymentCommand command;
  double time = 0.0;
  friend bool operator==(const PayerDecision&, const PayerDecision&) = default;
};

struct MessageEvent {
  double time = 0.0;
  LinkId link = 0;
  Bytes frame;
};

struct CaptureEvent {
  double time = 0.0;
  std::vector<QuantizedTemplate> faces;
  std::optional<std::uint64_t> only_device;  // restrict the round to one device
};

struct PaymentEvent {
  double time = 0.0;
  QuantizedTemplate voice;
  PaymentCommand command;
};

struct TimerEvent {
  double time = 0.0;
};

using DashcamEvent = std::variant<MessageEvent, CaptureEvent, PaymentEvent, TimerEvent>;

template <PrimeOrderGroup G>
class Dashcam {
 public:
  struct Peer {
    LinkId link = 0;
    std::uint64_t id = 0;
    bool enrolled = false;
    PublicKey<G> pk;
    EncryptedTemplate<G> face;
    EncryptedTemplate<G> voice;
  };

  Dashcam(DashcamConfig config, Rng rng)
      : config_(std::move(config)), rng_(std::move(rng)), audit_("dashcam") {
    session_ = rng_.next_u64();
  }

  std::vector<Outbound> step(const DashcamEvent& event) {
    return std::visit(
        [this](const auto& e) -> std::vector<Outbound> {
          using E = std::decay_t<decltype(e)>;
          if constexpr (std::is_same_v<E, MessageEvent>) return on_message(e.time, e.link, e.frame);
          if constexpr (std::is_same_v<E, CaptureEvent>) return on_capture(e.time, e.faces, e.only_device);
          if constexpr (std::is_same_v<E, PaymentEvent>) return on_payment(e.time, e.voice, e.command);
          if constexpr (std::is_same_v<E, TimerEvent>) return on_timer(e.time);
        },
        event);
  }

  // Never throws on any input bytes; failures are audited.
  std::vector<Outbound> on_message(double now, LinkId link, ByteView frame) {
    std::vector<Outbound> out;
    Message<G> msg;
    try {
      msg = decode_frame<G>(frame);
    } catch (const DecodeError& e) {
      audit_.add(now, "decode-error", "link " + std::to_string(link) + ": " + to_string(e.kind()) + ": " + e.what());
      return out;
    }
    try {
      std::visit([&](const auto& m) { handle(now, link, m, out); }, msg);
    } catch (const std::exception& e) {
      audit_.add(now, "handler-error", e.what());
    }
    return out;
  }

  // Face prescreen over one capture event.
  std::vector<Outbound> on_capture(double now, const std::vector<QuantizedTemplate>& faces,
                                   std::optional<std::uint64_t> only_device = std::nullopt) {
    std::vector<Outbound> out;
    for (const auto& f : faces) check_probe(f, Modality::kFace);
    const std::uint32_t round = next_round_++;
    audit_.add(now, "capture", "round " + std::to_string(round) + ", " + std::to_string(faces.size()) + " faces");
    if (faces.empty()) return out;
    for (const auto& [link, peer] : peers_) {
      if (!peer.enrolled || (only_device && *only_device != peer.id)) continue;
      face_rounds_[round][peer.id] = FaceTally{static_cast<std::uint32_t>(faces.size()), false};
      for (std::uint32_t j = 0; j < faces.size(); ++j) {
        out.push_back(challenge(now, peer, Modality::kFace, round, j,
                                encrypted_inner_product(peer.face, faces[j])));
      }
    }
    return out;
  }

  // Voice identification for a parsed payment command. Waits for outstanding
  // face challenges so that it runs against an up-to-date candidate set.
  std::vector<Outbound> on_payment(double now, const QuantizedTemplate& voice, const PaymentCommand& command) {
    std::vector<Outbound> out;
    check_probe(voice, Modality::kVoice);
    if (payment_) {
      audit_.add(now, "payment-rejected", "a payment is already in progress");
      return out;
    }
    PaymentRound p;
    p.round = next_round_++;
    p.command = command;
    for (const auto& [link, peer] : peers_) {
      if (!peer.enrolled) continue;
      // Encrypted scores are prepared now so the plaintext probe is not kept.
      p.prepared.emplace(peer.id, rerandomize(peer.pk, encrypted_inner_product(peer.voice, voice), rng_));
    }
    payment_ = std::move(p);
    audit_.add(now, "payment", std::string(to_string(command.use_case)) + ", round " + std::to_string(payment_->round));
    maybe_start_payment(now, out);
    return out;
  }

  std::vector<Outbound> on_timer(double now) {
    std::vector<Outbound> out;
    std::vector<std::uint64_t> expired;
    for (const auto& [nonce, p] : pending_) {
      if (p.deadline <= now) expired.push_back(nonce);
    }
    for (std::uint64_t nonce : expired) {
      audit_.add(now, "challenge-timeout", "device " + hex_id(pending_.at(nonce).device));
      resolve(now, nonce, ChallengeOutcome::kTimeout, out);
    }
    return out;
  }

  std::optional<double> next_deadline() const {
    std::optional<double> best;
    for (const auto& [nonce, p] : pending_) {
      if (!best || p.deadline < *best) best = p.deadline;
    }
    return best;
  }

  // ---- inspection ----

  std::uint64_t session() const { return session_; }
  const DashcamConfig& config() const { return config_; }
  const std::map<LinkId, Peer>& peers() const { return peers_; }
  const std::set<std::uint64_t>& candidates() const { return candidates_; }
  const std::vector<PayerDecision>& decisions() const { return decisions_; }
  const std::vector<ChallengeRecord>& history() const { return history_; }
  const std::vector<std::pair<std::uint64_t, std::string>>& receipts() const { return receipts_; }
  const AuditLog& audit() const { return audit_; }
  std::size_t pending_challenges() const { return pending_.size(); }
  bool payment_in_progress() const { return payment_.has_value(); }

  std::optional<LinkId> link_of(std::uint64_t device) const {
    for (const auto& [link, peer] : peers_) {
      if (peer.id == device) return link;
    }
    return std::nullopt;
  }

  // Canonical dump of everything the dashcam holds.
  Bytes serialize_state() const {
    ByteWriter w;
    w.u64(session_);
    w.u32(next_round_);
    w.u32(static_cast<std::uint32_t>(peers_.size()));
    for (const auto& [link, p] : peers_) {
      w.u32(link);
      w.u64(p.id);
      w.u8(p.enrolled ? 1 : 0);
      if (p.enrolled) {
        G::write(w, p.pk.element);
        p.face.write(w);
        p.voice.write(w);
      }
    }
    w.u32(static_cast<std::uint32_t>(candidates_.size()));
    for (auto c : candidates_) w.u64(c);
    w.u32(static_cast<std::uint32_t>(pending_.size()));
    for (const auto& [nonce, p] : pending_) {
      w.u64(nonce);
      w.u32(p.link);
      w.u64(p.device);
      w.u8(static_cast<std::uint8_t>(p.modality));
      w.u32(p.round);
      w.u32(p.probe);
      p.score.write(w);
      w.u64(std::bit_cast<std::uint64_t>(p.deadline));
    }
    w.u32(static_cast<std::uint32_t>(spent_.size()));
    for (auto n : spent_) w.u64(n);
    w.u8(payment_ ? 1 : 0);
    if (payment_) {
      w.u32(payment_->round);
      w.u8(static_cast<std::uint8_t>(payment_->command.use_case));
      w.u32(payment_->command.slot.value_or(0));
      for (const auto& [id, ct] : payment_->prepared) {
        w.u64(id);
        ct.write(w);
      }
    }
    w.u32(static_cast<std::uint32_t>(history_.size()));
    for (const auto& r : history_) {
      w.u32(r.round);
      w.u8(static_cast<std::uint8_t>(r.modality));
      w.u64(r.device);
      w.u32(r.probe);
      w.u8(static_cast<std::uint8_t>(r.outcome));
    }
    w.str(to_jsonl(audit_.records()));
    return std::move(w).take();
  }

 private:
  struct Pending {
    LinkId link = 0;
    std::uint64_t device = 0;
    Modality modality = Modality::kFace;
    std::uint32_t round = 0;
    std::uint32_t probe = 0;
    Ciphertext<G> score;
    double deadline = 0.0;
  };

  struct FaceTally {
    std::uint32_t outstanding = 0;
    bool any_match = false;
  };

  struct PaymentRound {
    std::uint32_t round = 0;
    PaymentCommand command;
    std::map<std::uint64_t, Ciphertext<G>> prepared;
    bool started = false;
    std::vector<std::uint64_t> candidates;
    std::set<std::uint64_t> outstanding;
    std::vector<std::uint64_t> matched;
    std::vector<ChallengeRecord> records;
  };

  static std::string hex_id(std::uint64_t id) {
    ByteWriter w;
    w.u64(id);
    return to_hex(w.bytes());
  }

  void check_probe(const QuantizedTemplate& t, Modality m) const {
    if (t.modality() != m || t.dim() != config_.dim || t.scale() != config_.scale) {
      throw ShapeError("probe does not match the configured template shape");
    }
  }

  std::uint64_t fresh_nonce() {
    for (;;) {
      const std::uint64_t n = rng_.next_u64();
      if (n != 0 && !pending_.count(n) && !spent_.count(n)) return n;
    }
  }

  Outbound challenge(double now, const Peer& peer, Modality m, std::uint32_t round, std::uint32_t probe,
                     const Ciphertext<G>& score) {
    const Ciphertext<G> fresh = rerandomize(peer.pk, score, rng_);
    const std::uint64_t nonce = fresh_nonce();
    pending_.emplace(nonce, Pending{peer.link, peer.id, m, round, probe, fresh, now + config_.challenge_timeout});
    return {peer.link, encode_frame<G>(ScoreChallenge<G>{m, nonce, fresh})};
  }

  void send(LinkId link, const Message<G>& m, std::vector<Outbound>& out) {
    out.push_back({link, encode_frame<G>(m)});
  }

  void handle(double now, LinkId link, const ConnectRequest&, std::vector<Outbound>& out) {
    if (peers_.count(link)) {
      audit_.add(now, "duplicate-connect", "link " + std::to_string(link));
      return;
    }
    std::uint64_t id = 0;
    do {
      id = rng_.next_u64();
    } while (id == 0 || link_of(id));
    peers_.emplace(link, Peer{link, id, false, {}, {}, {}});
    audit_.add(now, "connect", "link " + std::to_string(link) + " -> device " + hex_id(id));
    send(link, ConnectAccept{id, session_}, out);
  }

  void handle(double now, LinkId link, const EnrollmentTransfer<G>& m, std::vector<Outbound>&) {
    auto it = peers_.find(link);
    if (it == peers_.end()) {
      audit_.add(now, "unexpected-message", "enrollment before connect on link " + std::to_string(link));
      return;
    }
    Peer& p = it->second;
    if (m.device_id != p.id) {
      audit_.add(now, "device-id-mismatch", "enrollment claims " + hex_id(m.device_id));
      return;
    }
    if (p.enrolled) {
      audit_.add(now, "duplicate-enrollment", "device " + hex_id(p.id));
      return;
    }
    if (m.face.dim() != config_.dim || m.voice.dim() != config_.dim) {
      audit_.add(now, "bad-enrollment", "template dimension " + std::to_string(m.face.dim()));
      return;
    }
    p.enrolled = true;
    p.pk = m.pk;
    p.face = m.face;
    p.voice = m.voice;
    p.face.owner = p.voice.owner = p.id;
    audit_.add(now, "enrolled", "device " + hex_id(p.id));
  }

  void handle(double now, LinkId link, const ScoreProof<G>& m, std::vector<Outbound>& out) {
    const std::uint64_t nonce = m.proof.context.nonce;
    auto it = pending_.find(nonce);
    if (it == pending_.end()) {
      audit_.add(now, spent_.count(nonce) ? "replayed-proof" : "unknown-proof",
                 "link " + std::to_string(link) + ", device " + hex_id(m.device_id));
      return;
    }
    const Pending& p = it->second;
    if (p.link != link || p.device != m.device_id) {
      audit_.add(now, "proof-from-wrong-device", "link " + std::to_string(link));
      return;
    }
    const Peer& peer = peers_.at(link);
    const ProofContext expected{p.device, p.modality, nonce};
    const MatchResult r = verify_match(peer.pk, p.score, m.threshold, config_.bound(), m.proof, expected);
    ChallengeOutcome outcome = ChallengeOutcome::kNonMatch;
    if (r == MatchResult::kMatch) {
      outcome = ChallengeOutcome::kMatch;
    } else if (r == MatchResult::kInvalid) {
      outcome = ChallengeOutcome::kInvalidProof;
      audit_.add(now, "invalid-proof", "device " + hex_id(p.device));
    }
    resolve(now, nonce, outcome, out);
  }

  void handle(double now, LinkId link, const RecourseNotice& m, std::vector<Outbound>& out) {
    auto it = pending_.find(m.nonce);
    if (m.reason == RecourseReason::kDecryptionFailure && it != pending_.end() && it->second.link == link) {
      audit_.add(now, "device-decryption-failure", "device " + hex_id(it->second.device));
      resolve(now, m.nonce, ChallengeOutcome::kDeviceFailure, out);
      return;
    }
    audit_.add(now, "device-recourse", std::string(to_string(m.reason)) + " on link " + std::to_string(link));
  }

  void handle(double now, LinkId link, const PaymentAck& m, std::vector<Outbound>&) {
    auto it = peers_.find(link);
    if (it == peers_.end() || it->second.id != m.device_id) {
      audit_.add(now, "unexpected-message", "payment ack on link " + std::to_string(link));
      return;
    }
    receipts_.emplace_back(m.device_id, m.receipt);
    audit_.add(now, "payment-ack", "device " + hex_id(m.device_id));
  }

  template <class M>
  void handle(double now, LinkId link, const M& m, std::vector<Outbound>&) {
    audit_.add(now, "unexpected-message",
               std::string(to_string(type_of<G>(Message<G>{m}))) + " on link " + std::to_string(link));
  }

  void resolve(double now, std::uint64_t nonce, ChallengeOutcome outcome, std::vector<Outbound>& out) {
    const Pending p = pending_.at(nonce);
    pending_.erase(nonce);
    spent_.insert(nonce);
    const ChallengeRecord rec{p.round, p.modality, p.device, p.probe, outcome};
    history_.push_back(rec);
    const bool match = outcome == ChallengeOutcome::kMatch;

    if (p.modality == Modality::kFace) {
      auto round = face_rounds_.find(p.round);
      if (round == face_rounds_.end()) return;
      FaceTally& tally = round->second.at(p.device);
      tally.any_match = tally.any_match || match;
      if (--tally.outstanding == 0) {
        if (tally.any_match) {
          if (candidates_.insert(p.device).second) audit_.add(now, "candidate-join", "device " + hex_id(p.device));
        } else if (candidates_.erase(p.device)) {
          audit_.add(now, "candidate-leave", "device " + hex_id(p.device));
        }
        round->second.erase(p.device);
        if (round->second.empty()) face_rounds_.erase(round);
      }
      maybe_start_payment(now, out);
      return;
    }

    if (!payment_ || payment_->round != p.round) return;
    payment_->records.push_back(rec);
    payment_->outstanding.erase(p.device);
    if (match) payment_->matched.push_back(p.device);
    if (payment_->outstanding.empty()) finish_payment(now, out);
  }

  void maybe_start_payment(double now, std::vector<Outbound>& out) {
    if (!payment_ || payment_->started || !face_rounds_.empty()) return;
    PaymentRound& pay = *payment_;
    pay.started = true;
    for (std::uint64_t id : candidates_) {
      auto ct = pay.prepared.find(id);
      const auto link = link_of(id);
      if (ct == pay.prepared.end() || !link) continue;
      pay.candidates.push_back(id);
      pay.outstanding.insert(id);
      out.push_back(challenge(now, peers_.at(*link), Modality::kVoice, pay.round, 0, ct->second));
    }
    pay.prepared.clear();
    if (pay.outstanding.empty()) finish_payment(now, out);
  }

  void finish_payment(double now, std::vector<Outbound>& out) {
    PaymentRound pay = std::move(*payment_);
    payment_.reset();
    PayerDecision d;
    d.time = now;
    d.command = pay.command;
    d.candidates = pay.candidates;
    d.rounds = pay.records;
    d.matched = pay.matched;
    std::sort(d.matched.begin(), d.matched.end());
    if (d.matched.size() == 1) {
      d.outcome = DecisionOutcome::kUniquePayer;
      d.payer = d.matched.front();
      send(*link_of(*d.payer),
           PaymentRequest{*d.payer, pay.command.use_case, pay.command.slot, config_.merchant}, out);
      audit_.add(now, "decision", "unique payer " + hex_id(*d.payer));
    } else {
      d.outcome = d.matched.empty() ? DecisionOutcome::kNoMatch : DecisionOutcome::kMultipleMatches;
      const RecourseReason reason =
          d.matched.empty() ? RecourseReason::kNoMatch : RecourseReason::kMultipleMatches;
      for (const auto& [link, peer] : peers_) {
        if (peer.enrolled) send(link, RecourseNotice{reason, 0}, out);
      }
      audit_.add(now, "decision", std::string(to_string(d.outcome)) + ", " + std::to_string(d.matched.size()) +
                                      " matches");
    }
    decisions_.push_back(std::move(d));
  }

  DashcamConfig config_;
  Rng rng_;
  AuditLog audit_;
  std::uint64_t session_ = 0;
  std::uint32_t next_round_ = 0;
  std::map<LinkId, Peer> peers_;
  std::set<std::uint64_t> candidates_;
  std::map<std::uint64_t, Pending> pending_;
  std::set<std::uint64_t> spent_;
  std::map<std::uint32_t, std::map<std::uint64_t, FaceTally>> face_rounds_;
  std::optional<PaymentRound> payment_;
  std::vector<ChallengeRecord> history_;
  std::vector<PayerDecision> decisions_;
  std::vector<std::pair<std::uint64_t, std::string>> receipts_;
};

}  // namespace dcp
