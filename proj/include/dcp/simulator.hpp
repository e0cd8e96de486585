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

// Scenario-driven ride simulator.
//
// Devices and the dashcam exchange frames over simulated links; simulated
// time advances only through transport delays and scheduled events, so a
// (scenario, seed) pair fully determines the message trace and the report.
//
// Every ride is also evaluated by a plaintext oracle that applies the same
// fusion rules to the same probes with integer inner products and no
// cryptography. Transport facts (which pairs were challenged, timeouts) are
// shared; match outcomes are not.

#pragma once

#include <nlohmann/json.hpp>
#include <sodium.h>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dcp/dashcam.hpp"
#include "dcp/device.hpp"
#include "dcp/scenario.hpp"
#include "dcp/transport.hpp"

namespace dcp {

struct MessageStats {
  std::size_t count = 0;
  std::size_t bytes = 0;
};

struct EnrollmentTiming {
  std::size_t passenger = 0;
  std::string transport;
  std::size_t bytes = 0;
  double transfer_seconds = 0.0;  // isolated transfer time of the frame
  double completed_at = 0.0;      // simulated arrival time at the dashcam
};

struct CaptureLog {
  std::uint32_t round = 0;
  double time = 0.0;
  std::vector<std::size_t> passengers;     // whose faces were captured
  std::optional<std::size_t> target;       // passenger whose device alone was challenged
  std::string reason;                      // "scenario", "enrollment" or "payment"
};

struct ChallengeSummary {
  std::uint32_t round = 0;
  Modality modality = Modality::kFace;
  std::size_t passenger = 0;  // owner of the challenged device
  std::uint32_t probe = 0;
  ChallengeOutcome outcome = ChallengeOutcome::kNonMatch;
  bool oracle_match = false;
};

struct DecisionSummary {
  DecisionOutcome outcome = DecisionOutcome::kNoMatch;
  std::optional<std::size_t> payer;    // passenger index
  std::vector<std::size_t> matched;    // passenger indices, sorted
  friend bool operator==(const DecisionSummary&, const DecisionSummary&) = default;
};

struct WallTimings {
  double enrollment_ms = 0.0;  // key generation and template encryption, all devices
  double dashcam_ms = 0.0;
  double device_ms = 0.0;
};

struct RideReport {
  std::string scenario;
  std::uint64_t seed = 0;
  std::string group;
  std::string transcript;
  bool triggered = false;
  std::optional<PaymentCommand> command;
  std::string command_error;
  std::optional<DecisionSummary> decision;   // encrypted pipeline
  std::optional<DecisionSummary> oracle;     // plaintext pipeline
  std::optional<DecisionSummary> expected;   // ground truth from the scenario
  std::vector<std::size_t> candidates;       // C when the voice round started
  std::optional<std::string> receipt;
  std::map<std::string, MessageStats> messages;
  std::vector<EnrollmentTiming> enrollments;
  std::vector<CaptureLog> captures;
  std::vector<ChallengeSummary> challenges;
  std::optional<double> decision_time;
  double end_time = 0.0;
  double expansion_factor = 0.0;
  std::size_t audit_records = 0;
  std::size_t privacy_violations = 0;
  std::optional<WallTimings> wall;

  bool oracle_agrees() const { return decision == oracle; }
  bool correct() const { return decision == expected; }
};

struct RideArtifacts {
  Bytes trace;               // every frame sent, in order, with direction and link
  Bytes dashcam_received;    // concatenation of frames delivered to the dashcam
  Bytes dashcam_state;       // final serialize_state()
  std::vector<Bytes> secrets;  // per device: template encodings and secret key bytes
  std::vector<AuditRecord> audit;
};

struct RideResult {
  RideReport report;
  RideArtifacts artifacts;
};

struct RunOptions {
  std::optional<std::uint64_t> seed;  // overrides the scenario seed
  bool timings = false;
};

// Hex SHA-256, used to pin traces.
inline std::string sha256_hex(ByteView b) {
  unsigned char out[crypto_hash_sha256_BYTES];
  crypto_hash_sha256(out, b.data(), b.size());
  return to_hex(ByteView(out, sizeof out));
}

namespace detail {

struct Materials {
  std::vector<IdentityProfile> profiles;
  std::vector<QuantizedTemplate> face;   // enrolled templates per passenger
  std::vector<QuantizedTemplate> voice;
  std::vector<std::size_t> voice_identity;  // passengers sharing a voice share this value
};

inline Materials make_materials(const Scenario& s, Rng& root) {
  Materials m;
  Rng profile_rng = root.derive("profiles", 0);
  m.profiles = generate_profiles(s.passengers.size(), s.d, 0.0, s.max_inter_cosine, profile_rng);
  for (std::size_t i = 0; i < s.passengers.size(); ++i) {
    const auto& p = s.passengers[i];
    auto& prof = m.profiles[i];
    prof.subject = p.name;
    prof.sigma = p.sigma;
    if (p.face) prof.face = Embedding(*p.face, Modality::kFace);
    if (p.voice) prof.voice = Embedding(*p.voice, Modality::kVoice);
  }
  for (std::size_t i = 0; i < s.passengers.size(); ++i) {
    if (auto twin = s.passengers[i].voice_twin_of) m.profiles[i].voice = m.profiles[*twin].voice;
  }
  for (std::size_t i = 0; i < s.passengers.size(); ++i) {
    Rng enroll = root.derive("enroll", i);
    m.face.push_back(quantize(sample_observation(m.profiles[i], Modality::kFace, enroll), s.q));
    m.voice.push_back(quantize(sample_observation(m.profiles[i], Modality::kVoice, enroll), s.q));
    m.voice_identity.push_back(s.passengers[i].voice_twin_of.value_or(i));
  }
  for (std::size_t i = 0; i < s.passengers.size(); ++i) {
    if (auto twin = s.passengers[i].voice_twin_of) m.voice[i] = m.voice[*twin];
  }
  return m;
}

inline DecisionSummary decide(std::vector<std::size_t> matched) {
  std::sort(matched.begin(), matched.end());
  DecisionSummary d;
  d.matched = matched;
  if (matched.size() == 1) {
    d.outcome = DecisionOutcome::kUniquePayer;
    d.payer = matched.front();
  } else {
    d.outcome = matched.empty() ? DecisionOutcome::kNoMatch : DecisionOutcome::kMultipleMatches;
  }
  return d;
}

template <PrimeOrderGroup G>
class RideSimulation {
 public:
  RideSimulation(const Scenario& s, const RunOptions& opt)
      : s_(s),
        opt_(opt),
        seed_(opt.seed.value_or(s.seed)),
        root_(seed_),
        mat_(make_materials(s, root_)),
        cam_(DashcamConfig{s.d, s.q, s.challenge_timeout, s.merchant}, root_.derive("dashcam", 0)) {
    const DeviceThresholds thr{Threshold{s.face_threshold()}, Threshold{s.voice_threshold()}};
    for (std::size_t i = 0; i < s.passengers.size(); ++i) {
      const auto& p = s.passengers[i];
      if (!p.has_device) continue;
      const auto t0 = Clock::now();
      nodes_.push_back(Node{i, Device<G>(mat_.face[i], mat_.voice[i], thr, root_.derive("device", i), p.enrolled),
                            Link(p.transport, root_.derive("link", i))});
      wall_.enrollment_ms += ms_since(t0);
      nodes_.back().device.audit().set_actor("device-" + std::to_string(i));
    }
  }

  RideResult run() {
    for (std::size_t n = 0; n < nodes_.size(); ++n) push(s_.passengers[nodes_[n].passenger].connect_time, kStart, n);
    for (std::size_t c = 0; c < s_.captures.size(); ++c) push(s_.captures[c].time, kCapture, c);
    if (s_.command) push(s_.command->time, kCommand, 0);

    std::size_t steps = 0;
    while (!queue_.empty()) {
      if (++steps > 1000000) throw std::runtime_error("simulation did not terminate");
      Event ev = queue_.top();
      queue_.pop();
      now_ = ev.time;
      dispatch(ev);
      flush_deferred();
    }
    return finish();
  }

 private:
  using Clock = std::chrono::steady_clock;

  enum Kind { kStart, kToDashcam, kToDevice, kCapture, kCommand, kTimer, kEnrollCapture };

  struct Event {
    double time;
    std::uint64_t seq;
    Kind kind;
    std::size_t index;
    Bytes frame;
    bool operator>(const Event& o) const { return time != o.time ? time > o.time : seq > o.seq; }
  };

  struct Node {
    std::size_t passenger;
    Device<G> device;
    Link link;
  };

  struct Deferred {
    Kind kind;
    std::size_t index;
  };

  static double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
  }

  void push(double time, Kind kind, std::size_t index, Bytes frame = {}) {
    queue_.push(Event{time, seq_++, kind, index, std::move(frame)});
  }

  void record_trace(std::uint8_t dir, std::size_t node, double arrival, const Bytes& f) {
    ByteWriter w;
    w.u8(dir);
    w.u32(static_cast<std::uint32_t>(node));
    w.u64(std::bit_cast<std::uint64_t>(arrival));
    w.raw(f);
    art_.trace.insert(art_.trace.end(), w.bytes().begin(), w.bytes().end());
    auto& st = report_.messages[f.size() > 4 ? to_string(static_cast<MessageType>(f[4])) : "Invalid"];
    ++st.count;
    st.bytes += f.size();
  }

  void send_to_dashcam(std::size_t node, const Bytes& f) {
    const auto d = nodes_[node].link.send(now_, Direction::kToDashcam, f.size());
    record_trace(0, node, d.arrival, f);
    if (f.size() > 4 && f[4] == static_cast<std::uint8_t>(MessageType::kEnrollmentTransfer)) {
      report_.enrollments.push_back({nodes_[node].passenger, nodes_[node].link.profile().name, f.size(),
                                     simulate_transfer(nodes_[node].link.profile(), f.size()), d.arrival});
    }
    if (!d.dropped) push(d.arrival, kToDashcam, node, f);
  }

  void send_to_device(const std::vector<Outbound>& out) {
    for (const auto& o : out) {
      const auto d = nodes_[o.link].link.send(now_, Direction::kToDevice, o.frame.size());
      record_trace(1, o.link, d.arrival, o.frame);
      if (!d.dropped) push(d.arrival, kToDevice, o.link, o.frame);
    }
    after_dashcam_step();
  }

  void device_outputs(std::size_t node, const std::vector<Bytes>& out) {
    for (const auto& f : out) send_to_dashcam(node, f);
  }

  void after_dashcam_step() {
    if (auto dl = cam_.next_deadline(); dl && !timers_.count(*dl)) {
      timers_.insert(*dl);
      push(*dl, kTimer, 0);
    }
    for (const auto& [link, peer] : cam_.peers()) {
      if (peer.enrolled && enrolled_.insert(link).second && s_.prescreen_on_enroll) {
        push(now_, kEnrollCapture, link);
      }
    }
  }

  template <class F>
  auto timed_dashcam(F&& f) {
    const auto t0 = Clock::now();
    auto out = f();
    wall_.dashcam_ms += ms_since(t0);
    return out;
  }

  void dispatch(const Event& ev) {
    switch (ev.kind) {
      case kStart: {
        device_outputs(ev.index, nodes_[ev.index].device.start(now_));
        break;
      }
      case kToDashcam: {
        art_.dashcam_received.insert(art_.dashcam_received.end(), ev.frame.begin(), ev.frame.end());
        send_to_device(timed_dashcam([&] { return cam_.on_message(now_, static_cast<LinkId>(ev.index), ev.frame); }));
        break;
      }
      case kToDevice: {
        const auto t0 = Clock::now();
        auto out = nodes_[ev.index].device.on_message(now_, ev.frame);
        wall_.device_ms += ms_since(t0);
        device_outputs(ev.index, out);
        break;
      }
      case kTimer: {
        timers_.erase(ev.time);
        send_to_device(timed_dashcam([&] { return cam_.on_timer(now_); }));
        break;
      }
      case kCapture:
      case kEnrollCapture: {
        if (cam_.payment_in_progress()) {
          deferred_.push_back({ev.kind, ev.index});
          break;
        }
        run_capture(ev.kind, ev.index);
        break;
      }
      case kCommand: {
        run_command();
        break;
      }
    }
  }

  void flush_deferred() {
    while (!deferred_.empty() && !cam_.payment_in_progress()) {
      const Deferred d = deferred_.front();
      deferred_.erase(deferred_.begin());
      run_capture(d.kind, d.index);
    }
  }

  std::vector<std::size_t> all_passengers() const {
    std::vector<std::size_t> v(s_.passengers.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = i;
    return v;
  }

  void capture(const std::vector<std::size_t>& who, std::optional<std::size_t> target_node, const std::string& reason) {
    Rng rng = root_.derive("capture", captures_taken_++);
    std::vector<QuantizedTemplate> faces;
    for (std::size_t p : who) faces.push_back(quantize(sample_observation(mat_.profiles[p], Modality::kFace, rng), s_.q));
    std::optional<std::uint64_t> only;
    std::optional<std::size_t> target;
    if (target_node) {
      only = cam_.peers().at(static_cast<LinkId>(*target_node)).id;
      target = nodes_[*target_node].passenger;
    }
    report_.captures.push_back({round_++, now_, who, target, reason});
    probes_.push_back(faces);
    send_to_device(timed_dashcam([&] { return cam_.on_capture(now_, faces, only); }));
  }

  void run_capture(Kind kind, std::size_t index) {
    if (kind == kEnrollCapture) {
      capture(all_passengers(), index, "enrollment");
    } else {
      capture(s_.captures[index].passengers, std::nullopt, "scenario");
    }
  }

  void run_command() {
    const CommandSpec& c = *s_.command;
    report_.transcript = c.transcript;
    const TriggerResult trig = detect_trigger(c.transcript);
    report_.triggered = trig.triggered;
    if (!trig.triggered) {
      report_.command_error = "no trigger phrase";
      return;
    }
    const ParseOutcome parsed = try_parse_command(c.transcript);
    if (!parsed.command) {
      report_.command_error = std::string(to_string(parsed.error->kind())) + ": " + parsed.error->what();
      return;
    }
    report_.command = parsed.command;
    if (cam_.payment_in_progress()) return;
    if (s_.refresh_prescreen_on_pay) capture(all_passengers(), std::nullopt, "payment");
    Rng rng = root_.derive("voice", 0);
    const auto voice = quantize(sample_observation(mat_.profiles[c.speaker], Modality::kVoice, rng), s_.q);
    payment_round_ = round_++;
    for (const auto& [link, peer] : cam_.peers()) {
      if (peer.enrolled) enrolled_at_payment_.insert(nodes_[link].passenger);
    }
    voice_probe_ = voice;
    send_to_device(timed_dashcam([&] { return cam_.on_payment(now_, voice, *parsed.command); }));
  }

  std::size_t passenger_of(std::uint64_t device) const {
    return nodes_[*cam_.link_of(device)].passenger;
  }

  bool plaintext_match(std::size_t passenger, Modality m, const QuantizedTemplate& probe) const {
    const auto& t = m == Modality::kFace ? mat_.face[passenger] : mat_.voice[passenger];
    const std::int64_t thr = m == Modality::kFace ? s_.face_threshold() : s_.voice_threshold();
    return inner_product_int(t, probe) > thr;
  }

  void evaluate() {
    // Challenges as the dashcam saw them, plus the plaintext verdict.
    for (const auto& r : cam_.history()) {
      ChallengeSummary c{r.round, r.modality, passenger_of(r.device), r.probe, r.outcome, false};
      if (r.modality == Modality::kFace) {
        c.oracle_match = plaintext_match(c.passenger, Modality::kFace, probes_.at(capture_index(r.round)).at(r.probe));
      } else if (voice_probe_) {
        c.oracle_match = plaintext_match(c.passenger, Modality::kVoice, *voice_probe_);
      }
      report_.challenges.push_back(c);
    }
    if (!payment_round_) return;

    // Replay face rounds before the payment in round order.
    struct Tally {
      bool oracle = false;
      bool truth = false;
    };
    std::set<std::size_t> oracle_c, truth_c;
    std::map<std::pair<std::uint32_t, std::size_t>, Tally> rounds;
    for (const auto& c : report_.challenges) {
      if (c.modality != Modality::kFace || c.round > *payment_round_) continue;
      auto& t = rounds[{c.round, c.passenger}];
      if (c.outcome != ChallengeOutcome::kTimeout) t.oracle = t.oracle || c.oracle_match;
      const auto& who = report_.captures[capture_index(c.round)].passengers;
      t.truth = std::find(who.begin(), who.end(), c.passenger) != who.end();
    }
    for (const auto& [key, t] : rounds) {
      const std::size_t p = key.second;
      if (t.oracle) oracle_c.insert(p); else oracle_c.erase(p);
      if (t.truth) truth_c.insert(p); else truth_c.erase(p);
    }

    std::map<std::size_t, ChallengeOutcome> voice_outcomes;
    for (const auto& c : report_.challenges) {
      if (c.modality == Modality::kVoice && c.round == *payment_round_) voice_outcomes[c.passenger] = c.outcome;
    }
    std::vector<std::size_t> oracle_matched, truth_matched;
    for (std::size_t p : oracle_c) {
      if (!enrolled_at_payment_.count(p)) continue;
      auto it = voice_outcomes.find(p);
      const bool timed_out = it != voice_outcomes.end() && it->second == ChallengeOutcome::kTimeout;
      if (!timed_out && plaintext_match(p, Modality::kVoice, *voice_probe_)) oracle_matched.push_back(p);
    }
    const std::size_t speaker_voice = mat_.voice_identity[s_.command->speaker];
    for (std::size_t p : truth_c) {
      if (enrolled_at_payment_.count(p) && mat_.voice_identity[p] == speaker_voice) truth_matched.push_back(p);
    }
    report_.oracle = decide(oracle_matched);
    report_.expected = decide(truth_matched);
  }

  std::size_t capture_index(std::uint32_t round) const {
    for (std::size_t i = 0; i < report_.captures.size(); ++i) {
      if (report_.captures[i].round == round) return i;
    }
    throw std::logic_error("challenge for an unknown capture round");
  }

  RideResult finish() {
    report_.scenario = s_.name;
    report_.seed = seed_;
    report_.group = to_string(s_.group);
    report_.end_time = now_;
    if (!cam_.decisions().empty()) {
      const PayerDecision& d = cam_.decisions().front();
      DecisionSummary sum;
      sum.outcome = d.outcome;
      for (auto id : d.matched) sum.matched.push_back(passenger_of(id));
      std::sort(sum.matched.begin(), sum.matched.end());
      if (d.payer) sum.payer = passenger_of(*d.payer);
      report_.decision = sum;
      report_.decision_time = d.time;
      for (auto id : d.candidates) report_.candidates.push_back(passenger_of(id));
      std::sort(report_.candidates.begin(), report_.candidates.end());
    }
    if (!cam_.receipts().empty()) report_.receipt = cam_.receipts().front().second;
    evaluate();
    if (!nodes_.empty()) report_.expansion_factor = ciphertext_expansion(nodes_[0].device.enrollment().face, s_.q);

    art_.dashcam_state = cam_.serialize_state();
    art_.audit = cam_.audit().records();
    for (const auto& n : nodes_) {
      art_.audit.insert(art_.audit.end(), n.device.audit().records().begin(), n.device.audit().records().end());
      for (const auto* t : {&n.device.face(), &n.device.voice()}) {
        const Bytes enc = t->serialize();
        art_.secrets.push_back(enc);
        art_.secrets.emplace_back(enc.begin() + 7, enc.end());
      }
      ByteWriter w;
      G::write_scalar(w, n.device.keys().secret.value);
      art_.secrets.push_back(std::move(w).take());
    }
    std::stable_sort(art_.audit.begin(), art_.audit.end(),
                     [](const AuditRecord& a, const AuditRecord& b) { return a.time < b.time; });
    report_.audit_records = art_.audit.size();
    for (const auto& secret : art_.secrets) {
      if (contains_subsequence(art_.dashcam_received, secret)) ++report_.privacy_violations;
      if (contains_subsequence(art_.dashcam_state, secret)) ++report_.privacy_violations;
    }
    if (opt_.timings) report_.wall = wall_;
    return {std::move(report_), std::move(art_)};
  }

  const Scenario& s_;
  RunOptions opt_;
  std::uint64_t seed_;
  Rng root_;
  Materials mat_;
  Dashcam<G> cam_;
  std::vector<Node> nodes_;
  std::priority_queue<Event, std::vector<Event>, std::greater<Event>> queue_;
  std::uint64_t seq_ = 0;
  double now_ = 0.0;
  std::set<double> timers_;
  std::set<LinkId> enrolled_;
  std::vector<Deferred> deferred_;
  std::uint32_t round_ = 0;  // mirrors the dashcam's round counter
  std::uint64_t captures_taken_ = 0;
  std::vector<std::vector<QuantizedTemplate>> probes_;
  std::optional<std::uint32_t> payment_round_;
  std::set<std::size_t> enrolled_at_payment_;
  std::optional<QuantizedTemplate> voice_probe_;
  RideReport report_;
  RideArtifacts art_;
  WallTimings wall_;
};

}  // namespace detail

inline RideResult run_scenario(const Scenario& s, const RunOptions& opt = {}) {
  validate(s);
  return with_group(s.group, [&]<class G>() { return detail::RideSimulation<G>(s, opt).run(); });
}

// ---------------------------------------------------------------------------
// Reports

inline nlohmann::json to_json(const DecisionSummary& d) {
  nlohmann::json j{{"outcome", to_string(d.outcome)}, {"matched", d.matched}};
  j["payer"] = d.payer ? nlohmann::json(*d.payer) : nlohmann::json(nullptr);
  return j;
}

inline nlohmann::json to_json(const PaymentCommand& c) {
  nlohmann::json j{{"use_case", to_string(c.use_case)}};
  j["slot"] = c.slot ? nlohmann::json(*c.slot) : nlohmann::json(nullptr);
  return j;
}

inline nlohmann::json to_json(const RideReport& r) {
  auto opt = [](const std::optional<DecisionSummary>& d) { return d ? to_json(*d) : nlohmann::json(nullptr); };
  nlohmann::json j;
  j["scenario"] = r.scenario;
  j["seed"] = r.seed;
  j["group"] = r.group;
  j["transcript"] = r.transcript;
  j["triggered"] = r.triggered;
  j["command"] = r.command ? to_json(*r.command) : nlohmann::json(nullptr);
  j["command_error"] = r.command_error;
  j["decision"] = opt(r.decision);
  j["oracle"] = opt(r.oracle);
  j["expected"] = opt(r.expected);
  j["oracle_agrees"] = r.oracle_agrees();
  j["correct"] = r.correct();
  j["candidates"] = r.candidates;
  j["receipt"] = r.receipt ? nlohmann::json(*r.receipt) : nlohmann::json(nullptr);
  j["decision_time"] = r.decision_time ? nlohmann::json(*r.decision_time) : nlohmann::json(nullptr);
  j["end_time"] = r.end_time;
  j["expansion_factor"] = r.expansion_factor;
  j["privacy_violations"] = r.privacy_violations;
  j["audit_records"] = r.audit_records;
  auto& msgs = j["messages"] = nlohmann::json::object();
  for (const auto& [type, st] : r.messages) msgs[type] = {{"count", st.count}, {"bytes", st.bytes}};
  j["enrollments"] = nlohmann::json::array();
  for (const auto& e : r.enrollments) {
    j["enrollments"].push_back({{"passenger", e.passenger},
                                {"transport", e.transport},
                                {"bytes", e.bytes},
                                {"transfer_seconds", e.transfer_seconds},
                                {"completed_at", e.completed_at}});
  }
  j["captures"] = nlohmann::json::array();
  for (const auto& c : r.captures) {
    nlohmann::json cj{{"round", c.round}, {"time", c.time}, {"passengers", c.passengers}, {"reason", c.reason}};
    cj["target"] = c.target ? nlohmann::json(*c.target) : nlohmann::json(nullptr);
    j["captures"].push_back(std::move(cj));
  }
  j["challenges"] = nlohmann::json::array();
  for (const auto& c : r.challenges) {
    j["challenges"].push_back({{"round", c.round},
                               {"modality", to_string(c.modality)},
                               {"passenger", c.passenger},
                               {"probe", c.probe},
                               {"outcome", to_string(c.outcome)},
                               {"oracle_match", c.oracle_match}});
  }
  if (r.wall) {
    j["wall_ms"] = {{"enrollment", r.wall->enrollment_ms}, {"dashcam", r.wall->dashcam_ms}, {"devices", r.wall->device_ms}};
  }
  return j;
}

inline std::string describe(const DecisionSummary& d) {
  std::string s = to_string(d.outcome);
  if (d.payer) s += " (passenger " + std::to_string(*d.payer) + ")";
  if (d.outcome == DecisionOutcome::kMultipleMatches) s += " (" + std::to_string(d.matched.size()) + " devices)";
  return s;
}

inline std::string to_text(const RideReport& r) {
  std::ostringstream o;
  o << "scenario   " << r.scenario << " (seed " << r.seed << ", group " << r.group << ")\n";
  if (r.command) {
    o << "command    " << to_string(r.command->use_case);
    if (r.command->slot) o << " " << *r.command->slot;
    o << "\n";
  } else if (!r.command_error.empty()) {
    o << "command    error: " << r.command_error << "\n";
  }
  if (r.decision) {
    o << "decision   " << describe(*r.decision) << " at t=" << *r.decision_time << " s\n";
    o << "oracle     " << describe(*r.oracle) << (r.oracle_agrees() ? " (agrees)" : " (DISAGREES)") << "\n";
    o << "expected   " << describe(*r.expected) << (r.correct() ? "" : " (decision differs)") << "\n";
  }
  if (r.receipt) o << "receipt    " << *r.receipt << "\n";
  for (const auto& e : r.enrollments) {
    o << "enrollment passenger " << e.passenger << " over " << e.transport << ": " << e.bytes << " bytes, "
      << e.transfer_seconds << " s\n";
  }
  o << "expansion  " << r.expansion_factor << "x\n";
  o << "messages  ";
  for (const auto& [type, st] : r.messages) o << " " << type << "=" << st.count << "/" << st.bytes << "B";
  o << "\n";
  o << "privacy    " << (r.privacy_violations == 0 ? "clean" : std::to_string(r.privacy_violations) + " violations") << "\n";
  if (r.wall) {
    o << "wall       enrollment " << r.wall->enrollment_ms << " ms, dashcam " << r.wall->dashcam_ms
      << " ms, devices " << r.wall->device_ms << " ms\n";
  }
  return o.str();
}

// ---------------------------------------------------------------------------
// Batches

struct RateCount {
  std::size_t trials = 0;
  std::size_t hits = 0;

  std::optional<double> rate() const {
    if (trials == 0) return std::nullopt;
    return static_cast<double>(hits) / static_cast<double>(trials);
  }
};

struct BatchRow {
  std::optional<double> sigma;  // set when sweeping
  std::size_t trials = 0;
  RateCount face_genuine, face_impostor, voice_genuine, voice_impostor;
  RateCount oracle_face_genuine, oracle_face_impostor, oracle_voice_genuine, oracle_voice_impostor;
  std::size_t decisions = 0;
  std::size_t correct = 0;
  std::size_t oracle_agree = 0;
  std::size_t privacy_violations = 0;
};

struct BatchReport {
  std::string scenario;
  std::uint64_t seed = 0;
  std::vector<BatchRow> rows;
};

inline void accumulate(BatchRow& row, const RideReport& r) {
  ++row.trials;
  if (r.decision) ++row.decisions;
  if (r.correct()) ++row.correct;
  if (r.oracle_agrees()) ++row.oracle_agree;
  row.privacy_violations += r.privacy_violations;

  // One trial per comparison. A face comparison is genuine when the probe
  // belongs to the device owner.
  for (const auto& c : r.challenges) {
    if (c.modality != Modality::kFace) continue;
    bool genuine = false;
    for (const auto& cap : r.captures) {
      if (cap.round == c.round) genuine = c.probe < cap.passengers.size() && cap.passengers[c.probe] == c.passenger;
    }
    auto& enc = genuine ? row.face_genuine : row.face_impostor;
    auto& orc = genuine ? row.oracle_face_genuine : row.oracle_face_impostor;
    ++enc.trials;
    enc.hits += c.outcome == ChallengeOutcome::kMatch ? 1 : 0;
    ++orc.trials;
    orc.hits += c.oracle_match ? 1 : 0;
  }
  if (r.expected) {
    for (const auto& c : r.challenges) {
      if (c.modality != Modality::kVoice) continue;
      // Genuine iff this passenger's device would be a correct payer.
      const auto& m = r.expected->matched;
      const bool genuine = std::find(m.begin(), m.end(), c.passenger) != m.end();
      auto& enc = genuine ? row.voice_genuine : row.voice_impostor;
      auto& orc = genuine ? row.oracle_voice_genuine : row.oracle_voice_impostor;
      ++enc.trials;
      enc.hits += c.outcome == ChallengeOutcome::kMatch ? 1 : 0;
      ++orc.trials;
      orc.hits += c.oracle_match ? 1 : 0;
    }
  }
}

inline Scenario trial_scenario(const Scenario& base, std::uint64_t seed, std::size_t trial, std::optional<double> sigma) {
  Scenario s = base;
  s.seed = Rng(seed).derive("trial", trial).next_u64();
  if (sigma) {
    for (auto& p : s.passengers) p.sigma = *sigma;
  }
  return s;
}

inline BatchReport run_batch(const Scenario& base, std::size_t trials, std::uint64_t seed,
                             const std::vector<double>& sigma_sweep = {}) {
  if (trials == 0) throw std::invalid_argument("trials must be at least 1");
  BatchReport out;
  out.scenario = base.name;
  out.seed = seed;
  std::vector<std::optional<double>> points;
  if (sigma_sweep.empty()) points.push_back(std::nullopt);
  for (double s : sigma_sweep) points.push_back(s);
  for (const auto& sigma : points) {
    BatchRow row;
    row.sigma = sigma;
    for (std::size_t t = 0; t < trials; ++t) accumulate(row, run_scenario(trial_scenario(base, seed, t, sigma)).report);
    out.rows.push_back(row);
  }
  return out;
}

inline std::string format_rate(const RateCount& c) {
  const auto r = c.rate();
  if (!r) return "";
  std::ostringstream o;
  o << *r;
  return o.str();
}

inline std::string to_csv(const BatchReport& b) {
  std::ostringstream o;
  o << "sigma,trials,face_tpir,face_fpir,voice_tpir,voice_fpir,oracle_face_tpir,oracle_face_fpir,"
       "oracle_voice_tpir,oracle_voice_fpir,face_genuine,face_impostor,voice_genuine,voice_impostor,"
       "decisions,correct,oracle_agree,privacy_violations\n";
  for (const auto& r : b.rows) {
    if (r.sigma) o << *r.sigma;
    o << "," << r.trials << "," << format_rate(r.face_genuine) << "," << format_rate(r.face_impostor) << ","
      << format_rate(r.voice_genuine) << "," << format_rate(r.voice_impostor) << ","
      << format_rate(r.oracle_face_genuine) << "," << format_rate(r.oracle_face_impostor) << ","
      << format_rate(r.oracle_voice_genuine) << "," << format_rate(r.oracle_voice_impostor) << ","
      << r.face_genuine.trials << "," << r.face_impostor.trials << "," << r.voice_genuine.trials << ","
      << r.voice_impostor.trials << "," << r.decisions << "," << r.correct << "," << r.oracle_agree << ","
      << r.privacy_violations << "\n";
  }
  return o.str();
}

inline nlohmann::json to_json(const BatchReport& b) {
  auto rate = [](const RateCount& c) {
    const auto r = c.rate();
    return nlohmann::json{{"rate", r ? nlohmann::json(*r) : nlohmann::json(nullptr)}, {"hits", c.hits}, {"trials", c.trials}};
  };
  nlohmann::json j{{"scenario", b.scenario}, {"seed", b.seed}, {"rows", nlohmann::json::array()}};
  for (const auto& r : b.rows) {
    nlohmann::json row{{"trials", r.trials},
                       {"face_tpir", rate(r.face_genuine)},
                       {"face_fpir", rate(r.face_impostor)},
                       {"voice_tpir", rate(r.voice_genuine)},
                       {"voice_fpir", rate(r.voice_impostor)},
                       {"oracle_face_tpir", rate(r.oracle_face_genuine)},
                       {"oracle_face_fpir", rate(r.oracle_face_impostor)},
                       {"oracle_voice_tpir", rate(r.oracle_voice_genuine)},
                       {"oracle_voice_fpir", rate(r.oracle_voice_impostor)},
                       {"decisions", r.decisions},
                       {"correct", r.correct},
                       {"oracle_agree", r.oracle_agree},
                       {"privacy_violations", r.privacy_violations}};
    row["sigma"] = r.sigma ? nlohmann::json(*r.sigma) : nlohmann::json(nullptr);
    j["rows"].push_back(std::move(row));
  }
  return j;
}

}  // namespace dcp
