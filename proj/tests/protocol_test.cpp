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


#include "dcp/dashcam.hpp"

#include <gtest/gtest.h>

#include <deque>

#include "dcp/device.hpp"

namespace dcp {
namespace {

constexpr std::uint32_t kDim = 128;
constexpr std::int32_t kScale = 127;

Bytes sha256(ByteView b) {
  Bytes out(crypto_hash_sha256_BYTES);
  crypto_hash_sha256(out.data(), b.data(), b.size());
  return out;
}

// Instant in-order delivery between one dashcam and its devices; link i is
// device i.
template <class G>
struct Ride {
  Dashcam<G> cam;
  std::vector<Device<G>> devices;
  std::vector<IdentityProfile> profiles;
  std::deque<std::pair<bool, Outbound>> queue;  // (to dashcam?, frame)
  Bytes trace;
  std::set<LinkId> muted;  // devices whose replies are dropped
  double now = 0.0;

  Ride(std::size_t n, std::uint64_t seed, double max_inter = 0.2)
      : cam(DashcamConfig{kDim, kScale, 5.0, "Test Merchant"}, Rng(seed).derive("dashcam", 0)) {
    Rng rng(seed);
    profiles = generate_profiles(n, kDim, 0.05, max_inter, rng);
    const DeviceThresholds t{Threshold{cosine_to_threshold(0.5, kScale)}, Threshold{cosine_to_threshold(0.5, kScale)}};
    for (std::size_t i = 0; i < n; ++i) {
      devices.emplace_back(quantize(profiles[i].face, kScale), quantize(profiles[i].voice, kScale), t,
                           rng.derive("device", i));
    }
  }

  void connect_all() {
    for (LinkId i = 0; i < devices.size(); ++i) {
      for (auto& f : devices[i].start(now)) queue.push_back({true, {i, f}});
    }
    pump();
  }

  void deliver(const std::vector<Outbound>& out) {
    for (const auto& o : out) queue.push_back({false, o});
  }

  void pump() {
    while (!queue.empty()) {
      auto [to_cam, o] = queue.front();
      queue.pop_front();
      trace.insert(trace.end(), o.frame.begin(), o.frame.end());
      if (to_cam) {
        if (muted.count(o.link)) continue;
        deliver(cam.on_message(now, o.link, o.frame));
      } else {
        for (auto& f : devices[o.link].on_message(now, o.frame)) queue.push_back({true, {o.link, f}});
      }
    }
  }

  QuantizedTemplate face_of(std::size_t i) const { return quantize(profiles[i].face, kScale); }
  QuantizedTemplate voice_of(std::size_t i) const { return quantize(profiles[i].voice, kScale); }

  void capture(const std::vector<std::size_t>& who) {
    std::vector<QuantizedTemplate> faces;
    for (auto i : who) faces.push_back(face_of(i));
    deliver(cam.on_capture(now, faces));
    pump();
  }

  void pay(const QuantizedTemplate& voice, const std::string& transcript = "hey dashcam pay for toll") {
    deliver(cam.on_payment(now, voice, parse_command(transcript)));
    pump();
  }

  std::uint64_t id(std::size_t i) const { return *devices[i].id(); }
};

template <class G>
class ProtocolTest : public ::testing::Test {};

using Groups = ::testing::Types<SafePrime64, Ristretto255>;
TYPED_TEST_SUITE(ProtocolTest, Groups);

TEST(DashcamTest, HandshakeAssignsFreshIds) {
  using G = SafePrime64;
  Dashcam<G> cam(DashcamConfig{}, Rng(1));
  const auto out = cam.on_message(0.0, 7, encode_frame<G>(ConnectRequest{}));
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].link, 7u);
  const auto accept = std::get<ConnectAccept>(decode_frame<G>(out[0].frame));
  EXPECT_NE(accept.device_id, 0u);
  EXPECT_EQ(accept.session, cam.session());
  EXPECT_EQ(cam.peers().size(), 1u);

  const auto second = cam.on_message(0.0, 8, encode_frame<G>(ConnectRequest{}));
  EXPECT_NE(std::get<ConnectAccept>(decode_frame<G>(second[0].frame)).device_id, accept.device_id);
  EXPECT_TRUE(cam.on_message(0.0, 7, encode_frame<G>(ConnectRequest{})).empty());
  EXPECT_EQ(cam.audit().count("duplicate-connect"), 1u);
}

TYPED_TEST(ProtocolTest, FullRideIdentifiesSpeaker) {
  using G = TypeParam;
  Ride<G> ride(3, 11);
  ride.connect_all();
  ASSERT_EQ(ride.cam.peers().size(), 3u);
  for (const auto& [link, p] : ride.cam.peers()) EXPECT_TRUE(p.enrolled);

  ride.capture({0, 1});
  EXPECT_EQ(ride.cam.candidates(), (std::set<std::uint64_t>{ride.id(0), ride.id(1)}));

  ride.pay(ride.voice_of(1), "Hey DashCam, pay for order number 120.");
  ASSERT_EQ(ride.cam.decisions().size(), 1u);
  const auto& d = ride.cam.decisions()[0];
  EXPECT_EQ(d.outcome, DecisionOutcome::kUniquePayer);
  EXPECT_EQ(d.payer, ride.id(1));
  EXPECT_EQ(d.rounds.size(), 2u);  // voice only goes to candidates
  ASSERT_EQ(ride.devices[1].receipts().size(), 1u);
  EXPECT_EQ(ride.devices[1].receipts()[0].request.slot, 120u);
  EXPECT_EQ(ride.devices[1].receipts()[0].request.use_case, UseCase::kFastFood);
  ASSERT_EQ(ride.cam.receipts().size(), 1u);
  EXPECT_EQ(ride.cam.receipts()[0].first, ride.id(1));
  EXPECT_TRUE(ride.devices[0].receipts().empty());
}

TEST(RideTest, EmptyCaptureLeavesCandidatesUnchanged) {
  Ride<SafePrime64> ride(2, 12);
  ride.connect_all();
  ride.capture({0});
  const auto before = ride.cam.candidates();
  EXPECT_TRUE(ride.cam.on_capture(0.0, {}).empty());
  EXPECT_EQ(ride.cam.candidates(), before);
}

TEST(RideTest, MismatchedFaceLeavesCandidateSet) {
  Ride<SafePrime64> ride(3, 13);
  ride.connect_all();
  ride.capture({0, 1, 2});
  EXPECT_EQ(ride.cam.candidates().size(), 3u);
  ride.capture({2});
  EXPECT_EQ(ride.cam.candidates(), (std::set<std::uint64_t>{ride.id(2)}));
}

TEST(RideTest, SpeakerWithoutDeviceIsNoMatch) {
  Ride<SafePrime64> ride(3, 14);
  ride.connect_all();
  ride.capture({0, 1, 2});
  Rng rng(99);
  const auto stranger = quantize(random_unit_embedding(kDim, Modality::kVoice, rng), kScale);
  ride.pay(stranger);
  ASSERT_EQ(ride.cam.decisions().size(), 1u);
  EXPECT_EQ(ride.cam.decisions()[0].outcome, DecisionOutcome::kNoMatch);
  for (const auto& dev : ride.devices) {
    ASSERT_EQ(dev.notices().size(), 1u);
    EXPECT_EQ(dev.notices()[0].reason, RecourseReason::kNoMatch);
  }
}

TEST(RideTest, EmptyCandidateSetDecidesImmediately) {
  Ride<SafePrime64> ride(2, 15);
  ride.connect_all();
  const auto out = ride.cam.on_payment(0.0, ride.voice_of(0), parse_command("pay for toll"));
  ASSERT_EQ(ride.cam.decisions().size(), 1u);
  EXPECT_EQ(ride.cam.decisions()[0].outcome, DecisionOutcome::kNoMatch);
  for (const auto& o : out) EXPECT_EQ(std::get<RecourseNotice>(decode_frame<SafePrime64>(o.frame)).reason, RecourseReason::kNoMatch);
}

TEST(RideTest, IdenticalVoicesAreMultipleMatches) {
  using G = SafePrime64;
  Ride<G> ride(2, 16);
  // Replace device 1 with one that enrolls device 0's voice.
  const DeviceThresholds t{Threshold{8064}, Threshold{8064}};
  ride.devices[1] = Device<G>(ride.face_of(1), ride.voice_of(0), t, Rng(5));
  ride.connect_all();
  ride.capture({0, 1});
  ride.pay(ride.voice_of(0));
  EXPECT_EQ(ride.cam.decisions()[0].outcome, DecisionOutcome::kMultipleMatches);
  EXPECT_EQ(ride.cam.decisions()[0].matched.size(), 2u);
}

TEST(RideTest, PaymentWaitsForFaceRound) {
  Ride<SafePrime64> ride(2, 17);
  ride.connect_all();
  ride.deliver(ride.cam.on_capture(0.0, {ride.face_of(0)}));
  // Payment arrives while face challenges are still in flight.
  ride.deliver(ride.cam.on_payment(0.0, ride.voice_of(0), parse_command("pay for toll")));
  EXPECT_TRUE(ride.cam.decisions().empty());
  ride.pump();
  ASSERT_EQ(ride.cam.decisions().size(), 1u);
  EXPECT_EQ(ride.cam.decisions()[0].payer, ride.id(0));
}

TEST(RideTest, SilentDeviceTimesOutAsNonMatch) {
  Ride<SafePrime64> ride(2, 18);
  ride.connect_all();
  ride.muted.insert(1);
  ride.capture({0, 1});
  EXPECT_EQ(ride.cam.pending_challenges(), 2u);
  EXPECT_EQ(ride.cam.next_deadline(), 5.0);
  EXPECT_TRUE(ride.cam.on_timer(4.9).empty());
  ride.deliver(ride.cam.on_timer(5.0));
  EXPECT_EQ(ride.cam.pending_challenges(), 0u);
  EXPECT_EQ(ride.cam.audit().count("challenge-timeout"), 2u);
  EXPECT_EQ(ride.cam.candidates(), (std::set<std::uint64_t>{ride.id(0)}));
}

TEST(RideTest, ReplayedProofIsRejected) {
  using G = SafePrime64;
  Ride<G> ride(1, 19);
  ride.connect_all();
  const auto challenges = ride.cam.on_capture(0.0, {ride.face_of(0)});
  ASSERT_EQ(challenges.size(), 1u);
  const auto replies = ride.devices[0].on_message(0.0, challenges[0].frame);
  ASSERT_EQ(replies.size(), 1u);
  ride.cam.on_message(0.0, 0, replies[0]);
  EXPECT_EQ(ride.cam.candidates().size(), 1u);
  // Same proof again, and again after the device leaves C.
  ride.cam.on_message(0.0, 0, replies[0]);
  EXPECT_EQ(ride.cam.audit().count("replayed-proof"), 1u);
  ride.capture({});
  Rng rng(3);
  ride.deliver(ride.cam.on_capture(0.0, {quantize(random_unit_embedding(kDim, Modality::kFace, rng), kScale)}));
  ride.pump();
  EXPECT_TRUE(ride.cam.candidates().empty());
  ride.cam.on_message(0.0, 0, replies[0]);
  EXPECT_TRUE(ride.cam.candidates().empty());
  EXPECT_EQ(ride.cam.audit().count("replayed-proof"), 2u);
}

TEST(RideTest, ProofOnWrongLinkIsRejected) {
  using G = SafePrime64;
  Ride<G> ride(2, 20);
  ride.connect_all();
  const auto challenges = ride.cam.on_capture(0.0, {ride.face_of(0)});
  const auto to_dev0 = std::find_if(challenges.begin(), challenges.end(), [](const Outbound& o) { return o.link == 0; });
  const auto reply = ride.devices[0].on_message(0.0, to_dev0->frame);
  ride.cam.on_message(0.0, 1, reply[0]);
  EXPECT_EQ(ride.cam.audit().count("proof-from-wrong-device"), 1u);
  EXPECT_EQ(ride.cam.pending_challenges(), 2u);
}

TEST(DeviceTest, ReplayedChallengeIgnored) {
  using G = SafePrime64;
  Ride<G> ride(1, 21);
  ride.connect_all();
  const auto challenges = ride.cam.on_capture(0.0, {ride.face_of(0)});
  EXPECT_EQ(ride.devices[0].on_message(0.0, challenges[0].frame).size(), 1u);
  EXPECT_TRUE(ride.devices[0].on_message(0.0, challenges[0].frame).empty());
  EXPECT_EQ(ride.devices[0].audit().count("replayed-challenge"), 1u);
}

TEST(DeviceTest, BoundaryAndOutOfRangeChallenges) {
  using G = SafePrime64;
  Ride<G> ride(1, 22);
  ride.connect_all();
  auto& dev = ride.devices[0];
  const std::int64_t t = dev.thresholds().face.value;
  Rng rng(4);
  const auto reply = dev.on_message(0.0, encode_frame<G>(ScoreChallenge<G>{
                                              Modality::kFace, 1, encrypt(dev.public_key(), t + 1, dev.bound(), rng)}));
  const auto proof = std::get<ScoreProof<G>>(decode_frame<G>(reply[0]));
  EXPECT_TRUE(proof.proof.match);
  EXPECT_EQ(proof.threshold, dev.thresholds().face);

  const auto at_t = dev.on_message(0.0, encode_frame<G>(ScoreChallenge<G>{
                                             Modality::kFace, 2, encrypt(dev.public_key(), t, dev.bound(), rng)}));
  EXPECT_FALSE(std::get<ScoreProof<G>>(decode_frame<G>(at_t[0])).proof.match);

  const auto bad = encrypt_with_randomness(dev.public_key(), dev.bound() + 1, G::random_scalar(rng));
  const auto r = dev.on_message(0.0, encode_frame<G>(ScoreChallenge<G>{Modality::kVoice, 3, bad}));
  const auto notice = std::get<RecourseNotice>(decode_frame<G>(r[0]));
  EXPECT_EQ(notice.reason, RecourseReason::kDecryptionFailure);
  EXPECT_EQ(notice.nonce, 3u);
}

TEST(DeviceTest, IgnoresPaymentForOthers) {
  using G = SafePrime64;
  Ride<G> ride(1, 23);
  ride.connect_all();
  EXPECT_TRUE(ride.devices[0].on_message(0.0, encode_frame<G>(PaymentRequest{ride.id(0) + 1, UseCase::kToll, {}, "x"})).empty());
  EXPECT_TRUE(ride.devices[0].receipts().empty());
}

TYPED_TEST(ProtocolTest, StateDumpHoldsNoSecrets) {
  using G = TypeParam;
  Ride<G> ride(3, 24);
  ride.connect_all();
  ride.capture({0, 1, 2});
  ride.pay(ride.voice_of(2));
  const Bytes state = ride.cam.serialize_state();
  for (const auto& dev : ride.devices) {
    for (const auto* t : {&dev.face(), &dev.voice()}) {
      const Bytes plain = t->serialize();
      EXPECT_FALSE(contains_subsequence(state, plain));
      EXPECT_FALSE(contains_subsequence(state, ByteView(plain).subspan(7)));
      EXPECT_FALSE(contains_subsequence(ride.trace, ByteView(plain).subspan(7)));
    }
    ByteWriter w;
    G::write_scalar(w, dev.keys().secret.value);
    EXPECT_FALSE(contains_subsequence(state, w.bytes()));
    EXPECT_FALSE(contains_subsequence(ride.trace, w.bytes()));
  }
}

TEST(PurityTest, SameStateSameEventSameResult) {
  using G = SafePrime64;
  Ride<G> ride(2, 25);
  ride.connect_all();
  Dashcam<G> copy = ride.cam;
  const DashcamEvent ev = CaptureEvent{1.0, {ride.face_of(0), ride.face_of(1)}, std::nullopt};
  EXPECT_EQ(ride.cam.step(ev), copy.step(ev));
  EXPECT_EQ(ride.cam.serialize_state(), copy.serialize_state());
  const DashcamEvent timer = TimerEvent{10.0};
  EXPECT_EQ(ride.cam.step(timer), copy.step(timer));
  EXPECT_EQ(ride.cam.serialize_state(), copy.serialize_state());
}

TEST(FuzzTest, StateMachinesSurviveGarbage) {
  using G = SafePrime64;
  Ride<G> ride(2, 26);
  ride.connect_all();
  std::vector<Bytes> corpus;
  for (const auto& o : ride.cam.on_capture(0.0, {ride.face_of(0)})) corpus.push_back(o.frame);
  corpus.push_back(encode_frame<G>(ride.devices[0].enrollment()));
  corpus.push_back(encode_frame<G>(ConnectRequest{}));
  corpus.push_back(encode_frame<G>(PaymentRequest{ride.id(0), UseCase::kFuel, 6, "pump"}));
  Rng rng(27);
  for (int i = 0; i < 2000; ++i) {
    Bytes f;
    if (rng.uniform(4) == 0) {
      f.resize(rng.uniform(64));
      rng.fill(f);
    } else {
      f = corpus[rng.uniform(corpus.size())];
      if (rng.uniform(2)) f.resize(rng.uniform(f.size() + 1));
      for (int k = 0; k < 3 && !f.empty(); ++k) f[rng.uniform(f.size())] ^= static_cast<std::uint8_t>(rng.next_u64());
    }
    ride.cam.on_message(0.0, static_cast<LinkId>(rng.uniform(3)), f);
    ride.devices[rng.uniform(2)].on_message(0.0, f);
  }
  ride.pump();
  ride.deliver(ride.cam.on_timer(100.0));
  ride.pump();
  EXPECT_EQ(ride.cam.pending_challenges(), 0u);
}

TEST(GoldenTrace, ScriptedRideIsByteStable) {
  using G = SafePrime64;
  auto run = [] {
    Ride<G> ride(3, 2026);
    ride.connect_all();
    ride.capture({0, 1, 2});
    ride.pay(ride.voice_of(2), "Hey DashCam, pay for gas at pump six.");
    return ride.trace;
  };
  const Bytes a = run();
  EXPECT_EQ(a, run());
  EXPECT_EQ(to_hex(sha256(a)), "a76de10b6a07fc962433d34890b5506d13d8a8ba194cce1c9a057e44579175de");
}

}  // namespace
}  // namespace dcp
