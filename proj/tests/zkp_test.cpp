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

#include "dcp/zkp.hpp"

#include <gtest/gtest.h>

#include "dcp/zkp_prover.hpp"

namespace dcp {
namespace {

constexpr std::int64_t kBound = 128LL * 127 * 127;

template <class G>
std::string scalar_hex(const typename G::Scalar& s) {
  ByteWriter w;
  G::write_scalar(w, s);
  return to_hex(w.bytes());
}

template <class G>
struct Fixture {
  Rng rng{99};
  KeyPair<G> keys = keygen<G>(rng);
  ProofContext ctx{0x1122334455667788ULL, Modality::kFace, 42};

  Ciphertext<G> enc(std::int64_t s) { return encrypt(keys.pub, s, kBound, rng); }
  MatchProof<G> prove(const Ciphertext<G>& ct, std::int64_t t) {
    return prove_match(keys, ct, Threshold{t}, kBound, ctx, rng);
  }
  MatchResult verify(const Ciphertext<G>& ct, std::int64_t t, const MatchProof<G>& p) {
    return verify_match(keys.pub, ct, Threshold{t}, kBound, p, ctx);
  }
};

template <class G>
class ZkpTest : public ::testing::Test {};

using Groups = ::testing::Types<SafePrime64, Ristretto255>;
TYPED_TEST_SUITE(ZkpTest, Groups);

TYPED_TEST(ZkpTest, CommitmentBasics) {
  using G = TypeParam;
  EXPECT_EQ(commit_with<G>(0, G::scalar(0)).value, G::identity());
  Rng a(1), b(2);
  EXPECT_NE(commit<G>(5, a).first, commit<G>(5, b).first);
  Rng rng(3);
  for (int i = 0; i < 10; ++i) {
    const auto v = static_cast<std::int64_t>(rng.uniform(1000)) - 500;
    auto [c, o] = commit<G>(v, rng);
    EXPECT_TRUE(verify_opening(c, o));
    o.value += 1;
    EXPECT_FALSE(verify_opening(c, o));
  }
}

TYPED_TEST(ZkpTest, ChallengeDerivation) {
  using G = TypeParam;
  const Bytes t{1, 2, 3, 4};
  EXPECT_EQ(derive_challenge<G>("dcp/v1", t), derive_challenge<G>("dcp/v1", t));
  Bytes t2 = t;
  t2[2] ^= 1;
  EXPECT_NE(derive_challenge<G>("dcp/v1", t), derive_challenge<G>("dcp/v1", t2));
  EXPECT_NE(derive_challenge<G>("dcp/v1", t), derive_challenge<G>("dcp/v2", t));
}

TEST(ChallengeFixture, EmptyTranscript) {
  EXPECT_EQ(scalar_hex<SafePrime64>(derive_challenge<SafePrime64>("dcp/v1", {})),
            "09b1777eaf74cadb");
  EXPECT_EQ(scalar_hex<Ristretto255>(derive_challenge<Ristretto255>("dcp/v1", {})),
            "2113661ebce99b187a8099647fbc6beb5a50c23be65dc65f7efc2c85794bbc0b");
}

TEST(RangeBits, Values) {
  EXPECT_EQ(range_bits(kBound), 23);  // 2B + 1 = 4,129,025 -> 22 bits, plus one
  EXPECT_EQ(range_bits(0), 1);
  EXPECT_EQ(range_bits(300), 11);  // 601 -> 10 bits, plus one
}

TYPED_TEST(ZkpTest, BoundaryCases) {
  using G = TypeParam;
  Fixture<G> f;
  const std::int64_t t = 8064;
  const auto above = f.enc(t + 1);
  const auto p_above = f.prove(above, t);
  EXPECT_TRUE(p_above.match);
  EXPECT_EQ(f.verify(above, t, p_above), MatchResult::kMatch);

  const auto at = f.enc(t);
  const auto p_at = f.prove(at, t);
  EXPECT_FALSE(p_at.match);
  EXPECT_EQ(f.verify(at, t, p_at), MatchResult::kNonMatch);
}

TYPED_TEST(ZkpTest, ExtremeScores) {
  using G = TypeParam;
  Fixture<G> f;
  for (std::int64_t s : {kBound, -kBound}) {
    for (std::int64_t t : {kBound - 1, -kBound + 1, std::int64_t{0}}) {
      const auto ct = f.enc(s);
      const auto p = f.prove(ct, t);
      EXPECT_EQ(f.verify(ct, t, p), s > t ? MatchResult::kMatch : MatchResult::kNonMatch);
    }
  }
}

TYPED_TEST(ZkpTest, ProofsHaveUniformShape) {
  using G = TypeParam;
  Fixture<G> f;
  const std::int64_t t = 100;
  const Bytes minimal = f.prove(f.enc(t + 1), t).serialize();
  const Bytes maximal = f.prove(f.enc(kBound), t).serialize();
  const Bytes nonmatch = f.prove(f.enc(-kBound), t).serialize();
  EXPECT_EQ(minimal.size(), maximal.size());
  EXPECT_EQ(minimal.size(), nonmatch.size());
  EXPECT_EQ(MatchProof<G>::deserialize(minimal).bit_commitments.size(), 23u);
}

TYPED_TEST(ZkpTest, SerializationRoundTrip) {
  using G = TypeParam;
  Fixture<G> f;
  const auto ct = f.enc(1234);
  const auto p = f.prove(ct, 1000);
  const Bytes bytes = p.serialize();
  EXPECT_EQ(MatchProof<G>::deserialize(bytes), p);
  EXPECT_EQ(verify_match_bytes(f.keys.pub, ct, Threshold{1000}, kBound, bytes, f.ctx),
            MatchResult::kMatch);
  const Bytes truncated(bytes.begin(), bytes.end() - 1);
  EXPECT_EQ(verify_match_bytes(f.keys.pub, ct, Threshold{1000}, kBound, truncated, f.ctx),
            MatchResult::kInvalid);
}

TYPED_TEST(ZkpTest, CannotProveOutOfRange) {
  using G = TypeParam;
  Fixture<G> f;
  auto ct = f.enc(kBound);
  ct.c2 = G::mul(ct.c2, G::generator());
  EXPECT_THROW(f.prove(ct, 0), CannotProve);
}

// Comparison oracle over a grid of (S, t) in [-300, 300].
TEST(ZkpGridTest, AgreesWithPlaintextComparison) {
  using G = SafePrime64;
  Fixture<G> f;
  int checked = 0;
  for (std::int64_t s = -300; s <= 300; s += 25) {
    for (std::int64_t t = -300; t <= 300; t += 25) {
      for (std::int64_t dt : {-1, 0, 1}) {
        const std::int64_t tt = std::clamp<std::int64_t>(t + dt, -300, 300);
        const auto ct = f.enc(s);
        const auto res = f.verify(ct, tt, f.prove(ct, tt));
        ASSERT_EQ(res, s > tt ? MatchResult::kMatch : MatchResult::kNonMatch) << s << " " << tt;
        ++checked;
      }
    }
  }
  Rng rng(5);
  for (int i = 0; i < 400; ++i) {
    const auto s = static_cast<std::int64_t>(rng.uniform(601)) - 300;
    const auto t = static_cast<std::int64_t>(rng.uniform(601)) - 300;
    const auto ct = f.enc(s);
    ASSERT_EQ(f.verify(ct, t, f.prove(ct, t)), s > t ? MatchResult::kMatch : MatchResult::kNonMatch);
    ++checked;
  }
  EXPECT_GT(checked, 2000);
}

TYPED_TEST(ZkpTest, MutationsAreRejected) {
  using G = TypeParam;
  Fixture<G> f;
  const std::int64_t t = 500;
  const auto ct = f.enc(900);
  const auto honest = f.prove(ct, t);
  const auto other = f.prove(f.enc(900), t);
  ASSERT_EQ(f.verify(ct, t, honest), MatchResult::kMatch);

  auto flipped = honest;
  flipped.match = !flipped.match;
  EXPECT_EQ(f.verify(ct, t, flipped), MatchResult::kInvalid);

  auto swapped = honest;
  std::swap(swapped.bit_commitments[0], swapped.bit_commitments[1]);
  EXPECT_EQ(f.verify(ct, t, swapped), MatchResult::kInvalid);

  auto truncated = honest;
  truncated.bit_commitments.pop_back();
  truncated.bit_proofs.pop_back();
  EXPECT_EQ(f.verify(ct, t, truncated), MatchResult::kInvalid);

  ProofContext replay = f.ctx;
  replay.nonce += 1;
  EXPECT_EQ(verify_match(f.keys.pub, ct, Threshold{t}, kBound, honest, replay), MatchResult::kInvalid);

  auto reused = honest;
  reused.z_key = other.z_key;
  EXPECT_EQ(f.verify(ct, t, reused), MatchResult::kInvalid);

  auto foreign_commitment = honest;
  foreign_commitment.score_commitment = other.score_commitment;
  EXPECT_EQ(f.verify(ct, t, foreign_commitment), MatchResult::kInvalid);

  EXPECT_EQ(f.verify(ct, t + 1, honest), MatchResult::kInvalid);
  EXPECT_EQ(f.verify(f.enc(900), t, honest), MatchResult::kInvalid);

  auto bad_bit = honest;
  bad_bit.bit_proofs[3].e0 = G::add(bad_bit.bit_proofs[3].e0, G::scalar(1));
  EXPECT_EQ(f.verify(ct, t, bad_bit), MatchResult::kInvalid);

  auto bad_agg = honest;
  bad_agg.z_agg = G::add(bad_agg.z_agg, G::scalar(1));
  EXPECT_EQ(f.verify(ct, t, bad_agg), MatchResult::kInvalid);

  ProofContext other_modality = f.ctx;
  other_modality.modality = Modality::kVoice;
  EXPECT_EQ(verify_match(f.keys.pub, ct, Threshold{t}, kBound, honest, other_modality),
            MatchResult::kInvalid);
}

TEST(ZkpCompletenessTest, RandomisedTrials) {
  using G = SafePrime64;
  Rng rng(77);
  int ok = 0;
  for (int i = 0; i < 500; ++i) {
    const auto keys = keygen<G>(rng);
    const auto s = static_cast<std::int64_t>(rng.uniform(2 * kBound + 1)) - kBound;
    const auto t = static_cast<std::int64_t>(rng.uniform(2 * kBound - 1)) - kBound + 1;
    const ProofContext ctx{rng.next_u64(), Modality::kVoice, rng.next_u64()};
    const auto ct = encrypt(keys.pub, s, kBound, rng);
    const auto p = prove_match(keys, ct, Threshold{t}, kBound, ctx, rng);
    if (verify_match(keys.pub, ct, Threshold{t}, kBound, p, ctx) ==
        (s > t ? MatchResult::kMatch : MatchResult::kNonMatch)) {
      ++ok;
    }
  }
  EXPECT_EQ(ok, 500);
}

}  // namespace
}  // namespace dcp
