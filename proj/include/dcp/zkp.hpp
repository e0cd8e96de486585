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

// Match proofs: the verifier side, shared types and challenge derivation.
//
// A device that holds sk for pk = g^x and receives Enc(S) = (c1, c2) proves,
// without revealing S, that
//
//   (1) it knows (x, S, r) with  pk = g^x,  c2 = c1^x g^S,  C_S = g^S h^r,
//       i.e. C_S commits to the true decryption of the challenge, and
//   (2) Delta >= 0, where Delta = S - t - 1 for a claimed match and
//       Delta = t - S for a claimed non-match. The verifier derives the
//       commitment to Delta from C_S itself; the prover shows it opens to
//       sum_j 2^j b_j with every b_j in {0, 1} (one OR-proof per bit) and
//       proves knowledge of the leftover blinding in base h.
//
// All sub-proofs share one Fiat-Shamir challenge computed over the full
// statement (pk, ciphertext, t, bound, context, claimed bit) and every
// prover commitment, so a proof cannot be moved to another round, device,
// threshold or claim.

#pragma once

#include <sodium.h>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "dcp/bytes.hpp"
#include "dcp/elgamal.hpp"
#include "dcp/embedding.hpp"
#include "dcp/group.hpp"

namespace dcp {

struct Threshold {
  std::int64_t value = 0;

  friend bool operator==(const Threshold&, const Threshold&) = default;
};

// Binds a proof to one challenge of one round for one device.
struct ProofContext {
  std::uint64_t device = 0;
  Modality modality = Modality::kFace;
  std::uint64_t nonce = 0;

  friend bool operator==(const ProofContext&, const ProofContext&) = default;

  void write(ByteWriter& w) const {
    w.u64(device);
    w.u8(static_cast<std::uint8_t>(modality));
    w.u64(nonce);
  }

  static ProofContext read(ByteReader& r) {
    ProofContext c;
    c.device = r.u64();
    c.modality = modality_from_byte(r.u8());
    c.nonce = r.u64();
    return c;
  }
};

enum class MatchResult { kMatch, kNonMatch, kInvalid };

inline const char* to_string(MatchResult r) {
  switch (r) {
    case MatchResult::kMatch: return "match";
    case MatchResult::kNonMatch: return "non-match";
    case MatchResult::kInvalid: return "invalid";
  }
  return "invalid";
}

// k = ceil(log2(2B + 1)) + 1 bits for the range decomposition.
inline int range_bits(std::int64_t bound) {
  const auto span = static_cast<std::uint64_t>(2 * bound + 1);
  int bits = 0;
  while (bits < 63 && (std::uint64_t{1} << bits) < span) ++bits;
  return bits + 1;
}

// Hash-to-scalar, domain separated by `label`:
// SHA-512(u32 |label| || label || transcript) reduced modulo the group order.
template <PrimeOrderGroup G>
typename G::Scalar derive_challenge(std::string_view label, ByteView transcript) {
  ensure_sodium();
  crypto_hash_sha512_state st;
  crypto_hash_sha512_init(&st);
  ByteWriter prefix;
  prefix.str(label);
  crypto_hash_sha512_update(&st, prefix.bytes().data(), prefix.size());
  crypto_hash_sha512_update(&st, transcript.data(), transcript.size());
  std::array<std::uint8_t, crypto_hash_sha512_BYTES> digest{};
  crypto_hash_sha512_final(&st, digest.data());
  return G::reduce_wide(digest);
}

// ---------------------------------------------------------------------------
// Pedersen commitments C = g^v h^r.

template <PrimeOrderGroup G>
struct Commitment {
  typename G::Element value;

  friend bool operator==(const Commitment&, const Commitment&) = default;
};

template <PrimeOrderGroup G>
struct Opening {
  std::int64_t value = 0;
  typename G::Scalar blinding;
};

template <PrimeOrderGroup G>
Commitment<G> commit_with(std::int64_t v, const typename G::Scalar& r) {
  return {G::mul(G::pow_g(G::scalar(v)), G::pow(G::blinding_generator(), r))};
}

template <PrimeOrderGroup G>
std::pair<Commitment<G>, Opening<G>> commit(std::int64_t v, Rng& rng) {
  const auto r = G::random_scalar(rng);
  return {commit_with<G>(v, r), Opening<G>{v, r}};
}

template <PrimeOrderGroup G>
bool verify_opening(const Commitment<G>& c, const Opening<G>& o) {
  return commit_with<G>(o.value, o.blinding) == c;
}

// ---------------------------------------------------------------------------

// Proof that a bit commitment C opens to 0 or 1: knowledge of log_h(C) or of
// log_h(C / g). The branch challenges satisfy e0 + e1 = e.
template <PrimeOrderGroup G>
struct BitProof {
  typename G::Element a0, a1;
  typename G::Scalar e0, z0, z1;

  friend bool operator==(const BitProof&, const BitProof&) = default;
};

template <PrimeOrderGroup G>
struct MatchProof {
  bool match = false;
  ProofContext context;
  typename G::Element score_commitment;

  // Decryption consistency: commitments and responses for (x, S, r).
  typename G::Element t_key, t_dec, t_com;
  typename G::Scalar z_key, z_score, z_blind;

  // Range proof on Delta.
  std::vector<typename G::Element> bit_commitments;
  std::vector<BitProof<G>> bit_proofs;
  typename G::Element t_agg;
  typename G::Scalar z_agg;

  friend bool operator==(const MatchProof&, const MatchProof&) = default;

  void write(ByteWriter& w) const {
    w.u8(match ? 1 : 0);
    context.write(w);
    G::write(w, score_commitment);
    G::write(w, t_key);
    G::write(w, t_dec);
    G::write(w, t_com);
    G::write_scalar(w, z_key);
    G::write_scalar(w, z_score);
    G::write_scalar(w, z_blind);
    w.u32(static_cast<std::uint32_t>(bit_commitments.size()));
    for (const auto& c : bit_commitments) G::write(w, c);
    w.u32(static_cast<std::uint32_t>(bit_proofs.size()));
    for (const auto& p : bit_proofs) {
      G::write(w, p.a0);
      G::write(w, p.a1);
      G::write_scalar(w, p.e0);
      G::write_scalar(w, p.z0);
      G::write_scalar(w, p.z1);
    }
    G::write(w, t_agg);
    G::write_scalar(w, z_agg);
  }

  static constexpr std::uint32_t kMaxBits = 64;

  static MatchProof read(ByteReader& r) {
    MatchProof p;
    const std::uint8_t bit = r.u8();
    if (bit > 1) throw DecodeError(DecodeError::Kind::kMalformed, "claimed bit out of range");
    p.match = bit == 1;
    p.context = ProofContext::read(r);
    p.score_commitment = G::read_element(r);
    p.t_key = G::read_element(r);
    p.t_dec = G::read_element(r);
    p.t_com = G::read_element(r);
    p.z_key = G::read_scalar(r);
    p.z_score = G::read_scalar(r);
    p.z_blind = G::read_scalar(r);
    const std::uint32_t k = r.u32();
    if (k > kMaxBits) throw DecodeError(DecodeError::Kind::kBadLength, "too many bit commitments");
    for (std::uint32_t i = 0; i < k; ++i) p.bit_commitments.push_back(G::read_element(r));
    const std::uint32_t k2 = r.u32();
    if (k2 > kMaxBits) throw DecodeError(DecodeError::Kind::kBadLength, "too many bit proofs");
    for (std::uint32_t i = 0; i < k2; ++i) {
      BitProof<G> bp;
      bp.a0 = G::read_element(r);
      bp.a1 = G::read_element(r);
      bp.e0 = G::read_scalar(r);
      bp.z0 = G::read_scalar(r);
      bp.z1 = G::read_scalar(r);
      p.bit_proofs.push_back(bp);
    }
    p.t_agg = G::read_element(r);
    p.z_agg = G::read_scalar(r);
    return p;
  }

  Bytes serialize() const {
    ByteWriter w;
    write(w);
    return std::move(w).take();
  }

  static MatchProof deserialize(ByteView bytes) {
    ByteReader r(bytes);
    MatchProof p = read(r);
    r.expect_end();
    return p;
  }
};

namespace detail {

inline constexpr std::string_view kMatchLabel = "dcp/v1/match";

template <PrimeOrderGroup G>
typename G::Scalar match_challenge(const PublicKey<G>& pk, const Ciphertext<G>& ct, Threshold t,
                                   std::int64_t bound, const MatchProof<G>& p) {
  ByteWriter w;
  w.str(G::kName);
  p.context.write(w);
  G::write(w, pk.element);
  ct.write(w);
  w.i64(t.value);
  w.i64(bound);
  w.u8(p.match ? 1 : 0);
  G::write(w, p.score_commitment);
  G::write(w, p.t_key);
  G::write(w, p.t_dec);
  G::write(w, p.t_com);
  w.u32(static_cast<std::uint32_t>(p.bit_commitments.size()));
  for (const auto& c : p.bit_commitments) G::write(w, c);
  for (const auto& bp : p.bit_proofs) {
    G::write(w, bp.a0);
    G::write(w, bp.a1);
  }
  G::write(w, p.t_agg);
  return derive_challenge<G>(kMatchLabel, w.bytes());
}

// Commitment to Delta derived from C_S alone.
template <PrimeOrderGroup G>
typename G::Element delta_commitment(const typename G::Element& score_commitment, bool match,
                                     Threshold t) {
  if (match) return G::div(score_commitment, G::pow_g(G::scalar(t.value + 1)));
  return G::div(G::pow_g(G::scalar(t.value)), score_commitment);
}

// prod_j C_j^(2^j), by Horner from the top bit.
template <PrimeOrderGroup G>
typename G::Element weighted_product(const std::vector<typename G::Element>& bits) {
  typename G::Element acc = G::identity();
  for (auto it = bits.rbegin(); it != bits.rend(); ++it) acc = G::mul(G::mul(acc, acc), *it);
  return acc;
}

}  // namespace detail

// Accepts iff every equation holds for the recomputed challenge; returns the
// claimed bit in that case. Never throws.
template <PrimeOrderGroup G>
MatchResult verify_match(const PublicKey<G>& pk, const Ciphertext<G>& ct, Threshold t,
                         std::int64_t bound, const MatchProof<G>& p,
                         const ProofContext& expected) noexcept {
  try {
    if (p.context != expected) return MatchResult::kInvalid;
    const auto k = static_cast<std::size_t>(range_bits(bound));
    if (p.bit_commitments.size() != k || p.bit_proofs.size() != k) return MatchResult::kInvalid;

    const auto e = detail::match_challenge(pk, ct, t, bound, p);
    const auto& g = G::generator();
    const auto& h = G::blinding_generator();

    if (G::pow_g(p.z_key) != G::mul(p.t_key, G::pow(pk.element, e))) return MatchResult::kInvalid;
    if (G::mul(G::pow(ct.c1, p.z_key), G::pow_g(p.z_score)) != G::mul(p.t_dec, G::pow(ct.c2, e))) {
      return MatchResult::kInvalid;
    }
    if (G::mul(G::pow_g(p.z_score), G::pow(h, p.z_blind)) !=
        G::mul(p.t_com, G::pow(p.score_commitment, e))) {
      return MatchResult::kInvalid;
    }

    for (std::size_t j = 0; j < k; ++j) {
      const auto& c = p.bit_commitments[j];
      const auto& bp = p.bit_proofs[j];
      const auto e1 = G::sub(e, bp.e0);
      if (G::pow(h, bp.z0) != G::mul(bp.a0, G::pow(c, bp.e0))) return MatchResult::kInvalid;
      if (G::pow(h, bp.z1) != G::mul(bp.a1, G::pow(G::div(c, g), e1))) return MatchResult::kInvalid;
    }

    const auto residue = G::div(detail::delta_commitment<G>(p.score_commitment, p.match, t),
                                detail::weighted_product<G>(p.bit_commitments));
    if (G::pow(h, p.z_agg) != G::mul(p.t_agg, G::pow(residue, e))) return MatchResult::kInvalid;

    return p.match ? MatchResult::kMatch : MatchResult::kNonMatch;
  } catch (...) {
    return MatchResult::kInvalid;
  }
}

template <PrimeOrderGroup G>
MatchResult verify_match_bytes(const PublicKey<G>& pk, const Ciphertext<G>& ct, Threshold t,
                               std::int64_t bound, ByteView proof_bytes,
                               const ProofContext& expected) noexcept {
  try {
    return verify_match(pk, ct, t, bound, MatchProof<G>::deserialize(proof_bytes), expected);
  } catch (...) {
    return MatchResult::kInvalid;
  }
}

}  // namespace dcp
