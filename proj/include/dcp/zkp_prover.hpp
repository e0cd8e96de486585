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

#pragma once

#include <stdexcept>
#include <string>

#include "dcp/elgamal_secret.hpp"
#include "dcp/zkp.hpp"

namespace dcp {

class CannotProve : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Decrypts `ct`, decides S > t and proves the decision. Throws CannotProve
// when the ciphertext does not decrypt inside [-bound, bound].
template <PrimeOrderGroup G>
MatchProof<G> prove_match(const KeyPair<G>& keys, const Ciphertext<G>& ct, Threshold t,
                          std::int64_t bound, const ProofContext& context, Rng& rng) {
  using Scalar = typename G::Scalar;
  using Element = typename G::Element;

  std::int64_t score = 0;
  try {
    score = decrypt(keys.secret, ct, *dlog_table<G>(bound));
  } catch (const DecryptionOutOfRange& e) {
    throw CannotProve(std::string("cannot prove: ") + e.what());
  }

  const int k = range_bits(bound);
  MatchProof<G> p;
  p.match = score > t.value;
  p.context = context;

  const std::int64_t delta = p.match ? score - t.value - 1 : t.value - score;
  if (delta < 0 || (k < 63 && delta >= (std::int64_t{1} << k))) {
    throw CannotProve("threshold outside the provable range");
  }

  const Element& g = G::generator();
  const Element& h = G::blinding_generator();

  const Scalar blind = G::random_scalar(rng);
  p.score_commitment = commit_with<G>(score, blind).value;

  const Scalar a = G::random_scalar(rng);
  const Scalar b = G::random_scalar(rng);
  const Scalar c = G::random_scalar(rng);
  p.t_key = G::pow_g(a);
  p.t_dec = G::mul(G::pow(ct.c1, a), G::pow_g(b));
  p.t_com = G::mul(G::pow_g(b), G::pow(h, c));

  // Bit commitments and the first move of every OR-proof.
  struct BitWitness {
    int bit;
    Scalar blinding, w, fake_e, fake_z;
  };
  std::vector<BitWitness> witness;
  Scalar weighted_blinding = G::scalar(0);
  for (int j = 0; j < k; ++j) {
    BitWitness bw{static_cast<int>((delta >> j) & 1), G::random_scalar(rng), G::random_scalar(rng),
                  G::random_scalar(rng), G::random_scalar(rng)};
    const Element cj = G::mul(bw.bit ? g : G::identity(), G::pow(h, bw.blinding));
    const Element fake_base = bw.bit ? cj : G::div(cj, g);  // the branch that is false
    const Element real_a = G::pow(h, bw.w);
    const Element fake_a = G::div(G::pow(h, bw.fake_z), G::pow(fake_base, bw.fake_e));
    BitProof<G> bp;
    bp.a0 = bw.bit ? fake_a : real_a;
    bp.a1 = bw.bit ? real_a : fake_a;
    p.bit_commitments.push_back(cj);
    p.bit_proofs.push_back(bp);
    weighted_blinding = G::add(weighted_blinding,
                               G::mul_scalar(G::scalar(std::int64_t{1} << j), bw.blinding));
    witness.push_back(bw);
  }

  const Scalar delta_blind = p.match ? blind : G::neg(blind);
  const Scalar residue_log = G::sub(delta_blind, weighted_blinding);
  const Scalar w_agg = G::random_scalar(rng);
  p.t_agg = G::pow(h, w_agg);

  const Scalar e = detail::match_challenge(keys.pub, ct, t, bound, p);

  p.z_key = G::add(a, G::mul_scalar(e, keys.secret.value));
  p.z_score = G::add(b, G::mul_scalar(e, G::scalar(score)));
  p.z_blind = G::add(c, G::mul_scalar(e, blind));

  for (int j = 0; j < k; ++j) {
    const BitWitness& bw = witness[j];
    BitProof<G>& bp = p.bit_proofs[j];
    const Scalar real_e = G::sub(e, bw.fake_e);
    const Scalar real_z = G::add(bw.w, G::mul_scalar(real_e, bw.blinding));
    if (bw.bit) {
      bp.e0 = bw.fake_e;
      bp.z0 = bw.fake_z;
      bp.z1 = real_z;
    } else {
      bp.e0 = real_e;
      bp.z0 = real_z;
      bp.z1 = bw.fake_z;
    }
  }
  p.z_agg = G::add(w_agg, G::mul_scalar(e, residue_log));
  return p;
}

}  // namespace dcp
