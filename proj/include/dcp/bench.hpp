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

// Timing harness for one device/dashcam comparison and for bulk pairs.

#pragma once

#include <nlohmann/json.hpp>

#include <chrono>
#include <sstream>
#include <string>
#include <vector>

#include "dcp/elgamal_secret.hpp"
#include "dcp/embedding.hpp"
#include "dcp/zkp.hpp"
#include "dcp/zkp_prover.hpp"

namespace dcp {

struct BenchStage {
  std::string name;
  double ms = 0.0;
};

struct ComparisonBench {
  std::string group;
  std::size_t d = 0;
  std::int32_t q = 0;
  std::vector<BenchStage> stages;
  double total_ms = 0.0;
  std::size_t enrollment_bytes = 0;  // one encrypted template
  std::size_t proof_bytes = 0;
  bool match = false;
};

struct PairsBench {
  std::string group;
  std::size_t pairs = 0;
  double seconds = 0.0;
  std::size_t correct = 0;  // verified outcome equals plaintext S > t
};

namespace detail {

template <class F>
double time_ms(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace detail

// Key generation, enrollment encryption, the dashcam's encrypted inner
// product, the device's decryption and proof, and verification, timed from a
// cold start. The discrete-log table is built on first use and reported as
// its own stage.
template <PrimeOrderGroup G>
ComparisonBench bench_comparison(std::size_t d, std::int32_t q, double threshold_cos, Rng& rng) {
  ComparisonBench out;
  out.group = std::string(G::kName);
  out.d = d;
  out.q = q;
  const std::int64_t bound = score_bound(d, q);
  const Threshold t{cosine_to_threshold(threshold_cos, q)};
  IdentityProfile subject = generate_profiles(1, d, 0.05, 1.0, rng).front();
  const auto enrolled = quantize(sample_observation(subject, Modality::kFace, rng), q);
  const auto probe = quantize(sample_observation(subject, Modality::kFace, rng), q);
  const ProofContext ctx{1, Modality::kFace, rng.next_u64()};

  KeyPair<G> keys;
  EncryptedTemplate<G> et;
  Ciphertext<G> score;
  MatchProof<G> proof;
  Bytes proof_bytes;
  MatchResult verdict = MatchResult::kInvalid;
  auto stage = [&](const char* name, auto&& f) {
    const double ms = detail::time_ms(f);
    out.stages.push_back({name, ms});
    out.total_ms += ms;
  };
  stage("keygen", [&] { keys = keygen<G>(rng); });
  stage("encrypt_template", [&] { et = encrypt_template(keys.pub, enrolled, 1, rng); });
  stage("dlog_table", [&] { (void)dlog_table<G>(bound); });
  stage("inner_product", [&] { score = encrypted_inner_product(et, probe); });
  stage("decrypt_and_prove", [&] {
    proof = prove_match(keys, score, t, bound, ctx, rng);
    proof_bytes = proof.serialize();
  });
  stage("verify", [&] { verdict = verify_match_bytes(keys.pub, score, t, bound, proof_bytes, ctx); });
  out.enrollment_bytes = et.serialize().size();
  out.proof_bytes = proof_bytes.size();
  out.match = verdict == MatchResult::kMatch;
  return out;
}

// Bulk comparisons under one key pair: fresh probe, encrypted inner product,
// proof and verification per pair.
template <PrimeOrderGroup G>
PairsBench bench_pairs(std::size_t pairs, std::size_t d, std::int32_t q, double threshold_cos, Rng& rng) {
  PairsBench out;
  out.group = std::string(G::kName);
  out.pairs = pairs;
  const std::int64_t bound = score_bound(d, q);
  const Threshold t{cosine_to_threshold(threshold_cos, q)};
  auto subjects = generate_profiles(2, d, 0.2, 0.2, rng);
  const auto keys = keygen<G>(rng);
  const auto enrolled = quantize(subjects[0].face, q);
  const auto et = encrypt_template(keys.pub, enrolled, 1, rng);
  (void)dlog_table<G>(bound);
  out.seconds = detail::time_ms([&] {
                  for (std::size_t i = 0; i < pairs; ++i) {
                    const auto probe = quantize(sample_observation(subjects[i % 2], Modality::kFace, rng), q);
                    const ProofContext ctx{1, Modality::kFace, i};
                    const auto ct = encrypted_inner_product(et, probe);
                    const auto proof = prove_match(keys, ct, t, bound, ctx, rng);
                    const auto r = verify_match(keys.pub, ct, t, bound, proof, ctx);
                    const bool expected = inner_product_int(enrolled, probe) > t.value;
                    if (r == (expected ? MatchResult::kMatch : MatchResult::kNonMatch)) ++out.correct;
                  }
                }) / 1000.0;
  return out;
}

inline nlohmann::json to_json(const ComparisonBench& b) {
  nlohmann::json stages = nlohmann::json::object();
  for (const auto& s : b.stages) stages[s.name] = s.ms;
  return {{"group", b.group},         {"d", b.d},
          {"Q", b.q},                 {"stages_ms", stages},
          {"total_ms", b.total_ms},   {"enrollment_bytes", b.enrollment_bytes},
          {"proof_bytes", b.proof_bytes}, {"match", b.match}};
}

inline std::string to_text(const ComparisonBench& b) {
  std::ostringstream o;
  o << "group " << b.group << ", d = " << b.d << ", Q = " << b.q << "\n";
  for (const auto& s : b.stages) o << "  " << s.name << std::string(20 - s.name.size(), ' ') << s.ms << " ms\n";
  o << "  total               " << b.total_ms << " ms\n";
  o << "encrypted template " << b.enrollment_bytes << " bytes, proof " << b.proof_bytes << " bytes, "
    << (b.match ? "match" : "non-match") << "\n";
  return o.str();
}

}  // namespace dcp
