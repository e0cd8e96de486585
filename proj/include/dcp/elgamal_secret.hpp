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

// Key generation and bounded decryption. Only device-side code includes this.

#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "dcp/elgamal.hpp"

namespace dcp {

class DecryptionOutOfRange : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <PrimeOrderGroup G>
struct SecretKey {
  typename G::Scalar value;
};

template <PrimeOrderGroup G>
struct KeyPair {
  SecretKey<G> secret;
  PublicKey<G> pub;
};

template <PrimeOrderGroup G>
KeyPair<G> keygen(Rng& rng) {
  typename G::Scalar x = G::random_scalar(rng);
  while (x == G::scalar(0)) x = G::random_scalar(rng);
  return {SecretKey<G>{x}, PublicKey<G>{G::pow_g(x)}};
}

// Baby-step/giant-step table for discrete logs of g^v with v in [-B, B].
template <PrimeOrderGroup G>
class DlogTable {
 public:
  explicit DlogTable(std::int64_t bound) : bound_(bound) {
    if (bound < 0) throw std::invalid_argument("dlog bound must be >= 0");
    const auto span = static_cast<std::uint64_t>(2 * bound + 1);
    step_ = static_cast<std::uint64_t>(std::ceil(std::sqrt(static_cast<double>(span))));
    while (step_ * step_ < span) ++step_;
    baby_.reserve(step_);
    index_.reserve(step_ * 2);
    typename G::Element cur = G::identity();
    const typename G::Element g = G::generator();
    for (std::uint64_t j = 0; j < step_; ++j) {
      auto enc = G::encode(cur);
      index_.emplace(key_of(enc), static_cast<std::uint32_t>(j));
      baby_.push_back(enc);
      cur = G::mul(cur, g);
    }
    giant_ = G::pow_g(G::neg(G::scalar(static_cast<std::int64_t>(step_))));
  }

  std::int64_t bound() const { return bound_; }
  std::uint64_t step() const { return step_; }

  // v with g^v == target and |v| <= bound, if any.
  std::optional<std::int64_t> log(const typename G::Element& target) const {
    typename G::Element cur = G::mul(target, G::pow_g(G::scalar(bound_)));  // shift to [0, 2B]
    const auto top = static_cast<std::uint64_t>(2 * bound_);
    for (std::uint64_t i = 0; i <= step_ && i * step_ <= top; ++i) {
      const auto enc = G::encode(cur);
      auto [lo, hi] = index_.equal_range(key_of(enc));
      for (auto it = lo; it != hi; ++it) {
        if (baby_[it->second] != enc) continue;
        const std::uint64_t shifted = i * step_ + it->second;
        if (shifted <= top) return static_cast<std::int64_t>(shifted) - bound_;
      }
      cur = G::mul(cur, giant_);
    }
    return std::nullopt;
  }

 private:
  static std::uint64_t key_of(const std::array<std::uint8_t, G::kElementBytes>& enc) {
    std::uint64_t k = 0;
    for (std::size_t i = 0; i < 8 && i < enc.size(); ++i) k = (k << 8) | enc[i];
    return k;
  }

  std::int64_t bound_;
  std::uint64_t step_ = 1;
  std::vector<std::array<std::uint8_t, G::kElementBytes>> baby_;
  std::unordered_multimap<std::uint64_t, std::uint32_t> index_;
  typename G::Element giant_{};
};

// Shared read-only table per bound, built on first use.
template <PrimeOrderGroup G>
std::shared_ptr<const DlogTable<G>> dlog_table(std::int64_t bound) {
  static std::mutex mu;
  static std::map<std::int64_t, std::shared_ptr<const DlogTable<G>>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[bound];
  if (!slot) slot = std::make_shared<const DlogTable<G>>(bound);
  return slot;
}

// g^v for the plaintext v of c.
template <PrimeOrderGroup G>
typename G::Element decrypt_to_element(const SecretKey<G>& sk, const Ciphertext<G>& c) {
  return G::div(c.c2, G::pow(c.c1, sk.value));
}

template <PrimeOrderGroup G>
std::int64_t decrypt(const SecretKey<G>& sk, const Ciphertext<G>& c, const DlogTable<G>& table) {
  auto v = table.log(decrypt_to_element(sk, c));
  if (!v) {
    throw DecryptionOutOfRange("plaintext outside [-" + std::to_string(table.bound()) + ", " +
                               std::to_string(table.bound()) + "]");
  }
  return *v;
}

template <PrimeOrderGroup G>
std::int64_t decrypt(const SecretKey<G>& sk, const Ciphertext<G>& c, std::int64_t bound) {
  return decrypt(sk, c, *dlog_table<G>(bound));
}

}  // namespace dcp
