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

#include <sodium.h>

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string_view>

namespace dcp {

inline void ensure_sodium() {
  static const bool ready = [] {
    if (sodium_init() < 0) throw std::runtime_error("libsodium initialisation failed");
    return true;
  }();
  (void)ready;
}

// Deterministic ChaCha20 keystream generator.
//
// Every random draw in the library (key generation, encryption randomness,
// proof nonces, synthetic embeddings) goes through this type so that a
// 64-bit seed reproduces a whole ride bit for bit. Child streams from
// derive() depend only on the parent key, never on how much of the parent
// stream has been consumed.
class Rng {
 public:
  using result_type = std::uint64_t;
  using Key = std::array<std::uint8_t, crypto_stream_chacha20_KEYBYTES>;

  explicit Rng(std::uint64_t seed) {
    ensure_sodium();
    std::array<std::uint8_t, 8 + 8> input{'d', 'c', 'p', '/', 'r', 'n', 'g', 0};
    for (int i = 0; i < 8; ++i) input[8 + i] = static_cast<std::uint8_t>(seed >> (56 - 8 * i));
    crypto_generichash(key_.data(), key_.size(), input.data(), input.size(), nullptr, 0);
  }

  static Rng from_key(const Key& key) {
    Rng r(0);
    r.key_ = key;
    return r;
  }

  Rng derive(std::string_view label, std::uint64_t index = 0) const {
    crypto_generichash_state st;
    crypto_generichash_init(&st, key_.data(), key_.size(), crypto_stream_chacha20_KEYBYTES);
    crypto_generichash_update(&st, reinterpret_cast<const unsigned char*>(label.data()),
                              label.size());
    std::array<std::uint8_t, 8> idx{};
    for (int i = 0; i < 8; ++i) idx[i] = static_cast<std::uint8_t>(index >> (56 - 8 * i));
    crypto_generichash_update(&st, idx.data(), idx.size());
    Key child{};
    crypto_generichash_final(&st, child.data(), child.size());
    return from_key(child);
  }

  void fill(std::span<std::uint8_t> out) {
    for (std::uint8_t& b : out) {
      if (pos_ == buffer_.size()) refill();
      b = buffer_[pos_++];
    }
  }

  std::uint64_t next_u64() {
    std::array<std::uint8_t, 8> b{};
    fill(b);
    std::uint64_t v = 0;
    for (std::uint8_t x : b) v = (v << 8) | x;
    return v;
  }

  result_type operator()() { return next_u64(); }
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  // Unbiased integer in [0, n).
  std::uint64_t uniform(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform(0)");
    const std::uint64_t limit = max() - (max() % n + 1) % n;
    std::uint64_t v;
    do {
      v = next_u64();
    } while (v > limit);
    return v % n;
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller; the spare variate is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1;
    do {
      u1 = uniform01();
    } while (u1 <= 0.0);
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  const Key& key() const { return key_; }

 private:
  void refill() {
    buffer_.fill(0);
    std::array<std::uint8_t, crypto_stream_chacha20_NONCEBYTES> nonce{};
    crypto_stream_chacha20_xor_ic(buffer_.data(), buffer_.data(), buffer_.size(), nonce.data(),
                                  block_, key_.data());
    block_ += buffer_.size() / 64;
    pos_ = 0;
  }

  Key key_{};
  std::array<std::uint8_t, 512> buffer_{};
  std::size_t pos_ = buffer_.size();
  std::uint64_t block_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace dcp
