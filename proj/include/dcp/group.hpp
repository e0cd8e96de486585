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

// Prime-order cyclic groups used by the encryption and proof layers.
//
// Groups are written multiplicatively: mul() is the group operation and
// pow() is repeated application. Every group exposes two generators, g for
// messages and h for commitment blinding, with log_g(h) unknown.
//
//   SafePrime64    order-q subgroup of Z_p^* with p = 2q + 1, p ~ 2^62.
//                  Test profile only: fast, offers no security.
//   Ristretto255   prime-order group of order ~2^252 built on
//                  Curve25519 (libsodium). Secure profile.

#pragma once

#include <sodium.h>

#include <array>
#include <concepts>
#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>
#include <string_view>

#include "dcp/bytes.hpp"
#include "dcp/rng.hpp"

namespace dcp {

enum class GroupProfile { kTest, kSecure };

inline const char* to_string(GroupProfile p) { return p == GroupProfile::kTest ? "test" : "secure"; }

inline GroupProfile group_profile_from_string(const std::string& s) {
  if (s == "test") return GroupProfile::kTest;
  if (s == "secure") return GroupProfile::kSecure;
  throw std::invalid_argument("unknown group profile '" + s + "'");
}

template <class G>
concept PrimeOrderGroup = requires(const typename G::Element& a, const typename G::Scalar& s,
                                   ByteWriter& w, ByteReader& r, Rng& rng, ByteView wide) {
  { G::kName } -> std::convertible_to<std::string_view>;
  { G::kElementBytes } -> std::convertible_to<std::size_t>;
  { G::kScalarBytes } -> std::convertible_to<std::size_t>;
  { G::kOrderBits } -> std::convertible_to<int>;
  { G::identity() } -> std::same_as<typename G::Element>;
  { G::generator() } -> std::convertible_to<typename G::Element>;
  { G::blinding_generator() } -> std::convertible_to<typename G::Element>;
  { G::mul(a, a) } -> std::same_as<typename G::Element>;
  { G::div(a, a) } -> std::same_as<typename G::Element>;
  { G::pow(a, s) } -> std::same_as<typename G::Element>;
  { G::pow_g(s) } -> std::same_as<typename G::Element>;
  { G::scalar(std::int64_t{}) } -> std::same_as<typename G::Scalar>;
  { G::add(s, s) } -> std::same_as<typename G::Scalar>;
  { G::sub(s, s) } -> std::same_as<typename G::Scalar>;
  { G::mul_scalar(s, s) } -> std::same_as<typename G::Scalar>;
  { G::neg(s) } -> std::same_as<typename G::Scalar>;
  { G::random_scalar(rng) } -> std::same_as<typename G::Scalar>;
  { G::reduce_wide(wide) } -> std::same_as<typename G::Scalar>;
  { G::encode(a) } -> std::same_as<std::array<std::uint8_t, G::kElementBytes>>;
  G::write(w, a);
  G::write_scalar(w, s);
  { G::read_element(r) } -> std::same_as<typename G::Element>;
  { G::read_scalar(r) } -> std::same_as<typename G::Scalar>;
  requires std::equality_comparable<typename G::Element>;
  requires std::equality_comparable<typename G::Scalar>;
};

// ---------------------------------------------------------------------------

class SafePrime64 {
 public:
  struct Element {
    std::uint64_t value = 1;
    friend bool operator==(const Element&, const Element&) = default;
  };
  struct Scalar {
    std::uint64_t value = 0;
    friend bool operator==(const Scalar&, const Scalar&) = default;
  };

  static constexpr std::string_view kName = "safeprime64";
  static constexpr std::uint64_t kOrder = 2305843009213688669ULL;    // q, prime
  static constexpr std::uint64_t kModulus = 4611686018427377339ULL;  // p = 2q + 1, prime
  static constexpr std::size_t kElementBytes = 8;
  static constexpr std::size_t kScalarBytes = 8;
  static constexpr int kOrderBits = 61;

  static Element identity() { return {1}; }
  static Element generator() { return {4}; }  // a square, hence of order q

  static Element blinding_generator() {
    static const Element h = [] {
      ensure_sodium();
      static constexpr std::string_view kLabel = "dcp/safeprime64/h";
      std::array<std::uint8_t, crypto_hash_sha512_BYTES> digest{};
      crypto_hash_sha512(digest.data(), reinterpret_cast<const unsigned char*>(kLabel.data()),
                         kLabel.size());
      const std::uint64_t x = reduce(digest, kModulus);
      const std::uint64_t sq = mulmod(x, x, kModulus);
      if (sq <= 1) throw std::logic_error("degenerate blinding generator");
      return Element{sq};
    }();
    return h;
  }

  static Element mul(Element a, Element b) { return {mulmod(a.value, b.value, kModulus)}; }
  static Element div(Element a, Element b) {
    return mul(a, {powmod(b.value, kModulus - 2, kModulus)});
  }
  static Element pow(Element a, Scalar s) { return {powmod(a.value, s.value, kModulus)}; }
  static Element pow_g(Scalar s) { return pow(generator(), s); }

  static Scalar scalar(std::int64_t v) {
    const std::uint64_t mag =
        v < 0 ? 0 - static_cast<std::uint64_t>(v) : static_cast<std::uint64_t>(v);
    const Scalar r{mag % kOrder};
    return v < 0 ? neg(r) : r;
  }
  static Scalar add(Scalar a, Scalar b) { return {(a.value + b.value) % kOrder}; }
  static Scalar sub(Scalar a, Scalar b) { return {(a.value + kOrder - b.value) % kOrder}; }
  static Scalar mul_scalar(Scalar a, Scalar b) { return {mulmod(a.value, b.value, kOrder)}; }
  static Scalar neg(Scalar a) { return {a.value == 0 ? 0 : kOrder - a.value}; }

  // Big-endian integer reduced modulo q.
  static Scalar reduce_wide(ByteView bytes) { return {reduce(bytes, kOrder)}; }

  static Scalar random_scalar(Rng& rng) {
    std::array<std::uint8_t, 64> wide{};
    rng.fill(wide);
    return reduce_wide(wide);
  }

  static std::array<std::uint8_t, kElementBytes> encode(Element a) {
    std::array<std::uint8_t, 8> out{};
    for (int i = 0; i < 8; ++i) out[i] = static_cast<std::uint8_t>(a.value >> (56 - 8 * i));
    return out;
  }
  static void write(ByteWriter& w, Element a) { w.u64(a.value); }
  static void write_scalar(ByteWriter& w, Scalar s) { w.u64(s.value); }

  static Element read_element(ByteReader& r) {
    const std::uint64_t x = r.u64();
    if (x == 0 || x >= kModulus || powmod(x, kOrder, kModulus) != 1) {
      throw DecodeError(DecodeError::Kind::kMalformed, "not a subgroup element");
    }
    return {x};
  }

  static Scalar read_scalar(ByteReader& r) {
    const std::uint64_t x = r.u64();
    if (x >= kOrder) throw DecodeError(DecodeError::Kind::kMalformed, "non-canonical scalar");
    return {x};
  }

 private:
  static std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
    return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
  }

  static std::uint64_t powmod(std::uint64_t base, std::uint64_t e, std::uint64_t m) {
    std::uint64_t result = 1;
    base %= m;
    while (e != 0) {
      if (e & 1) result = mulmod(result, base, m);
      base = mulmod(base, base, m);
      e >>= 1;
    }
    return result;
  }

  static std::uint64_t reduce(ByteView bytes, std::uint64_t m) {
    std::uint64_t x = 0;
    for (std::uint8_t b : bytes) {
      x = static_cast<std::uint64_t>((static_cast<unsigned __int128>(x) * 256 + b) % m);
    }
    return x;
  }
};

// ---------------------------------------------------------------------------

class Ristretto255 {
 public:
  // Canonical 32-byte encoding; the all-zero string is the identity.
  struct Element {
    std::array<std::uint8_t, crypto_core_ristretto255_BYTES> bytes{};
    friend bool operator==(const Element&, const Element&) = default;
  };
  // Little-endian, fully reduced modulo the group order.
  struct Scalar {
    std::array<std::uint8_t, crypto_core_ristretto255_SCALARBYTES> bytes{};
    friend bool operator==(const Scalar&, const Scalar&) = default;
  };

  static constexpr std::string_view kName = "ristretto255";
  static constexpr std::size_t kElementBytes = crypto_core_ristretto255_BYTES;
  static constexpr std::size_t kScalarBytes = crypto_core_ristretto255_SCALARBYTES;
  static constexpr int kOrderBits = 253;

  static Element identity() { return Element{}; }

  static const Element& generator() {
    static const Element g = [] {
      ensure_sodium();
      return pow_g(scalar(1));
    }();
    return g;
  }

  static const Element& blinding_generator() {
    static const Element h = [] {
      ensure_sodium();
      static constexpr std::string_view kLabel = "dcp/ristretto255/h";
      std::array<std::uint8_t, crypto_core_ristretto255_HASHBYTES> digest{};
      crypto_hash_sha512(digest.data(), reinterpret_cast<const unsigned char*>(kLabel.data()),
                         kLabel.size());
      Element out;
      crypto_core_ristretto255_from_hash(out.bytes.data(), digest.data());
      return out;
    }();
    return h;
  }

  static Element mul(const Element& a, const Element& b) {
    Element out;
    if (crypto_core_ristretto255_add(out.bytes.data(), a.bytes.data(), b.bytes.data()) != 0) {
      throw std::invalid_argument("ristretto255: invalid element");
    }
    return out;
  }

  static Element div(const Element& a, const Element& b) {
    Element out;
    if (crypto_core_ristretto255_sub(out.bytes.data(), a.bytes.data(), b.bytes.data()) != 0) {
      throw std::invalid_argument("ristretto255: invalid element");
    }
    return out;
  }

  // libsodium reports an identity result as failure but still writes the
  // all-zero identity encoding, which is the correct answer here.
  static Element pow(const Element& a, const Scalar& s) {
    Element out;
    [[maybe_unused]] const int rc =
        crypto_scalarmult_ristretto255(out.bytes.data(), s.bytes.data(), a.bytes.data());
    return out;
  }

  static Element pow_g(const Scalar& s) {
    Element out;
    [[maybe_unused]] const int rc = crypto_scalarmult_ristretto255_base(out.bytes.data(), s.bytes.data());
    return out;
  }

  static Scalar scalar(std::int64_t v) {
    const std::uint64_t mag =
        v < 0 ? 0 - static_cast<std::uint64_t>(v) : static_cast<std::uint64_t>(v);
    Scalar s;
    for (int i = 0; i < 8; ++i) s.bytes[i] = static_cast<std::uint8_t>(mag >> (8 * i));
    return v < 0 ? neg(s) : s;
  }

  static Scalar add(const Scalar& a, const Scalar& b) {
    Scalar out;
    crypto_core_ristretto255_scalar_add(out.bytes.data(), a.bytes.data(), b.bytes.data());
    return out;
  }

  static Scalar sub(const Scalar& a, const Scalar& b) {
    Scalar out;
    crypto_core_ristretto255_scalar_sub(out.bytes.data(), a.bytes.data(), b.bytes.data());
    return out;
  }

  static Scalar mul_scalar(const Scalar& a, const Scalar& b) {
    Scalar out;
    crypto_core_ristretto255_scalar_mul(out.bytes.data(), a.bytes.data(), b.bytes.data());
    return out;
  }

  static Scalar neg(const Scalar& a) {
    Scalar out;
    crypto_core_ristretto255_scalar_negate(out.bytes.data(), a.bytes.data());
    return out;
  }

  // Interprets up to 64 bytes as a big-endian integer and reduces it.
  static Scalar reduce_wide(ByteView bytes) {
    if (bytes.size() > crypto_core_ristretto255_NONREDUCEDSCALARBYTES) {
      throw std::invalid_argument("reduce_wide: at most 64 bytes");
    }
    std::array<std::uint8_t, crypto_core_ristretto255_NONREDUCEDSCALARBYTES> le{};
    for (std::size_t i = 0; i < bytes.size(); ++i) le[i] = bytes[bytes.size() - 1 - i];
    Scalar out;
    crypto_core_ristretto255_scalar_reduce(out.bytes.data(), le.data());
    return out;
  }

  static Scalar random_scalar(Rng& rng) {
    std::array<std::uint8_t, 64> wide{};
    rng.fill(wide);
    return reduce_wide(wide);
  }

  static std::array<std::uint8_t, kElementBytes> encode(const Element& a) { return a.bytes; }
  static void write(ByteWriter& w, const Element& a) { w.raw(a.bytes); }
  static void write_scalar(ByteWriter& w, const Scalar& s) { w.raw(s.bytes); }

  static Element read_element(ByteReader& r) {
    Element e{r.fixed<kElementBytes>()};
    const bool is_identity = sodium_is_zero(e.bytes.data(), e.bytes.size()) == 1;
    if (!is_identity && crypto_core_ristretto255_is_valid_point(e.bytes.data()) != 1) {
      throw DecodeError(DecodeError::Kind::kMalformed, "invalid ristretto255 encoding");
    }
    return e;
  }

  static Scalar read_scalar(ByteReader& r) {
    Scalar s{r.fixed<kScalarBytes>()};
    std::array<std::uint8_t, crypto_core_ristretto255_NONREDUCEDSCALARBYTES> wide{};
    std::memcpy(wide.data(), s.bytes.data(), s.bytes.size());
    Scalar reduced;
    crypto_core_ristretto255_scalar_reduce(reduced.bytes.data(), wide.data());
    if (reduced != s) throw DecodeError(DecodeError::Kind::kMalformed, "non-canonical scalar");
    return s;
  }
};

static_assert(PrimeOrderGroup<SafePrime64>);
static_assert(PrimeOrderGroup<Ristretto255>);

// Calls f.template operator()<G>() with the group selected by `profile`.
template <class F>
decltype(auto) with_group(GroupProfile profile, F&& f) {
  if (profile == GroupProfile::kTest) return f.template operator()<SafePrime64>();
  return f.template operator()<Ristretto255>();
}

}  // namespace dcp
