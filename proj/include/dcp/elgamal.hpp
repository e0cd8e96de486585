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

// Exponent-encoded ElGamal: the public half.
//
// Enc(v) = (g^r, pk^r * g^v). Ciphertexts multiply to add plaintexts and a
// ciphertext raised to k multiplies its plaintext by k, which is all the
// dashcam needs to turn Enc(ET) and a plaintext probe AT into Enc(<ET, AT>).
// Nothing in this header can decrypt; see elgamal_secret.hpp.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "dcp/bytes.hpp"
#include "dcp/embedding.hpp"
#include "dcp/group.hpp"
#include "dcp/rng.hpp"

namespace dcp {

class PlaintextRangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

template <PrimeOrderGroup G>
struct PublicKey {
  typename G::Element element;

  friend bool operator==(const PublicKey&, const PublicKey&) = default;
};

template <PrimeOrderGroup G>
struct Ciphertext {
  typename G::Element c1;  // g^r
  typename G::Element c2;  // pk^r * g^v

  friend bool operator==(const Ciphertext&, const Ciphertext&) = default;

  static constexpr std::size_t kBytes = 2 * G::kElementBytes;

  void write(ByteWriter& w) const {
    G::write(w, c1);
    G::write(w, c2);
  }

  static Ciphertext read(ByteReader& r) {
    auto a = G::read_element(r);
    auto b = G::read_element(r);
    return {a, b};
  }

  Bytes serialize() const {
    ByteWriter w;
    write(w);
    return std::move(w).take();
  }
};

// Per-coordinate encryption of an enrollment template.
template <PrimeOrderGroup G>
struct EncryptedTemplate {
  std::vector<Ciphertext<G>> coords;
  Modality modality = Modality::kFace;
  std::uint64_t owner = 0;  // device id; not part of the canonical encoding

  std::size_t dim() const { return coords.size(); }

  // d (u32) | modality (u8) | d ciphertexts
  void write(ByteWriter& w) const {
    w.u32(static_cast<std::uint32_t>(coords.size()));
    w.u8(static_cast<std::uint8_t>(modality));
    for (const auto& c : coords) c.write(w);
  }

  static EncryptedTemplate read(ByteReader& r) {
    EncryptedTemplate out;
    const std::uint32_t d = r.u32();
    out.modality = modality_from_byte(r.u8());
    if (d < 2 || static_cast<std::size_t>(d) * Ciphertext<G>::kBytes > r.remaining()) {
      throw DecodeError(DecodeError::Kind::kBadLength, "encrypted template length mismatch");
    }
    out.coords.reserve(d);
    for (std::uint32_t i = 0; i < d; ++i) out.coords.push_back(Ciphertext<G>::read(r));
    return out;
  }

  Bytes serialize() const {
    ByteWriter w;
    write(w);
    return std::move(w).take();
  }

  friend bool operator==(const EncryptedTemplate& a, const EncryptedTemplate& b) {
    return a.coords == b.coords && a.modality == b.modality;
  }
};

template <PrimeOrderGroup G>
Ciphertext<G> encrypt_with_randomness(const PublicKey<G>& pk, std::int64_t v,
                                      const typename G::Scalar& r) {
  return {G::pow_g(r), G::mul(G::pow(pk.element, r), G::pow_g(G::scalar(v)))};
}

template <PrimeOrderGroup G>
Ciphertext<G> encrypt(const PublicKey<G>& pk, std::int64_t v, std::int64_t bound, Rng& rng) {
  if (v > bound || v < -bound) {
    throw PlaintextRangeError("plaintext " + std::to_string(v) + " outside [-" +
                              std::to_string(bound) + ", " + std::to_string(bound) + "]");
  }
  return encrypt_with_randomness(pk, v, G::random_scalar(rng));
}

template <PrimeOrderGroup G>
Ciphertext<G> add(const Ciphertext<G>& a, const Ciphertext<G>& b) {
  return {G::mul(a.c1, b.c1), G::mul(a.c2, b.c2)};
}

template <PrimeOrderGroup G>
Ciphertext<G> scalar_mul(const Ciphertext<G>& a, std::int64_t k) {
  const auto s = G::scalar(k);
  return {G::pow(a.c1, s), G::pow(a.c2, s)};
}

// Fresh randomness, same plaintext.
template <PrimeOrderGroup G>
Ciphertext<G> rerandomize(const PublicKey<G>& pk, const Ciphertext<G>& c, Rng& rng) {
  return add(c, encrypt_with_randomness(pk, 0, G::random_scalar(rng)));
}

template <PrimeOrderGroup G>
EncryptedTemplate<G> encrypt_template(const PublicKey<G>& pk, const QuantizedTemplate& t,
                                      std::uint64_t owner, Rng& rng) {
  EncryptedTemplate<G> out;
  out.modality = t.modality();
  out.owner = owner;
  out.coords.reserve(t.dim());
  const std::int64_t bound = t.scale();
  for (std::int32_t v : t.values()) out.coords.push_back(encrypt(pk, v, bound, rng));
  return out;
}

// Enc(sum_j ET_j * AT_j) from Enc(ET) and the plaintext probe AT.
template <PrimeOrderGroup G>
Ciphertext<G> encrypted_inner_product(const EncryptedTemplate<G>& et, const QuantizedTemplate& at) {
  if (et.dim() != at.dim()) throw ShapeError("encrypted inner product: dimension mismatch");
  if (et.modality != at.modality()) throw ShapeError("encrypted inner product: modality mismatch");
  Ciphertext<G> acc{G::identity(), G::identity()};
  for (std::size_t j = 0; j < et.dim(); ++j) {
    const std::int32_t k = at.values()[j];
    if (k == 0) continue;
    acc = add(acc, scalar_mul(et.coords[j], k));
  }
  return acc;
}

// Serialized encrypted template size over serialized plaintext template size.
template <PrimeOrderGroup G>
double ciphertext_expansion(const EncryptedTemplate<G>& et, std::int32_t scale) {
  const double enc = static_cast<double>(et.serialize().size());
  const std::size_t width = scale <= 127 ? 1 : 2;
  const double plain = static_cast<double>(4 + 1 + 2 + et.dim() * width);
  return enc / plain;
}

}  // namespace dcp
