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

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dcp/bytes.hpp"
#include "dcp/rng.hpp"

namespace dcp {

enum class Modality : std::uint8_t { kFace = 0, kVoice = 1 };

inline const char* to_string(Modality m) { return m == Modality::kFace ? "face" : "voice"; }

inline Modality modality_from_string(const std::string& s) {
  if (s == "face") return Modality::kFace;
  if (s == "voice") return Modality::kVoice;
  throw std::invalid_argument("unknown modality '" + s + "'");
}

inline Modality modality_from_byte(std::uint8_t b) {
  if (b > 1) throw DecodeError(DecodeError::Kind::kMalformed, "modality byte out of range");
  return static_cast<Modality>(b);
}

class InvalidEmbedding : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Unit-norm real feature vector.
class Embedding {
 public:
  // Normalises `values` to unit L2 norm.
  Embedding(std::vector<double> values, Modality modality)
      : values_(std::move(values)), modality_(modality) {
    if (values_.size() < 2) throw InvalidEmbedding("embedding dimension must be >= 2");
    double norm2 = 0.0;
    for (double v : values_) {
      if (!std::isfinite(v)) throw InvalidEmbedding("embedding has a non-finite value");
      norm2 += v * v;
    }
    if (!(norm2 > 0.0) || !std::isfinite(norm2)) throw InvalidEmbedding("embedding has zero norm");
    const double inv = 1.0 / std::sqrt(norm2);
    for (double& v : values_) v *= inv;
  }

  std::span<const double> values() const { return values_; }
  std::size_t dim() const { return values_.size(); }
  Modality modality() const { return modality_; }

  friend bool operator==(const Embedding&, const Embedding&) = default;

 private:
  std::vector<double> values_;
  Modality modality_;
};

inline double cosine(const Embedding& a, const Embedding& b) {
  if (a.dim() != b.dim()) throw ShapeError("cosine: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) s += a.values()[i] * b.values()[i];
  return s;
}

// Fixed-point template with every element in [-Q, Q].
class QuantizedTemplate {
 public:
  QuantizedTemplate(std::vector<std::int32_t> values, Modality modality, std::int32_t scale)
      : values_(std::move(values)), modality_(modality), scale_(scale) {
    if (scale_ < 1 || scale_ > 32767) throw std::invalid_argument("quantization scale out of range");
    if (values_.size() < 2) throw ShapeError("template dimension must be >= 2");
    for (std::int32_t v : values_) {
      if (v < -scale_ || v > scale_) throw std::invalid_argument("template value outside [-Q, Q]");
    }
  }

  std::span<const std::int32_t> values() const { return values_; }
  std::size_t dim() const { return values_.size(); }
  Modality modality() const { return modality_; }
  std::int32_t scale() const { return scale_; }

  // d (u32) | modality (u8) | Q (u16) | values as int8 when Q <= 127, else int16.
  Bytes serialize() const {
    ByteWriter w;
    w.u32(static_cast<std::uint32_t>(values_.size()));
    w.u8(static_cast<std::uint8_t>(modality_));
    w.u16(static_cast<std::uint16_t>(scale_));
    for (std::int32_t v : values_) {
      if (scale_ <= 127) {
        w.u8(static_cast<std::uint8_t>(static_cast<std::int8_t>(v)));
      } else {
        w.u16(static_cast<std::uint16_t>(static_cast<std::int16_t>(v)));
      }
    }
    return std::move(w).take();
  }

  static QuantizedTemplate deserialize(ByteView bytes) {
    ByteReader r(bytes);
    const std::uint32_t d = r.u32();
    const Modality m = modality_from_byte(r.u8());
    const std::int32_t q = r.u16();
    if (q < 1 || q > 32767) throw DecodeError(DecodeError::Kind::kMalformed, "bad scale");
    const std::size_t width = q <= 127 ? 1 : 2;
    if (r.remaining() != static_cast<std::size_t>(d) * width) {
      throw DecodeError(DecodeError::Kind::kBadLength, "template length mismatch");
    }
    std::vector<std::int32_t> values(d);
    for (auto& v : values) {
      v = width == 1 ? static_cast<std::int8_t>(r.u8()) : static_cast<std::int16_t>(r.u16());
    }
    try {
      return QuantizedTemplate(std::move(values), m, q);
    } catch (const std::invalid_argument& e) {
      throw DecodeError(DecodeError::Kind::kMalformed, e.what());
    }
  }

  friend bool operator==(const QuantizedTemplate&, const QuantizedTemplate&) = default;

 private:
  std::vector<std::int32_t> values_;
  Modality modality_;
  std::int32_t scale_;
};

// round(v * Q) clamped to [-Q, Q]; `values` need not be unit norm.
inline QuantizedTemplate quantize(std::span<const double> values, Modality modality,
                                  std::int32_t scale) {
  if (scale < 1) throw std::invalid_argument("quantization scale must be >= 1");
  std::vector<std::int32_t> out;
  out.reserve(values.size());
  for (double v : values) {
    if (!std::isfinite(v)) throw InvalidEmbedding("cannot quantize a non-finite value");
    const double scaled = std::round(v * scale);
    out.push_back(static_cast<std::int32_t>(
        std::clamp(scaled, -static_cast<double>(scale), static_cast<double>(scale))));
  }
  return QuantizedTemplate(std::move(out), modality, scale);
}

inline QuantizedTemplate quantize(const Embedding& e, std::int32_t scale) {
  return quantize(e.values(), e.modality(), scale);
}

inline std::vector<double> dequantize(const QuantizedTemplate& t) {
  std::vector<double> out;
  out.reserve(t.dim());
  for (std::int32_t v : t.values()) out.push_back(static_cast<double>(v) / t.scale());
  return out;
}

// Exact integer inner product; |result| <= d * Q^2.
inline std::int64_t inner_product_int(const QuantizedTemplate& a, const QuantizedTemplate& b) {
  if (a.dim() != b.dim()) throw ShapeError("inner product: dimension mismatch");
  if (a.modality() != b.modality()) throw ShapeError("inner product: modality mismatch");
  std::int64_t s = 0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    s += static_cast<std::int64_t>(a.values()[i]) * b.values()[i];
  }
  return s;
}

inline double score_to_cosine(std::int64_t score, std::int32_t scale) {
  return static_cast<double>(score) / (static_cast<double>(scale) * scale);
}

// Valid because both templates came from unit-norm embeddings.
inline double score_to_squared_euclidean(std::int64_t score, std::int32_t scale) {
  return 2.0 - 2.0 * score_to_cosine(score, scale);
}

// Largest integer t with t <= cos * Q^2, so that (S > t) <=> (S > cos * Q^2).
inline std::int64_t cosine_to_threshold(double cos, std::int32_t scale) {
  return static_cast<std::int64_t>(std::floor(cos * static_cast<double>(scale) * scale));
}

inline std::int64_t score_bound(std::size_t dim, std::int32_t scale) {
  return static_cast<std::int64_t>(dim) * scale * scale;
}

// Synthetic enrolled subject. Observations are the mean plus isotropic
// Gaussian noise whose expected norm is `sigma`, re-normalised.
struct IdentityProfile {
  std::string subject;
  Embedding face;
  Embedding voice;
  double sigma = 0.0;

  const Embedding& mean(Modality m) const { return m == Modality::kFace ? face : voice; }
};

inline Embedding random_unit_embedding(std::size_t dim, Modality modality, Rng& rng) {
  std::vector<double> v(dim);
  for (double& x : v) x = rng.normal();
  return Embedding(std::move(v), modality);
}

inline Embedding sample_observation(const IdentityProfile& profile, Modality modality, Rng& rng) {
  if (profile.sigma < 0.0) throw std::invalid_argument("noise sigma must be >= 0");
  const Embedding& mean = profile.mean(modality);
  if (profile.sigma == 0.0) return mean;
  const double per_coord = profile.sigma / std::sqrt(static_cast<double>(mean.dim()));
  std::vector<double> v(mean.values().begin(), mean.values().end());
  for (double& x : v) x += per_coord * rng.normal();
  return Embedding(std::move(v), modality);
}

// Draws `count` profiles whose face means (and voice means) have pairwise
// cosine <= max_inter_cosine, by rejection.
inline std::vector<IdentityProfile> generate_profiles(std::size_t count, std::size_t dim,
                                                      double sigma, double max_inter_cosine,
                                                      Rng& rng) {
  auto draw_means = [&](Modality m) {
    std::vector<Embedding> means;
    int attempts = 0;
    while (means.size() < count) {
      if (++attempts > 100000) throw std::runtime_error("cannot satisfy inter-class separation");
      Embedding candidate = random_unit_embedding(dim, m, rng);
      const bool ok = std::all_of(means.begin(), means.end(), [&](const Embedding& e) {
        return cosine(e, candidate) <= max_inter_cosine;
      });
      if (ok) means.push_back(std::move(candidate));
    }
    return means;
  };
  std::vector<Embedding> faces = draw_means(Modality::kFace);
  std::vector<Embedding> voices = draw_means(Modality::kVoice);
  std::vector<IdentityProfile> out;
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(IdentityProfile{"subject-" + std::to_string(i), faces[i], voices[i], sigma});
  }
  return out;
}

inline nlohmann::json to_json(const Embedding& e) {
  return nlohmann::json{{"modality", to_string(e.modality())},
                        {"values", std::vector<double>(e.values().begin(), e.values().end())}};
}

inline Embedding embedding_from_json(const nlohmann::json& j) {
  return Embedding(j.at("values").get<std::vector<double>>(),
                   modality_from_string(j.at("modality").get<std::string>()));
}

}  // namespace dcp
