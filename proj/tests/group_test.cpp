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

#include "dcp/group.hpp"

#include <gtest/gtest.h>

namespace dcp {
namespace {

template <class G>
class GroupTest : public ::testing::Test {};

using Groups = ::testing::Types<SafePrime64, Ristretto255>;
TYPED_TEST_SUITE(GroupTest, Groups);

TYPED_TEST(GroupTest, GeneratorsAreDistinctAndNonIdentity) {
  using G = TypeParam;
  EXPECT_NE(G::generator(), G::identity());
  EXPECT_NE(G::blinding_generator(), G::identity());
  EXPECT_NE(G::generator(), G::blinding_generator());
}

TYPED_TEST(GroupTest, ExponentLaws) {
  using G = TypeParam;
  Rng rng(1);
  for (int i = 0; i < 20; ++i) {
    const auto a = G::random_scalar(rng);
    const auto b = G::random_scalar(rng);
    EXPECT_EQ(G::mul(G::pow_g(a), G::pow_g(b)), G::pow_g(G::add(a, b)));
    EXPECT_EQ(G::pow(G::pow_g(a), b), G::pow_g(G::mul_scalar(a, b)));
    EXPECT_EQ(G::div(G::pow_g(a), G::pow_g(b)), G::pow_g(G::sub(a, b)));
    EXPECT_EQ(G::mul(G::pow_g(a), G::pow_g(G::neg(a))), G::identity());
  }
}

TYPED_TEST(GroupTest, SmallScalars) {
  using G = TypeParam;
  EXPECT_EQ(G::pow_g(G::scalar(0)), G::identity());
  EXPECT_EQ(G::pow_g(G::scalar(1)), G::generator());
  EXPECT_EQ(G::add(G::scalar(-5), G::scalar(5)), G::scalar(0));
  EXPECT_EQ(G::mul(G::pow_g(G::scalar(-5)), G::pow_g(G::scalar(8))), G::pow_g(G::scalar(3)));
  EXPECT_EQ(G::mul(G::identity(), G::generator()), G::generator());
}

TYPED_TEST(GroupTest, EncodingRoundTripAndValidation) {
  using G = TypeParam;
  Rng rng(2);
  const auto e = G::pow_g(G::random_scalar(rng));
  const auto s = G::random_scalar(rng);
  ByteWriter w;
  G::write(w, e);
  G::write_scalar(w, s);
  G::write(w, G::identity());
  EXPECT_EQ(w.size(), 2 * G::kElementBytes + G::kScalarBytes);
  ByteReader r(w.bytes());
  EXPECT_EQ(G::read_element(r), e);
  EXPECT_EQ(G::read_scalar(r), s);
  EXPECT_EQ(G::read_element(r), G::identity());

  Bytes all_ff(G::kScalarBytes, 0xff);
  ByteReader bad(all_ff);
  EXPECT_THROW(G::read_scalar(bad), DecodeError);
}

TEST(SafePrime64Test, RejectsNonSubgroupElements) {
  // 2 is a non-residue modulo p (p = 3 mod 8), so it lies outside the order-q subgroup.
  ByteWriter w;
  w.u64(2);
  w.u64(0);
  w.u64(SafePrime64::kModulus);
  ByteReader r(w.bytes());
  EXPECT_THROW(SafePrime64::read_element(r), DecodeError);
  EXPECT_THROW(SafePrime64::read_element(r), DecodeError);
  EXPECT_THROW(SafePrime64::read_element(r), DecodeError);
}

TEST(Ristretto255Test, RejectsInvalidEncoding) {
  Bytes bad(32, 0xff);
  ByteReader r(bad);
  EXPECT_THROW(Ristretto255::read_element(r), DecodeError);
}

TEST(WithGroupTest, Dispatch) {
  auto name = [&]<class G>() { return std::string(G::kName); };
  EXPECT_EQ(with_group(GroupProfile::kTest, name), "safeprime64");
  EXPECT_EQ(with_group(GroupProfile::kSecure, name), "ristretto255");
}

TEST(RngTest, DeterministicAndDerived) {
  Rng a(42), b(42), c(43);
  EXPECT_EQ(a.next_u64(), b.next_u64());
  EXPECT_NE(Rng(42).next_u64(), c.next_u64());
  Rng parent(42);
  const auto child1 = parent.derive("x", 1).next_u64();
  parent.next_u64();
  EXPECT_EQ(parent.derive("x", 1).next_u64(), child1);
  EXPECT_NE(parent.derive("x", 2).next_u64(), child1);
  EXPECT_NE(parent.derive("y", 1).next_u64(), child1);
}

}  // namespace
}  // namespace dcp
