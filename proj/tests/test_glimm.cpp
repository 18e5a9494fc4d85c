// Copyright 2026 The osys Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <gtest/gtest.h>

#include "oracles.hpp"
#include "osys/random.hpp"
#include "osys/uhf/spec.hpp"

namespace osys::uhf {
namespace {

UhfSpec uhf(std::size_t n1, std::vector<std::size_t> prefix, std::vector<std::size_t> period) {
  return UhfSpec{n1, std::move(prefix), std::move(period)};
}

oracle::Stream stream_of(const UhfSpec& s) {
  return {s.n1, {s.prefix.begin(), s.prefix.end()}, {s.period.begin(), s.period.end()}};
}

UhfSpec random_spec(Sampler& rng) {
  static const std::size_t values[] = {1, 2, 3, 4, 5, 6};
  UhfSpec s;
  s.n1 = values[rng.index(6)];
  for (std::size_t k = rng.index(4); k > 0; --k) s.prefix.push_back(values[rng.index(6)]);
  for (std::size_t k = 1 + rng.index(3); k > 0; --k) s.period.push_back(values[rng.index(6)]);
  return s;
}

TEST(UhfSpec, DimensionsAndValidation) {
  const UhfSpec s = uhf(3, {2}, {2, 5});
  EXPECT_EQ(s.dim(1), 3u);
  EXPECT_EQ(s.dim(2), 6u);
  EXPECT_EQ(s.dim(3), 12u);
  EXPECT_EQ(s.dim(4), 60u);
  EXPECT_EQ(s.multiplicity(4), 2u);
  EXPECT_THROW(uhf(0, {}, {2}).validate(), SpecError);
  EXPECT_THROW(uhf(1, {}, {}).validate(), SpecError);
  EXPECT_THROW(uhf(1, {0}, {2}).validate(), SpecError);
  EXPECT_THROW(uhf(2, {}, {1u << 31}).dim(70), SpecError);
}

TEST(Supernatural, PrefixPrimesStayFinite) {
  const auto s = SupernaturalNumber::of(uhf(2, {3, 3}, {5}));
  EXPECT_EQ(s.exponent(2), SupernaturalNumber::Exponent(1));
  EXPECT_EQ(s.exponent(3), SupernaturalNumber::Exponent(2));
  EXPECT_EQ(s.exponent(5), std::nullopt);
  EXPECT_EQ(s.exponent(7), SupernaturalNumber::Exponent(0));
  EXPECT_EQ(s.to_string(), "2^1 * 3^2 * 5^inf");
  EXPECT_EQ(SupernaturalNumber::of(uhf(1, {}, {1})).to_string(), "1");
}

TEST(Glimm, WorkedExamples) {
  EXPECT_TRUE(glimm_equivalent(uhf(1, {}, {2}), uhf(1, {}, {4})).equivalent);
  const GlimmResult r = glimm_equivalent(uhf(1, {}, {2}), uhf(1, {}, {3}));
  EXPECT_FALSE(r.equivalent);
  EXPECT_EQ(r.prime, 2u);  // smallest separating prime; 3 separates too
  EXPECT_TRUE(r.left_exceeds);
  EXPECT_TRUE(glimm_equivalent(uhf(1, {}, {2, 3}), uhf(1, {}, {6})).equivalent);
  const GlimmResult f = glimm_equivalent(uhf(2, {}, {3}), uhf(4, {}, {3}));
  EXPECT_FALSE(f.equivalent);
  EXPECT_EQ(f.prime, 2u);
  EXPECT_FALSE(f.left_exceeds);
}

TEST(Glimm, SeparatingPrimeIsWhereDivisibilityFails) {
  // 3^inf on the right only: 3 divides some m_x but no n_w of the left.
  const GlimmResult r = glimm_equivalent(uhf(1, {}, {2}), uhf(1, {}, {6}));
  EXPECT_FALSE(r.equivalent);
  EXPECT_EQ(r.prime, 3u);
  EXPECT_FALSE(r.left_exceeds);
}

// Properties: Glimm equivalence is an equivalence relation, invariant under
// telescoping, and agrees with brute-force divisibility over a window.
TEST(GlimmProperty, EquivalenceRelationAndTelescoping) {
  Sampler rng(51);
  std::vector<UhfSpec> specs;
  for (int t = 0; t < 40; ++t) specs.push_back(random_spec(rng));
  for (int t = 0; t < 20; ++t) specs.push_back(telescope(specs[t], 1 + rng.index(3)));
  for (const auto& a : specs) {
    EXPECT_TRUE(glimm_equivalent(a, a).equivalent);
    for (std::size_t s = 1; s <= 4; ++s) {
      EXPECT_TRUE(glimm_equivalent(a, telescope(a, s)).equivalent);
    }
    for (const auto& b : specs) {
      const bool ab = glimm_equivalent(a, b).equivalent;
      EXPECT_EQ(ab, glimm_equivalent(b, a).equivalent);
      if (!ab) continue;
      for (const auto& c : specs) {
        if (glimm_equivalent(b, c).equivalent) EXPECT_TRUE(glimm_equivalent(a, c).equivalent);
      }
    }
  }
}

TEST(GlimmProperty, AgreesWithDivisibilityProber) {
  Sampler rng(52);
  for (int t = 0; t < 300; ++t) {
    const UhfSpec a = random_spec(rng);
    const UhfSpec b = t % 3 == 0 ? telescope(a, 1 + rng.index(3)) : random_spec(rng);
    EXPECT_EQ(glimm_equivalent(a, b).equivalent,
              oracle::divisibility_equivalent(stream_of(a), stream_of(b)))
        << SupernaturalNumber::of(a).to_string() << " vs " << SupernaturalNumber::of(b).to_string();
  }
}

TEST(Telescope, GroupsMultiplicities) {
  const UhfSpec t = telescope(uhf(1, {}, {2}), 2);
  EXPECT_EQ(t.period, (std::vector<std::size_t>{4}));
  const UhfSpec u = telescope(uhf(2, {3}, {2, 5}), 2);
  EXPECT_EQ(u.prefix, (std::vector<std::size_t>{6}));
  EXPECT_EQ(u.period, (std::vector<std::size_t>{10}));
  for (std::size_t k = 1; k <= 5; ++k) {
    EXPECT_EQ(u.dim(k), uhf(2, {3}, {2, 5}).dim(1 + 2 * (k - 1)));
  }
  EXPECT_THROW(telescope(uhf(1, {}, {2}), 0), SpecError);
}

TEST(Telescope, GraphTowersKeepTheirGraphs) {
  GraphTowerSpec spec;
  spec.uhf = uhf(2, {}, {2});
  spec.prefix = {GraphRule::explicit_graph(FiniteGraph::complete(2))};
  spec.period = {GraphRule::lift()};
  const GraphTowerSpec t = telescope(spec, 2);
  GraphTower a(spec), b(t);
  for (std::size_t k = 1; k <= 4; ++k) EXPECT_EQ(*b.graph(k), *a.graph(1 + 2 * (k - 1)));
}

}  // namespace
}  // namespace osys::uhf
