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

#include "fixtures.hpp"
#include "oracles.hpp"
#include "witness_oracle.hpp"

namespace osys::uhf {
namespace {

GraphTowerSpec constant_tower(std::size_t n1, std::vector<std::size_t> period, FiniteGraph g,
                              GraphRule tail) {
  GraphTowerSpec s;
  s.uhf = UhfSpec{n1, {}, std::move(period)};
  s.prefix = {GraphRule::explicit_graph(std::move(g))};
  s.period = {tail};
  return s;
}

IndexMap random_bijection(Sampler& rng, std::size_t a, std::size_t b) {
  IndexMap f = canonical_index_map(a, b);
  for (std::size_t i = b; i > 1; --i) std::swap(f.image[i - 1], f.image[rng.index(i)]);
  return f;
}

TEST(IndexMap, CanonicalAndCompose) {
  const IndexMap f = canonical_index_map(2, 4);
  EXPECT_EQ(f.multiplicity(), 2u);
  EXPECT_EQ(f(1, 0), 2u);
  EXPECT_TRUE(equals_canonical(f));
  EXPECT_THROW(canonical_index_map(2, 5), SpecError);

  const IndexMap g{4, 8, {4, 5, 6, 7, 0, 1, 2, 3}};
  EXPECT_TRUE(equals_canonical(g));  // copies exchanged: same matrix map
  const IndexMap h = compose(g, f);
  EXPECT_EQ(h.image, (std::vector<std::size_t>{4, 5, 6, 7, 0, 1, 2, 3}));
  EXPECT_TRUE(equals_canonical(h));
  EXPECT_THROW(compose(f, g), SpecError);
}

TEST(IndexMap, RejectsNonTranslates) {
  EXPECT_FALSE(equals_canonical(IndexMap{2, 4, {1, 0, 2, 3}}));
  EXPECT_FALSE(equals_canonical(IndexMap{2, 4, {1, 2, 3, 0}}));
  EXPECT_FALSE(well_formed(IndexMap{2, 4, {0, 0, 2, 3}}));
  EXPECT_FALSE(well_formed(IndexMap{2, 4, {0, 1, 2, 4}}));
  EXPECT_FALSE(well_formed(IndexMap{2, 4, {0, 1, 2}}));
}

TEST(IndexMap, Preserves) {
  const FiniteGraph path = FiniteGraph::from_edges(2, {{0, 1}});
  const FiniteGraph four = FiniteGraph::from_edges(4, {{0, 1}, {2, 3}});
  EXPECT_TRUE(preserves(canonical_index_map(2, 4), path, four));
  EXPECT_FALSE(preserves(IndexMap{2, 4, {0, 2, 1, 3}}, path, four));
  EXPECT_TRUE(preserves(IndexMap{2, 4, {0, 2, 1, 3}}, FiniteGraph(2), four));
}

// Property: compose agrees with composing the unit maps as integer matrices.
TEST(IndexMapProperty, ComposeMatchesMatrixComposition) {
  Sampler rng(61);
  for (int t = 0; t < 200; ++t) {
    const std::size_t a = 1 + rng.index(3);
    const std::size_t b = a * (1 + rng.index(3));
    const std::size_t c = b * (1 + rng.index(3));
    const IndexMap f = random_bijection(rng, a, b);
    const IndexMap g = random_bijection(rng, b, c);
    const IndexMap h = compose(g, f);
    ASSERT_TRUE(well_formed(h));
    for (std::size_t i = 0; i < a; ++i) {
      for (std::size_t j = 0; j < a; ++j) {
        const auto e = oracle::sparse_unit(static_cast<int>(a), static_cast<int>(i),
                                           static_cast<int>(j));
        const auto via = oracle::apply_map(
            g.image, static_cast<int>(b), static_cast<int>(c),
            oracle::apply_map(f.image, static_cast<int>(a), static_cast<int>(b), e));
        EXPECT_TRUE(oracle::same(via, oracle::apply_map(h.image, static_cast<int>(a),
                                                        static_cast<int>(c), e)));
      }
    }
    const bool canon = equals_canonical(h);
    const oracle::DenseMap dh{static_cast<int>(a), static_cast<int>(c), h.image};
    const oracle::DenseMap id{static_cast<int>(c), static_cast<int>(c), canonical_index_map(c, c).image};
    EXPECT_EQ(canon, oracle::composes_to_embedding(dh, id));
  }
}

TEST(IsoSearch, FindsWitnessForTelescopedTower) {
  const GraphTowerSpec a = constant_tower(2, {2}, FiniteGraph::complete(2), GraphRule::lift());
  const GraphTowerSpec b = telescope(a, 2);
  const IsoResult r = iso_search(a, b, 3);
  ASSERT_EQ(r.verdict, IsoVerdict::kFound) << r.detail;
  ASSERT_TRUE(r.witness);
  EXPECT_EQ(r.witness->depth(), 3u);
  const GraphTower ta(a), tb(b);
  EXPECT_TRUE(replay_witness(ta, tb, *r.witness).ok);
  EXPECT_TRUE(oracle::witness_ok(ta, tb, *r.witness));
}

TEST(IsoSearch, RefutesDiagonalAgainstComplete) {
  const GraphTowerSpec diag = constant_tower(2, {2}, FiniteGraph(2), GraphRule::empty());
  const GraphTowerSpec full = constant_tower(2, {2}, FiniteGraph::complete(2), GraphRule::complete());
  const IsoResult r = iso_search(diag, full, 4);
  EXPECT_EQ(r.verdict, IsoVerdict::kRefuted);
  EXPECT_EQ(r.invariant, "envelope-block-sup");
  EXPECT_FALSE(r.witness);
}

TEST(IsoSearch, RefutesByDivisibility) {
  const GraphTowerSpec two = constant_tower(1, {2}, FiniteGraph(1), GraphRule::empty());
  const GraphTowerSpec three = constant_tower(1, {3}, FiniteGraph(1), GraphRule::empty());
  const IsoResult r = iso_search(two, three, 2);
  EXPECT_EQ(r.verdict, IsoVerdict::kRefuted);
  EXPECT_EQ(r.invariant, "glimm");
}

TEST(IsoSearch, BudgetExhaustionIsUnknown) {
  const GraphTowerSpec a = constant_tower(2, {2}, FiniteGraph::complete(2), GraphRule::lift());
  IsoOptions opts;
  opts.node_budget = 1;
  const IsoResult r = iso_search(a, telescope(a, 2), 3, opts);
  EXPECT_EQ(r.verdict, IsoVerdict::kUnknown);
  EXPECT_THROW(iso_search(a, a, 0), SpecError);
}

TEST(Replay, NamesTheBrokenPiece) {
  const GraphTowerSpec a = constant_tower(2, {2}, FiniteGraph::complete(2), GraphRule::lift());
  const IsoResult r = iso_search(a, a, 2);
  ASSERT_EQ(r.verdict, IsoVerdict::kFound);
  const GraphTower t(a);
  IsoWitness w = *r.witness;
  EXPECT_TRUE(replay_witness(t, t, w).ok);
  w.a_levels[0] = 2;
  EXPECT_EQ(replay_witness(t, t, w).reason, "the first A level must be 1");
  w = *r.witness;
  w.psi.pop_back();
  EXPECT_FALSE(replay_witness(t, t, w).ok);
  w = *r.witness;
  std::swap(w.phi[0].image[0], w.phi[0].image[1]);  // flips copy 0 inside its block
  const ReplayResult bad = replay_witness(t, t, w);
  EXPECT_FALSE(bad.ok);
  EXPECT_NE(bad.reason.find("differs from the connecting map"), std::string::npos);
}

// Properties: found witnesses pass the dense oracle, and on corrupted
// witnesses replay and the oracle agree.
TEST(IsoSearchProperty, WitnessesAgreeWithDenseOracle) {
  Sampler rng(62);
  int found = 0;
  for (int t = 0; t < 12; ++t) {
    const GraphTowerSpec a = fixture::random_graph_tower(rng);
    const GraphTowerSpec b = telescope(a, 1 + rng.index(2));
    const IsoResult r = iso_search(a, b, 2);
    if (r.verdict != IsoVerdict::kFound) continue;
    ++found;
    const GraphTower ta(a), tb(b);
    ASSERT_TRUE(replay_witness(ta, tb, *r.witness).ok);
    ASSERT_TRUE(oracle::witness_ok(ta, tb, *r.witness));
    for (int p = 0; p < 40; ++p) {
      const IsoWitness w = fixture::perturb(*r.witness, rng);
      EXPECT_EQ(replay_witness(ta, tb, w).ok, oracle::witness_ok(ta, tb, w));
    }
  }
  EXPECT_GE(found, 10);
}

}  // namespace
}  // namespace osys::uhf
