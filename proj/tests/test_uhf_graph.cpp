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
#include "osys/uhf/graph_system.hpp"
#include "osys/uhf/relation.hpp"
#include "osys/uhf/spec.hpp"

namespace osys::uhf {
namespace {

FiniteGraph edges(std::size_t n, std::vector<Edge> e) { return FiniteGraph::from_edges(n, e); }

FiniteGraph random_graph(Sampler& rng, std::size_t n, double p) {
  FiniteGraph g(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (rng.uniform() < p) g.add_edge(i, j);
    }
  }
  return g;
}

LevelRelation random_relation(Sampler& rng, std::size_t n, double p) {
  return relation_of_system(random_graph(rng, n, p));
}

TEST(CanonicalEmbed, Examples) {
  const Matrix y = canonical_embed(matrix_unit(2, 0, 1), 2);
  EXPECT_TRUE(approx_equal(y, matrix_unit(4, 0, 1) + matrix_unit(4, 2, 3), Tolerance(0.0)));
  EXPECT_TRUE(approx_equal(canonical_embed(identity(3), 4), identity(12), Tolerance(0.0)));
  EXPECT_TRUE(approx_equal(canonical_embed(diagonal_matrix({1.0, 2.0}), 3),
                           diagonal_matrix({1.0, 2.0, 1.0, 2.0, 1.0, 2.0}), Tolerance(0.0)));
  EXPECT_THROW(canonical_embed(Matrix::Zero(2, 3), 2), std::invalid_argument);
}

// Property: the embedding is a unital *-homomorphism.
TEST(CanonicalEmbedProperty, StarHomomorphism) {
  Sampler rng(41);
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = 1 + rng.index(4);
    const std::size_t l = 1 + rng.index(3);
    const Matrix a = rng.gaussian(n, n);
    const Matrix b = rng.gaussian(n, n);
    EXPECT_LT(max_abs(canonical_embed(Matrix(a * b), l) -
                      canonical_embed(a, l) * canonical_embed(b, l)),
              1e-12);
    EXPECT_TRUE(approx_equal(canonical_embed(Matrix(a.adjoint()), l),
                             canonical_embed(a, l).adjoint(), Tolerance(0.0)));
  }
}

TEST(GraphSystem, Dimensions) {
  EXPECT_EQ(graph_system(FiniteGraph(3)).dim(), 3u);
  EXPECT_TRUE(graph_system(FiniteGraph(3)).is_diagonal());
  EXPECT_EQ(graph_system(edges(2, {{0, 1}})).dim(), 4u);
  EXPECT_TRUE(graph_system(edges(2, {{0, 1}})).is_full());
  EXPECT_EQ(graph_system(edges(3, {{0, 1}})).dim(), 5u);
}

TEST(FiniteGraph, RejectsLoopsAndAsymmetry) {
  BitRelation loop(2);
  loop.set(0, 0);
  EXPECT_THROW(FiniteGraph::from_adjacency(loop), std::invalid_argument);
  BitRelation arc(2);
  arc.set(0, 1);
  EXPECT_THROW(FiniteGraph::from_adjacency(arc), std::invalid_argument);
  EXPECT_THROW(FiniteGraph(2).add_edge(1, 1), std::invalid_argument);
}

TEST(Compatibility, Examples) {
  const FiniteGraph g = edges(2, {{0, 1}});
  EXPECT_FALSE(graph_compatible(g, edges(4, {{0, 1}, {2, 3}}), 2).has_value());
  const auto v = graph_compatible(g, edges(4, {{0, 1}}), 2);
  ASSERT_TRUE(v.has_value());
  EXPECT_EQ(v->i, 0u);
  EXPECT_EQ(v->j, 1u);
  EXPECT_EQ(v->r, 1u);
  EXPECT_FALSE(graph_compatible(FiniteGraph(2), edges(4, {{1, 2}}), 2).has_value());
}

TEST(Relations, Examples) {
  EXPECT_EQ(refine_relation(LevelRelation::diagonal(3), 2), LevelRelation::diagonal(6));
  const LevelRelation p = relation_of_system(edges(2, {{0, 1}}));
  EXPECT_EQ(refine_relation(p, 2), relation_of_system(edges(4, {{0, 1}, {2, 3}})));
  EXPECT_EQ(refine_relation(refine_relation(p, 1), 1), p);
  EXPECT_EQ(relation_of_system(FiniteGraph(3)), LevelRelation::diagonal(3));
  EXPECT_EQ(relation_of_system(FiniteGraph::complete(3)).bits(), BitRelation::full(3));
  EXPECT_EQ(system_of_relation(LevelRelation::diagonal(4)), FiniteGraph(4));
  EXPECT_EQ(system_of_relation(p), edges(2, {{0, 1}}));
  BitRelation asym = BitRelation::diagonal(2);
  asym.set(0, 1);
  EXPECT_THROW(LevelRelation{asym}, std::invalid_argument);
}

TEST(Epsilon, Examples) {
  const LevelRelation path = relation_of_system(edges(3, {{0, 1}, {1, 2}}));
  const LevelRelation c = epsilon_closure(path);
  EXPECT_TRUE(c.test(0, 2));
  EXPECT_TRUE(c.test(2, 0));
  EXPECT_EQ(c.bits().count(), 9u);
  EXPECT_EQ(epsilon_closure(c), c);
  EXPECT_EQ(epsilon_closure(LevelRelation::diagonal(5)), LevelRelation::diagonal(5));
}

TEST(Envelope, Examples) {
  EXPECT_EQ(envelope_blocks(edges(3, {{0, 1}})), (std::vector<std::size_t>{2, 1}));
  EXPECT_EQ(envelope_blocks(FiniteGraph::complete(5)), (std::vector<std::size_t>{5}));
  EXPECT_EQ(envelope_blocks(FiniteGraph(3)), (std::vector<std::size_t>{1, 1, 1}));
}

// Property: epsilon is extensive, monotone and idempotent, and agrees with a
// Warshall closure.
TEST(EpsilonProperty, ClosureOperator) {
  Sampler rng(42);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 1 + rng.index(16);
    const LevelRelation p = random_relation(rng, n, 0.15);
    LevelRelation q = p;
    if (n > 1) {
      BitRelation bigger = p.bits();
      const std::size_t i = rng.index(n), j = rng.index(n);
      bigger.set(i, j);
      bigger.set(j, i);
      q = LevelRelation(bigger);
    }
    const LevelRelation cp = epsilon_closure(p);
    EXPECT_TRUE(p.bits().subset_of(cp.bits()));
    EXPECT_TRUE(cp.bits().subset_of(epsilon_closure(q).bits()));
    EXPECT_EQ(epsilon_closure(cp), cp);
    oracle::IntMatrix r(static_cast<int>(n), static_cast<int>(n));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) r(int(i), int(j)) = p.test(i, j) ? 1 : 0;
    }
    const oracle::IntMatrix w = oracle::warshall(r);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) ASSERT_EQ(cp.test(i, j), w(int(i), int(j)) == 1);
    }
  }
}

// Property: lifting along a compatible tower keeps each graph system inside
// the next one, entry by entry.
TEST(GraphTowerProperty, EmbeddingMapsSystemIntoNext) {
  Sampler rng(43);
  for (int t = 0; t < 20; ++t) {
    GraphTowerSpec spec;
    spec.uhf.n1 = 1 + rng.index(3);
    spec.uhf.period = {1 + rng.index(2), 2};
    spec.prefix = {GraphRule::explicit_graph(random_graph(rng, spec.uhf.n1, 0.5))};
    const GraphRule::Kind kinds[] = {GraphRule::Kind::kLift, GraphRule::Kind::kComplete,
                                     GraphRule::Kind::kCliques};
    const auto kind = kinds[rng.index(3)];
    spec.period = {kind == GraphRule::Kind::kCliques ? GraphRule::cliques(spec.uhf.n1 * 2)
                   : kind == GraphRule::Kind::kLift  ? GraphRule::lift()
                                                     : GraphRule::complete()};
    GraphTower tower(spec);
    for (std::size_t k = 1; k < 8 && tower.dim(k + 1) <= 64; ++k) {
      std::shared_ptr<const FiniteGraph> g, h;
      try {
        g = tower.graph(k);
        h = tower.graph(k + 1);
      } catch (const std::invalid_argument&) {
        break;  // clique sizes need not line up with the random base graph
      }
      const ConcreteOpSys source = graph_system(*g);
      const ConcreteOpSys target = graph_system(*h);
      for (const Matrix& b : source.basis()) {
        EXPECT_TRUE(target.contains(canonical_embed(b, tower.multiplicity(k)), Tolerance(0.0)));
      }
      const LevelRelation refined = refine_relation(relation_of_system(*g), tower.multiplicity(k));
      EXPECT_TRUE(refined.bits().subset_of(relation_of_system(*h).bits()));
    }
  }
}

TEST(GraphTower, CompatibilityViolationNamesTheLevel) {
  GraphTowerSpec spec;
  spec.uhf.n1 = 2;
  spec.uhf.period = {2};
  spec.prefix = {GraphRule::complete(), GraphRule::empty()};
  GraphTower tower(spec);
  try {
    tower.graph(2);
    FAIL() << "expected a compatibility error";
  } catch (const CompatibilityError& e) {
    EXPECT_EQ(e.level(), 1u);
  }
}

TEST(GraphTower, LevelOneCannotBeALift) {
  GraphTowerSpec spec;
  spec.uhf.period = {2};
  spec.prefix = {GraphRule::lift()};
  EXPECT_THROW(GraphTower{spec}, SpecError);
}

TEST(GraphTower, EnvelopeSup) {
  GraphTowerSpec diag;
  diag.uhf.n1 = 2;
  diag.uhf.period = {2};
  diag.prefix = {GraphRule::empty()};
  diag.period = {GraphRule::empty()};
  EXPECT_EQ(GraphTower(diag).envelope_sup(), std::optional<std::size_t>(1));
  GraphTowerSpec full = diag;
  full.prefix = {GraphRule::complete()};
  full.period = {GraphRule::complete()};
  EXPECT_EQ(GraphTower(full).envelope_sup(), std::nullopt);
  GraphTowerSpec lifted = diag;
  lifted.prefix = {GraphRule::complete()};
  lifted.period = {GraphRule::lift()};
  EXPECT_EQ(GraphTower(lifted).envelope_sup(), std::optional<std::size_t>(2));
}

TEST(Bimodule, Examples) {
  Sampler rng(44);
  const Matrix x = rng.gaussian(3, 3);
  const std::vector<Complex> ones(3, 1.0);
  EXPECT_TRUE(approx_equal(bimodule_action(ones, x, ones), x, Tolerance(0.0)));
  const std::vector<Complex> e1{1.0, 0.0}, e2{0.0, 1.0};
  EXPECT_TRUE(approx_equal(bimodule_action(e1, matrix_unit(2, 0, 1), e2), matrix_unit(2, 0, 1),
                           Tolerance(0.0)));
  EXPECT_THROW(bimodule_action(e1, x, ones), DimensionError);
}

// Property: diagonal bimodule actions keep graph systems invariant.
TEST(BimoduleProperty, GraphSystemsAreDiagonalBimodules) {
  Sampler rng(45);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 1 + rng.index(6);
    const ConcreteOpSys s = graph_system(random_graph(rng, n, 0.4));
    std::vector<Complex> d(n), f(n);
    for (std::size_t i = 0; i < n; ++i) {
      d[i] = Complex(rng.normal(), rng.normal());
      f[i] = Complex(rng.normal(), rng.normal());
    }
    Vector c(static_cast<Eigen::Index>(s.dim()));
    for (Eigen::Index k = 0; k < c.size(); ++k) c(k) = rng.normal();
    EXPECT_TRUE(s.contains(bimodule_action(d, s.realize(c), f), Tolerance(0.0)));
  }
}

}  // namespace
}  // namespace osys::uhf
