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


// Replays an iso-search witness with the dense integer oracle. Only the graph
// data and dimensions are read from the library objects.

#pragma once

#include "oracles.hpp"
#include "osys/uhf/iso_search.hpp"

namespace oracle {

inline IntMatrix adjacency_of(const osys::uhf::FiniteGraph& g) {
  const int n = static_cast<int>(g.size());
  IntMatrix m = IntMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) m(i, j) = i != j && g.adjacent(i, j) ? 1 : 0;
  }
  return m;
}

inline bool witness_ok(const osys::uhf::GraphTower& a, const osys::uhf::GraphTower& b,
                       const osys::uhf::IsoWitness& w) {
  const std::size_t depth = w.phi.size();
  if (depth == 0 || w.psi.size() != depth || w.b_levels.size() != depth ||
      w.a_levels.size() != depth + 1 || w.a_levels[0] != 1 || w.b_levels[0] < 1) {
    return false;
  }
  for (std::size_t k = 1; k <= depth; ++k) {
    if (w.a_levels[k] <= w.a_levels[k - 1]) return false;
    if (k < depth && w.b_levels[k] <= w.b_levels[k - 1]) return false;
  }
  auto as_dense = [](const osys::uhf::IndexMap& f) {
    return DenseMap{static_cast<int>(f.source_dim), static_cast<int>(f.target_dim), f.image};
  };
  std::vector<DenseMap> phi, psi;
  for (std::size_t k = 0; k < depth; ++k) {
    const std::size_t am = w.a_levels[k], bn = w.b_levels[k], am2 = w.a_levels[k + 1];
    if (w.phi[k].source_dim != a.dim(am) || w.phi[k].target_dim != b.dim(bn)) return false;
    if (w.psi[k].source_dim != b.dim(bn) || w.psi[k].target_dim != a.dim(am2)) return false;
    phi.push_back(as_dense(w.phi[k]));
    psi.push_back(as_dense(w.psi[k]));
    if (!dense_map_ok(phi[k], adjacency_of(*a.graph(am)), adjacency_of(*b.graph(bn)))) {
      return false;
    }
    if (!dense_map_ok(psi[k], adjacency_of(*b.graph(bn)), adjacency_of(*a.graph(am2)))) {
      return false;
    }
  }
  for (std::size_t k = 0; k < depth; ++k) {
    if (!composes_to_embedding(phi[k], psi[k])) return false;
    if (k + 1 < depth && !composes_to_embedding(psi[k], phi[k + 1])) return false;
  }
  return true;
}

}  // namespace oracle
