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


#pragma once

#include <utility>

#include "osys/random.hpp"
#include "osys/uhf/iso_search.hpp"

namespace fixture {

using namespace osys::uhf;

/// Small compatible graph tower: random level-1 graph, then all complete or
/// all lifted levels. Dimensions stay below 64 for the first five levels.
inline GraphTowerSpec random_graph_tower(osys::Sampler& rng) {
  static const std::vector<std::vector<std::size_t>> periods = {{2}, {3}, {2, 2}, {2, 1}};
  GraphTowerSpec s;
  s.uhf.n1 = 1 + rng.index(3);
  s.uhf.period = periods[rng.index(periods.size())];
  if (rng.index(3) == 0) s.uhf.prefix = {2};
  FiniteGraph g(s.uhf.n1);
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t j = i + 1; j < g.size(); ++j) {
      if (rng.index(2)) g.add_edge(i, j);
    }
  }
  s.prefix = {GraphRule::explicit_graph(g)};
  // Uniform tails only; telescoping cannot express mixed ones.
  s.period = {rng.index(2) ? GraphRule::lift() : GraphRule::complete()};
  return s;
}

/// One random corruption of a witness; some leave it valid.
inline IsoWitness perturb(IsoWitness w, osys::Sampler& rng) {
  auto pick_map = [&]() -> IndexMap& {
    const std::size_t k = rng.index(w.phi.size());
    return rng.index(2) ? w.phi[k] : w.psi[k];
  };
  switch (rng.index(7)) {
    case 0: {  // swap two image entries
      IndexMap& f = pick_map();
      std::swap(f.image[rng.index(f.image.size())], f.image[rng.index(f.image.size())]);
      break;
    }
    case 1: {  // overwrite one entry
      IndexMap& f = pick_map();
      f.image[rng.index(f.image.size())] = rng.index(f.target_dim + 1);
      break;
    }
    case 2: {  // move a level
      auto& levels = rng.index(2) ? w.a_levels : w.b_levels;
      std::size_t& v = levels[rng.index(levels.size())];
      v = rng.index(2) ? v + 1 : (v > 0 ? v - 1 : 0);
      break;
    }
    case 3: {  // random bijection
      IndexMap& f = pick_map();
      for (std::size_t i = f.image.size(); i > 1; --i) std::swap(f.image[i - 1], f.image[rng.index(i)]);
      break;
    }
    case 4:  // truncate
      if (rng.index(2)) {
        w.psi.pop_back();
      } else {
        w.a_levels.pop_back();
      }
      break;
    case 5: {  // exchange two whole copies
      IndexMap& f = pick_map();
      const std::size_t l = f.multiplicity();
      const std::size_t r1 = rng.index(l), r2 = rng.index(l);
      for (std::size_t i = 0; i < f.source_dim; ++i) {
        std::swap(f.image[r1 * f.source_dim + i], f.image[r2 * f.source_dim + i]);
      }
      break;
    }
    default:
      break;
  }
  return w;
}

}  // namespace fixture
