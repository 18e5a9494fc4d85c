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

#include <memory>
#include <vector>

#include "osys/indlimit.hpp"
#include "osys/opsys.hpp"
#include "osys/uhf/relation.hpp"
#include "osys/uhf/spec.hpp"

namespace osys::uhf {

/// span{e_{i,j} : (i,j) in E ∪ diagonal}, dimension n + 2|E|.
inline ConcreteOpSys graph_system(const FiniteGraph& g) {
  return ConcreteOpSys::from_pattern(g.size(), g.edges());
}

/// (d x f)_{i,j} = d_i x_{i,j} f_j.
inline Matrix bimodule_action(const std::vector<Complex>& d, const Matrix& x,
                              const std::vector<Complex>& f) {
  if (static_cast<Eigen::Index>(d.size()) != x.rows() ||
      static_cast<Eigen::Index>(f.size()) != x.cols()) {
    throw DimensionError("bimodule_action: diagonal lengths do not match matrix");
  }
  Matrix out = x;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      out(i, j) = d[static_cast<std::size_t>(i)] * x(i, j) * f[static_cast<std::size_t>(j)];
    }
  }
  return out;
}

/// The operator-system tower S_{G_1} -> S_{G_2} -> ... with canonical
/// embeddings, extended lazily.
inline TowerPtr make_graph_tower(std::shared_ptr<const GraphTower> graphs,
                                 Tower::Options opts = Tower::Options()) {
  opts.tail_is_embedding = true;
  auto first = make_system(graph_system(*graphs->graph(1)));
  const std::size_t limit = opts.max_ambient;
  TailRule tail = [graphs, limit](const SystemPtr& last, std::size_t next) -> TailStep {
    try {
      if (graphs->dim(next) > limit) return std::nullopt;
    } catch (const SpecError&) {
      return std::nullopt;
    }
    auto sys = make_system(graph_system(*graphs->graph(next)));
    return std::make_pair(sys, CpMap::star_hom(last, sys, graphs->multiplicity(next - 1)));
  };
  return std::make_shared<const Tower>(std::vector<SystemPtr>{first},
                                       std::vector<CpMap>{}, std::move(tail), opts);
}

}  // namespace osys::uhf
