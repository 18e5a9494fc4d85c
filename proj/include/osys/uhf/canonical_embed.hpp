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

#include <Eigen/Core>

#include <cstddef>
#include <stdexcept>

namespace osys::uhf {

/// Position of source index i (0-based) inside copy r of an l-fold
/// block-diagonal lift of M_n: r * n + i.
constexpr std::size_t lifted_index(std::size_t r, std::size_t n,
                                   std::size_t i) {
  return r * n + i;
}

/// The unital *-homomorphism M_n -> M_{l n} sending
/// e_{i,j} to sum_r e_{r n + i, r n + j}; works for any scalar type.
template <class Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>
canonical_embed(const Eigen::MatrixBase<Derived>& x, std::size_t l) {
  using Out =
      Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (x.rows() != x.cols()) {
    throw std::invalid_argument("canonical_embed: input is not square");
  }
  if (l == 0) throw std::invalid_argument("canonical_embed: multiplicity 0");
  const auto n = static_cast<std::size_t>(x.rows());
  Out y = Out::Zero(static_cast<Eigen::Index>(n * l),
                    static_cast<Eigen::Index>(n * l));
  for (std::size_t r = 0; r < l; ++r) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        y(static_cast<Eigen::Index>(lifted_index(r, n, i)),
          static_cast<Eigen::Index>(lifted_index(r, n, j))) =
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      }
    }
  }
  return y;
}

}  // namespace osys::uhf
