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

#include <cstdint>
#include <random>

#include "osys/matcore.hpp"

namespace osys {

// Seeded sampler shared by every randomized search and harness. All draws go
// through one mt19937_64 so a (seed, call sequence) pair fixes the output.
class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : seed_(seed), gen_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::mt19937_64& engine() { return gen_; }

  double normal() { return normal_(gen_); }
  double uniform() { return uniform_(gen_); }

  std::size_t index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(gen_);
  }

  Matrix gaussian(std::size_t rows, std::size_t cols) {
    Matrix g(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index j = 0; j < g.cols(); ++j) {
      for (Eigen::Index i = 0; i < g.rows(); ++i) {
        const double re = normal();
        const double im = normal();
        g(i, j) = Complex(re, im);
      }
    }
    return g;
  }

  RealVector real_gaussian(std::size_t n) {
    RealVector v(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = normal();
    return v;
  }

  /// (G + G*) / 2 with Gaussian G.
  Matrix hermitian(std::size_t n) {
    const Matrix g = gaussian(n, n);
    return (g + g.adjoint()) * 0.5;
  }

  /// G* G with Gaussian G.
  Matrix psd(std::size_t n, std::size_t rank = 0) {
    const Matrix g = gaussian(rank == 0 ? n : rank, n);
    return g.adjoint() * g;
  }

  /// Haar-distributed unitary via QR with phase correction.
  Matrix unitary(std::size_t n) {
    const Matrix g = gaussian(n, n);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ();
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < q.cols(); ++j) {
      const Complex d = r(j, j);
      const double a = std::abs(d);
      if (a > 0) q.col(j) *= d / a;
    }
    return q;
  }

  Vector unit_vector(std::size_t n) {
    Vector v = gaussian(n, 1).col(0);
    return v / v.norm();
  }

  /// Uniform point of the probability simplex.
  RealVector simplex_point(std::size_t n) {
    RealVector p(static_cast<Eigen::Index>(n));
    double total = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      p(i) = -std::log(1.0 - uniform());
      total += p(i);
    }
    return p / total;
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 gen_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

/// Splits a base seed into independent per-task seeds (splitmix64).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace osys
