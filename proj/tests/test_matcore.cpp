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

#include "osys/matcore.hpp"
#include "osys/random.hpp"

namespace osys {
namespace {

TEST(Matcore, IdentityIsPsd) {
  EXPECT_TRUE(is_psd(identity(3)));
  EXPECT_TRUE(is_psd(identity(1)));
}

TEST(Matcore, NegativeDiagonalEntryIsNotPsd) {
  EXPECT_FALSE(is_psd(diagonal_matrix({1.0, -1.0})));
}

TEST(Matcore, NonHermitianIsNotPsd) {
  Matrix x = identity(2);
  x(0, 1) = 1.0;
  EXPECT_FALSE(is_psd(x));
}

TEST(Matcore, ToleranceAbsorbsTinyNegatives) {
  EXPECT_TRUE(is_psd(diagonal_matrix({1.0, -1e-12})));
  EXPECT_FALSE(is_psd(diagonal_matrix({1.0, -1e-6})));
  EXPECT_TRUE(is_psd(diagonal_matrix({1.0, -1e-6}), Tolerance(1e-5)));
}

TEST(Matcore, NonSquareThrows) {
  EXPECT_THROW(is_psd(Matrix::Zero(2, 3)), DimensionError);
}

TEST(Matcore, MatrixUnitPlacesOne) {
  const Matrix e = matrix_unit(3, 0, 2);
  EXPECT_EQ(e(0, 2), Complex(1.0));
  EXPECT_EQ(max_abs(e), 1.0);
  EXPECT_EQ(e.cwiseAbs().sum(), 1.0);
}

TEST(Matcore, KronIndexConvention) {
  const Matrix a = matrix_unit(2, 0, 1);
  const Matrix b = matrix_unit(3, 2, 0);
  const Matrix k = kron(a, b);
  ASSERT_EQ(k.rows(), 6);
  EXPECT_EQ(k(0 * 3 + 2, 1 * 3 + 0), Complex(1.0));
  EXPECT_EQ(k.cwiseAbs().sum(), 1.0);
}

TEST(Matcore, OpNormOfMatrixUnit) {
  EXPECT_NEAR(op_norm(matrix_unit(4, 1, 3)), 1.0, 1e-12);
}

TEST(Matcore, EigenpairsSatisfyEquation) {
  Sampler rng(3);
  for (int t = 0; t < 20; ++t) {
    const Matrix h = rng.hermitian(5);
    const EigenPair lo = min_eigenpair(h);
    EXPECT_LT((h * lo.vector - lo.value * lo.vector).norm(), 1e-9);
    EXPECT_NEAR(lo.value, min_eigenvalue(h), 1e-12);
    const EigenPair big = max_abs_eigenpair(h);
    EXPECT_NEAR(std::abs(big.value), op_norm(h), 1e-9);
  }
}

// Property: G G^* is PSD; shifting it below zero breaks positivity.
TEST(MatcoreProperty, GramMatricesArePsd) {
  Sampler rng(11);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 1 + rng.index(6);
    const Matrix g = rng.gaussian(n, 1 + rng.index(6));
    const Matrix p = g * g.adjoint();
    EXPECT_TRUE(is_psd(p));
    const double lo = min_eigenvalue(p);
    EXPECT_FALSE(is_psd(p - (lo + 1e-3) * identity(n)));
  }
}

// Property: conjugation preserves PSD-ness; the unitary sampler is unitary.
TEST(MatcoreProperty, UnitaryConjugationPreservesCone) {
  Sampler rng(12);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 1 + rng.index(5);
    const Matrix u = rng.unitary(n);
    EXPECT_TRUE(approx_equal(u * u.adjoint(), identity(n)));
    const Matrix p = rng.psd(n, 1 + rng.index(n));
    EXPECT_TRUE(is_psd(u * p * u.adjoint()));
    const Matrix h = rng.hermitian(n);
    EXPECT_EQ(is_psd(h), is_psd(u * h * u.adjoint()));
  }
}

// Property: kron of PSD matrices is PSD and norms multiply.
TEST(MatcoreProperty, KronIsMultiplicative) {
  Sampler rng(13);
  for (int t = 0; t < 100; ++t) {
    const Matrix a = rng.psd(1 + rng.index(3), 2);
    const Matrix b = rng.psd(1 + rng.index(3), 2);
    EXPECT_TRUE(is_psd(kron(a, b)));
    EXPECT_NEAR(op_norm(kron(a, b)), op_norm(a) * op_norm(b), 1e-8 * (1 + op_norm(a) * op_norm(b)));
  }
}

// Property: kron is associative, exactly on small integer entries.
TEST(MatcoreProperty, KronIsAssociative) {
  Sampler rng(14);
  const auto small = [&rng](std::size_t r, std::size_t c) {
    Matrix m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        m(i, j) = Complex(static_cast<double>(rng.index(7)) - 3, static_cast<double>(rng.index(5)) - 2);
      }
    }
    return m;
  };
  for (int t = 0; t < 100; ++t) {
    const Matrix a = small(1 + rng.index(3), 1 + rng.index(3));
    const Matrix b = small(1 + rng.index(3), 1 + rng.index(3));
    const Matrix c = small(1 + rng.index(3), 1 + rng.index(3));
    EXPECT_TRUE(kron(kron(a, b), c) == kron(a, kron(b, c)));
  }
}

TEST(Random, SeedsAreReproducible) {
  Sampler a(99), b(99);
  EXPECT_TRUE(approx_equal(a.hermitian(4), b.hermitian(4), Tolerance(0.0)));
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_EQ(derive_seed(5, 7), derive_seed(5, 7));
}

TEST(Random, SimplexPointsSumToOne) {
  Sampler rng(5);
  for (int t = 0; t < 20; ++t) {
    const RealVector p = rng.simplex_point(4);
    EXPECT_NEAR(p.sum(), 1.0, 1e-12);
    EXPECT_GE(p.minCoeff(), 0.0);
  }
}

}  // namespace
}  // namespace osys
