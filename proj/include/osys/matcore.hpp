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

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace osys {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Absolute/relative fuzz used by every floating-point cone test.
struct Tolerance {
  double eps = 1e-9;

  constexpr Tolerance() = default;
  explicit Tolerance(double e) : eps(e) {
    if (!(e >= 0.0)) throw Error("tolerance must be nonnegative");
  }
};

inline void require_square(const Matrix& x, const char* what = "matrix") {
  if (x.rows() != x.cols()) {
    throw DimensionError(std::string(what) + " is not square (" +
                         std::to_string(x.rows()) + "x" +
                         std::to_string(x.cols()) + ")");
  }
}

inline double max_abs(const Matrix& x) {
  return x.size() == 0 ? 0.0 : x.cwiseAbs().maxCoeff();
}

inline bool all_finite(const Matrix& x) { return x.allFinite(); }

inline Matrix identity(std::size_t n) {
  return Matrix::Identity(static_cast<Eigen::Index>(n),
                          static_cast<Eigen::Index>(n));
}

/// e_{i,j} in M_n, 0-based indices.
inline Matrix matrix_unit(std::size_t n, std::size_t i, std::size_t j) {
  Matrix e = Matrix::Zero(static_cast<Eigen::Index>(n),
                          static_cast<Eigen::Index>(n));
  e(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 1.0;
  return e;
}

inline Matrix diagonal_matrix(const std::vector<Complex>& d) {
  Matrix x = Matrix::Zero(static_cast<Eigen::Index>(d.size()),
                          static_cast<Eigen::Index>(d.size()));
  for (std::size_t i = 0; i < d.size(); ++i) {
    x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = d[i];
  }
  return x;
}

/// ||x - x*||_max <= eps * max(1, ||x||_max).
inline bool is_hermitian(const Matrix& x, Tolerance tol = {}) {
  if (x.rows() != x.cols()) return false;
  const double scale = std::max(1.0, max_abs(x));
  return max_abs(x - x.adjoint()) <= tol.eps * scale;
}

inline Matrix hermitian_part(const Matrix& x) {
  return (x + x.adjoint()) * 0.5;
}

/// Ascending eigenvalues of the hermitian part of x.
inline RealVector eigenvalues(const Matrix& x) {
  require_square(x);
  if (x.size() == 0) return RealVector();
  Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitian_part(x),
                                               Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

struct EigenPair {
  double value = 0.0;
  Vector vector;
};

inline EigenPair min_eigenpair(const Matrix& x) {
  require_square(x);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitian_part(x));
  return {solver.eigenvalues()(0), solver.eigenvectors().col(0)};
}

/// Eigenpair whose eigenvalue has the largest modulus.
inline EigenPair max_abs_eigenpair(const Matrix& x) {
  require_square(x);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitian_part(x));
  const auto& ev = solver.eigenvalues();
  const Eigen::Index last = ev.size() - 1;
  const Eigen::Index k = std::abs(ev(0)) >= std::abs(ev(last)) ? 0 : last;
  return {ev(k), solver.eigenvectors().col(k)};
}

inline double min_eigenvalue(const Matrix& x) {
  const RealVector ev = eigenvalues(x);
  return ev.size() == 0 ? 0.0 : ev(0);
}

/// Largest singular value.
inline double op_norm(const Matrix& x) {
  if (x.size() == 0) return 0.0;
  if (x.rows() == x.cols() && is_hermitian(x, Tolerance(0.0))) {
    return eigenvalues(x).cwiseAbs().maxCoeff();
  }
  Eigen::JacobiSVD<Matrix> svd(x);
  return svd.singularValues()(0);
}

/// Hermitian within tol and lambda_min >= -tol * max(1, ||x||).
inline bool is_psd(const Matrix& x, Tolerance tol = {}) {
  require_square(x, "is_psd input");
  if (x.size() == 0) return true;
  if (!is_hermitian(x, tol)) return false;
  const RealVector ev = eigenvalues(x);
  const double norm = std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
  return ev(0) >= -tol.eps * std::max(1.0, norm);
}

/// Kronecker product; row index of a(i,j)*b(p,q) is i*dim(b)+p.
inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

inline Vector kron(const Vector& a, const Vector& b) {
  Vector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    out.segment(i * b.size(), b.size()) = a(i) * b;
  }
  return out;
}

/// Max-entry distance, scaled the same way as the hermiticity test.
inline bool approx_equal(const Matrix& a, const Matrix& b, Tolerance tol = {}) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  const double scale = std::max({1.0, max_abs(a), max_abs(b)});
  return max_abs(a - b) <= tol.eps * scale;
}

/// Block (i,j) of an n x n block matrix with d x d blocks.
inline Matrix block_of(const Matrix& assembled, std::size_t d, std::size_t i,
                       std::size_t j) {
  const auto di = static_cast<Eigen::Index>(d);
  return assembled.block(static_cast<Eigen::Index>(i) * di,
                         static_cast<Eigen::Index>(j) * di, di, di);
}

}  // namespace osys
