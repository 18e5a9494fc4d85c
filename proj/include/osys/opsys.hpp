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

#include <algorithm>
#include <cstdint>
#include <limits>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "osys/matcore.hpp"
#include "osys/random.hpp"
#include "osys/uhf/canonical_embed.hpp"

namespace osys {

enum class SystemFault {
  kEmpty,
  kNotSquare,
  kDimensionMismatch,
  kNonFinite,
  kNonHermitian,
  kDependent,
  kIdentityNotInSpan,
  kUnitIndexOutOfRange,
  kUnitNotIdentity,
};

inline const char* to_string(SystemFault f) {
  switch (f) {
    case SystemFault::kEmpty: return "empty basis";
    case SystemFault::kNotSquare: return "basis element not square";
    case SystemFault::kDimensionMismatch: return "basis elements differ in dimension";
    case SystemFault::kNonFinite: return "basis element has non-finite entries";
    case SystemFault::kNonHermitian: return "basis element not hermitian";
    case SystemFault::kDependent: return "basis linearly dependent";
    case SystemFault::kIdentityNotInSpan: return "identity not in span";
    case SystemFault::kUnitIndexOutOfRange: return "unit index out of range";
    case SystemFault::kUnitNotIdentity: return "unit element is not the identity";
  }
  return "unknown fault";
}

class SystemError : public Error {
 public:
  SystemError(SystemFault fault, const std::string& detail)
      : Error(std::string(to_string(fault)) +
              (detail.empty() ? "" : ": " + detail)),
        fault_(fault) {}
  SystemFault fault() const { return fault_; }

 private:
  SystemFault fault_;
};

namespace detail {

inline Eigen::Map<const Vector> vec(const Matrix& x) {
  return Eigen::Map<const Vector>(x.data(), x.size());
}

}  // namespace detail

/// A unital selfadjoint subspace of M_d, presented by a hermitian basis whose
/// element at unit_index() is I_d. Positivity at level n is PSD-ness of the
/// assembled nd x nd matrix; cones are never stored.
///
/// Systems spanned by matrix units on a symmetric support pattern keep the
/// pattern instead of a dense frame and build their basis only on request.
class ConcreteOpSys {
 public:
  using Pairs = std::vector<std::pair<std::size_t, std::size_t>>;

  static ConcreteOpSys validate(std::vector<Matrix> basis,
                                std::size_t unit_index, Tolerance tol = {}) {
    if (basis.empty()) throw SystemError(SystemFault::kEmpty, "");
    const Eigen::Index d = basis.front().rows();
    for (std::size_t k = 0; k < basis.size(); ++k) {
      const Matrix& b = basis[k];
      if (b.rows() != b.cols()) {
        throw SystemError(SystemFault::kNotSquare,
                          "element " + std::to_string(k));
      }
      if (b.rows() != d) {
        throw SystemError(SystemFault::kDimensionMismatch,
                          "element " + std::to_string(k));
      }
      if (!all_finite(b)) {
        throw SystemError(SystemFault::kNonFinite,
                          "element " + std::to_string(k));
      }
      if (!is_hermitian(b, tol)) {
        throw SystemError(SystemFault::kNonHermitian,
                          "element " + std::to_string(k));
      }
    }
    if (d == 0) throw SystemError(SystemFault::kEmpty, "dimension 0");
    ConcreteOpSys s;
    s.d_ = static_cast<std::size_t>(d);
    s.dim_ = basis.size();
    s.lazy_->basis = std::move(basis);
    std::call_once(s.lazy_->once, [] {});
    const auto& b = s.lazy_->basis;

    s.frame_.resize(static_cast<Eigen::Index>(s.d_ * s.d_),
                    static_cast<Eigen::Index>(s.dim_));
    for (std::size_t k = 0; k < s.dim_; ++k) {
      s.frame_.col(static_cast<Eigen::Index>(k)) = detail::vec(b[k]);
    }
    Eigen::JacobiSVD<Matrix> svd(s.frame_);
    const RealVector sv = svd.singularValues();
    const double smax = sv.size() ? sv(0) : 0.0;
    if (sv.size() < static_cast<Eigen::Index>(s.dim_) ||
        sv(sv.size() - 1) <= std::max(tol.eps, 1e-12) * std::max(1.0, smax)) {
      throw SystemError(SystemFault::kDependent,
                        std::to_string(s.dim_) + " elements");
    }
    s.pinv_ = s.frame_.completeOrthogonalDecomposition().pseudoInverse();

    const Matrix id = identity(s.d_);
    if (!s.contains(id, tol)) {
      throw SystemError(SystemFault::kIdentityNotInSpan, "");
    }
    if (unit_index >= s.dim_) {
      throw SystemError(SystemFault::kUnitIndexOutOfRange,
                        std::to_string(unit_index));
    }
    if (!approx_equal(b[unit_index], id, tol)) {
      throw SystemError(SystemFault::kUnitNotIdentity,
                        "element " + std::to_string(unit_index));
    }
    s.unit_ = unit_index;
    s.diagonal_ = std::all_of(b.begin(), b.end(), [](const Matrix& x) {
      Matrix off = x;
      off.diagonal().setZero();
      return max_abs(off) == 0.0;
    });
    return s;
  }

  /// Span of I, e_{i,i} (i >= 1) and e_{i,j}+e_{j,i}, i(e_{i,j}-e_{j,i}) for
  /// each listed pair i < j (0-based). I replaces e_{0,0} so the unit is a
  /// basis element; the span is unchanged.
  static ConcreteOpSys from_pattern(std::size_t d, Pairs pairs) {
    if (d == 0) throw SystemError(SystemFault::kEmpty, "dimension 0");
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
    ConcreteOpSys s;
    s.d_ = d;
    s.pattern_.assign(d * d, 0);
    for (std::size_t i = 0; i < d; ++i) s.pattern_[i * d + i] = 1;
    for (const auto& [i, j] : pairs) {
      if (i >= j || j >= d) {
        throw DimensionError("pattern pair (" + std::to_string(i) + "," +
                             std::to_string(j) + ") invalid for dim " +
                             std::to_string(d));
      }
      s.pattern_[i * d + j] = s.pattern_[j * d + i] = 1;
    }
    s.pairs_ = std::move(pairs);
    s.dim_ = d + 2 * s.pairs_.size();
    s.unit_ = 0;
    s.diagonal_ = s.pairs_.empty();
    return s;
  }

  static ConcreteOpSys full(std::size_t d) {
    Pairs pairs;
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = i + 1; j < d; ++j) pairs.emplace_back(i, j);
    }
    return from_pattern(d, std::move(pairs));
  }

  static ConcreteOpSys diagonal(std::size_t d) { return from_pattern(d, {}); }

  std::size_t ambient_dim() const { return d_; }
  std::size_t dim() const { return dim_; }
  std::size_t unit_index() const { return unit_; }
  bool is_diagonal() const { return diagonal_; }
  bool is_full() const { return dim_ == d_ * d_; }
  bool has_pattern() const { return !pattern_.empty(); }
  /// Support pattern test (pattern systems only).
  bool in_pattern(std::size_t i, std::size_t j) const {
    return pattern_[i * d_ + j] != 0;
  }
  const Pairs& pattern_pairs() const { return pairs_; }

  Matrix basis_element(std::size_t k) const {
    if (k >= dim_) throw DimensionError("basis index out of range");
    if (!has_pattern()) return lazy_->basis[k];
    if (k == 0) return identity(d_);
    if (k < d_) return matrix_unit(d_, k, k);
    const auto& [i, j] = pairs_[(k - d_) / 2];
    if ((k - d_) % 2 == 0) return matrix_unit(d_, i, j) + matrix_unit(d_, j, i);
    return Complex(0.0, 1.0) * (matrix_unit(d_, i, j) - matrix_unit(d_, j, i));
  }

  const std::vector<Matrix>& basis() const {
    std::call_once(lazy_->once, [this] {
      lazy_->basis.reserve(dim_);
      for (std::size_t k = 0; k < dim_; ++k) lazy_->basis.push_back(basis_element(k));
    });
    return lazy_->basis;
  }

  /// Coordinates of the orthogonal projection onto the span.
  Vector coordinates(const Matrix& x) const {
    if (static_cast<std::size_t>(x.rows()) != d_ ||
        static_cast<std::size_t>(x.cols()) != d_) {
      throw DimensionError("element has dimension " + std::to_string(x.rows()) +
                           ", system ambient dimension is " +
                           std::to_string(d_));
    }
    if (!has_pattern()) return pinv_ * detail::vec(x);
    Vector c(static_cast<Eigen::Index>(dim_));
    c(0) = x(0, 0);
    for (std::size_t i = 1; i < d_; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      c(ii) = x(ii, ii) - x(0, 0);
    }
    for (std::size_t p = 0; p < pairs_.size(); ++p) {
      const auto i = static_cast<Eigen::Index>(pairs_[p].first);
      const auto j = static_cast<Eigen::Index>(pairs_[p].second);
      const auto k = static_cast<Eigen::Index>(d_ + 2 * p);
      c(k) = (x(i, j) + x(j, i)) * 0.5;
      c(k + 1) = (x(i, j) - x(j, i)) * Complex(0.0, -0.5);
    }
    return c;
  }

  Matrix realize(const Vector& coords) const {
    if (static_cast<std::size_t>(coords.size()) != dim_) {
      throw DimensionError("coordinate vector length mismatch");
    }
    const auto d = static_cast<Eigen::Index>(d_);
    Matrix x = Matrix::Zero(d, d);
    if (!has_pattern()) {
      for (std::size_t k = 0; k < dim_; ++k) {
        x += coords(static_cast<Eigen::Index>(k)) * lazy_->basis[k];
      }
      return x;
    }
    for (Eigen::Index i = 0; i < d; ++i) x(i, i) = coords(0) + (i ? coords(i) : 0.0);
    for (std::size_t p = 0; p < pairs_.size(); ++p) {
      const auto i = static_cast<Eigen::Index>(pairs_[p].first);
      const auto j = static_cast<Eigen::Index>(pairs_[p].second);
      const auto k = static_cast<Eigen::Index>(d_ + 2 * p);
      const Complex re = coords(k);
      const Complex im = coords(k + 1) * Complex(0.0, 1.0);
      x(i, j) = re + im;
      x(j, i) = re - im;
    }
    return x;
  }

  bool contains(const Matrix& x, Tolerance tol = {}) const {
    if (static_cast<std::size_t>(x.rows()) != d_ ||
        static_cast<std::size_t>(x.cols()) != d_) {
      return false;
    }
    const double bound = tol.eps * std::max(1.0, max_abs(x));
    if (has_pattern()) {
      for (std::size_t i = 0; i < d_; ++i) {
        for (std::size_t j = 0; j < d_; ++j) {
          if (!in_pattern(i, j) &&
              std::abs(x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))) >
                  bound) {
            return false;
          }
        }
      }
      return true;
    }
    const Vector residual = frame_ * (pinv_ * detail::vec(x)) - detail::vec(x);
    return residual.size() == 0 || residual.cwiseAbs().maxCoeff() <= bound;
  }

  /// Orthogonal projection of x onto the span.
  Matrix project(const Matrix& x) const { return realize(coordinates(x)); }

  friend bool same_system(const ConcreteOpSys& a, const ConcreteOpSys& b) {
    if (&a == &b) return true;
    if (a.d_ != b.d_ || a.dim_ != b.dim_ || a.unit_ != b.unit_) return false;
    if (a.has_pattern() && b.has_pattern()) return a.pattern_ == b.pattern_;
    for (std::size_t k = 0; k < a.dim_; ++k) {
      if (a.basis_element(k) != b.basis_element(k)) return false;
    }
    return true;
  }

 private:
  struct LazyBasis {
    std::once_flag once;
    std::vector<Matrix> basis;
  };

  ConcreteOpSys() = default;

  std::size_t d_ = 0;
  std::size_t dim_ = 0;
  std::size_t unit_ = 0;
  bool diagonal_ = false;
  std::vector<unsigned char> pattern_;  // d x d support, pattern systems only
  Pairs pairs_;
  std::shared_ptr<LazyBasis> lazy_ = std::make_shared<LazyBasis>();
  Matrix frame_;  // d^2 x dim, columns are vectorized basis elements
  Matrix pinv_;
};

using SystemPtr = std::shared_ptr<const ConcreteOpSys>;

inline SystemPtr make_system(ConcreteOpSys s) {
  return std::make_shared<const ConcreteOpSys>(std::move(s));
}

inline bool same_system(const SystemPtr& a, const SystemPtr& b) {
  return a && b && (a == b || same_system(*a, *b));
}

/// An element of a concrete system, kept both as coordinates and as its
/// ambient matrix.
class AouElement {
 public:
  static AouElement from_matrix(SystemPtr sys, Matrix x, Tolerance tol = {}) {
    if (!sys->contains(x, tol)) {
      throw Error("matrix does not belong to the system");
    }
    AouElement e;
    e.coords_ = sys->coordinates(x);
    e.value_ = std::move(x);
    e.sys_ = std::move(sys);
    return e;
  }

  static AouElement from_coords(SystemPtr sys, Vector coords) {
    AouElement e;
    e.value_ = sys->realize(coords);
    e.coords_ = std::move(coords);
    e.sys_ = std::move(sys);
    return e;
  }

  static AouElement unit(SystemPtr sys) {
    Matrix id = identity(sys->ambient_dim());
    return from_matrix(std::move(sys), std::move(id));
  }

  const SystemPtr& system() const { return sys_; }
  const Vector& coords() const { return coords_; }
  const Matrix& matrix() const { return value_; }

  bool is_hermitian(Tolerance tol = {}) const {
    return osys::is_hermitian(value_, tol);
  }
  bool is_positive(Tolerance tol = {}) const { return is_psd(value_, tol); }

 private:
  AouElement() = default;
  SystemPtr sys_;
  Vector coords_;
  Matrix value_;
};

/// ||x|| for the order unit I: max |eigenvalue| for hermitian x, the ambient
/// operator norm otherwise.
inline double order_norm(const AouElement& x) { return op_norm(x.matrix()); }

/// An n x n array over a system, stored as its assembled nd x nd matrix
/// sum_{i,j} e_{i,j} (x) X_{i,j}.
class ElementArray {
 public:
  static ElementArray from_entries(
      const std::vector<std::vector<AouElement>>& entries) {
    const std::size_t n = entries.size();
    if (n == 0) throw DimensionError("empty element array");
    const SystemPtr sys = entries[0][0].system();
    const std::size_t d = sys->ambient_dim();
    Matrix a(static_cast<Eigen::Index>(n * d), static_cast<Eigen::Index>(n * d));
    for (std::size_t i = 0; i < n; ++i) {
      if (entries[i].size() != n) throw DimensionError("element array not square");
      for (std::size_t j = 0; j < n; ++j) {
        if (!same_system(entries[i][j].system(), sys)) {
          throw Error("element array mixes systems");
        }
        a.block(static_cast<Eigen::Index>(i * d), static_cast<Eigen::Index>(j * d),
                static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d)) =
            entries[i][j].matrix();
      }
    }
    return ElementArray(sys, n, std::move(a));
  }

  static ElementArray from_assembled(SystemPtr sys, std::size_t n, Matrix a,
                                     Tolerance tol = {}) {
    const std::size_t d = sys->ambient_dim();
    if (n == 0 || static_cast<std::size_t>(a.rows()) != n * d ||
        static_cast<std::size_t>(a.cols()) != n * d) {
      throw DimensionError("assembled matrix is " + std::to_string(a.rows()) +
                           "x" + std::to_string(a.cols()) + ", expected " +
                           std::to_string(n * d));
    }
    if (!all_finite(a)) throw DimensionError("non-finite entries");
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (!sys->contains(block_of(a, d, i, j), tol)) {
          throw Error("entry (" + std::to_string(i + 1) + "," +
                      std::to_string(j + 1) + ") does not belong to the system");
        }
      }
    }
    return ElementArray(std::move(sys), n, std::move(a));
  }

  static ElementArray single(const AouElement& x) {
    return ElementArray(x.system(), 1, x.matrix());
  }

  static ElementArray unit(SystemPtr sys, std::size_t n) {
    Matrix id = identity(n * sys->ambient_dim());
    return ElementArray(std::move(sys), n, std::move(id));
  }

  const SystemPtr& system() const { return sys_; }
  std::size_t n() const { return n_; }
  std::size_t block_dim() const { return sys_->ambient_dim(); }
  const Matrix& assembled() const { return a_; }
  Matrix entry(std::size_t i, std::size_t j) const {
    return block_of(a_, block_dim(), i, j);
  }
  bool is_hermitian(Tolerance tol = {}) const {
    return osys::is_hermitian(a_, tol);
  }

 private:
  ElementArray(SystemPtr sys, std::size_t n, Matrix a)
      : sys_(std::move(sys)), n_(n), a_(std::move(a)) {}

  SystemPtr sys_;
  std::size_t n_ = 0;
  Matrix a_;
};

/// (alpha (x) I_d)^* X (alpha (x) I_d) for alpha in M_{n,m}.
inline ElementArray compress(const ElementArray& x, const Matrix& alpha) {
  if (static_cast<std::size_t>(alpha.rows()) != x.n()) {
    throw DimensionError("compression has wrong row count");
  }
  const Matrix big = kron(alpha, identity(x.block_dim()));
  return ElementArray::from_assembled(
      x.system(), static_cast<std::size_t>(alpha.cols()),
      big.adjoint() * x.assembled() * big, Tolerance(1e-8));
}

/// Membership in M_n(S)^+: PSD-ness of the assembled matrix.
inline bool cone_contains(const SystemPtr& sys, const ElementArray& x,
                          Tolerance tol = {}) {
  if (!same_system(sys, x.system())) {
    throw Error("cone_contains: element array belongs to a different system");
  }
  return is_psd(x.assembled(), tol);
}

// ---------------------------------------------------------------------------
// Completely positive maps.

inline constexpr std::size_t kAllLevels = std::numeric_limits<std::size_t>::max();

/// x -> U (I_l (x) x) U^*; an empty unitary means the canonical embedding.
struct StarHom {
  std::size_t multiplicity = 1;
  Matrix unitary;
};

/// Coefficient matrix acting on basis coordinates: target.dim x source.dim.
struct LinearCoefficients {
  Matrix coefficients;
};

class CpMap {
 public:
  using Kind = std::variant<StarHom, LinearCoefficients>;

  static CpMap star_hom(SystemPtr source, SystemPtr target, std::size_t l,
                        Matrix unitary = {}, Tolerance tol = {}) {
    const std::size_t d = source->ambient_dim();
    if (l == 0 || target->ambient_dim() != l * d) {
      throw DimensionError("star-hom: target dimension " +
                           std::to_string(target->ambient_dim()) +
                           " != multiplicity " + std::to_string(l) + " x " +
                           std::to_string(d));
    }
    if (unitary.size() != 0) {
      if (unitary.rows() != unitary.cols() ||
          static_cast<std::size_t>(unitary.rows()) != l * d) {
        throw DimensionError("star-hom: unitary has wrong size");
      }
      if (!approx_equal(unitary.adjoint() * unitary, identity(l * d),
                        Tolerance(1e-10))) {
        throw Error("star-hom: conjugating matrix is not unitary");
      }
    }
    CpMap f(std::move(source), std::move(target), StarHom{l, std::move(unitary)});
    if (!f.image_contained(tol)) {
      throw Error("star-hom: image of the source system is not contained in "
                  "the target system");
    }
    f.verified_ = kAllLevels;
    return f;
  }

  static CpMap linear(SystemPtr source, SystemPtr target, Matrix coefficients,
                      Tolerance tol = Tolerance(1e-8)) {
    if (static_cast<std::size_t>(coefficients.rows()) != target->dim() ||
        static_cast<std::size_t>(coefficients.cols()) != source->dim()) {
      throw DimensionError("linear map: coefficient matrix must be " +
                           std::to_string(target->dim()) + "x" +
                           std::to_string(source->dim()));
    }
    CpMap f(std::move(source), std::move(target),
            LinearCoefficients{std::move(coefficients)});
    const std::size_t d = f.source_->ambient_dim();
    if (!approx_equal(f.apply(identity(d)), identity(f.target_->ambient_dim()),
                      tol)) {
      throw Error("linear map is not unital");
    }
    return f;
  }

  /// Solves for the map from (input, output) pairs; inputs must span the
  /// source system.
  static CpMap linear_from_images(SystemPtr source, SystemPtr target,
                                  const std::vector<Matrix>& inputs,
                                  const std::vector<Matrix>& outputs,
                                  Tolerance tol = Tolerance(1e-8)) {
    if (inputs.size() != outputs.size() || inputs.empty()) {
      throw DimensionError("linear map: need matching nonempty input/output lists");
    }
    const auto k = static_cast<Eigen::Index>(inputs.size());
    Matrix cin(static_cast<Eigen::Index>(source->dim()), k);
    Matrix cout(static_cast<Eigen::Index>(target->dim()), k);
    for (Eigen::Index c = 0; c < k; ++c) {
      const auto idx = static_cast<std::size_t>(c);
      if (!source->contains(inputs[idx], tol)) {
        throw Error("linear map: input " + std::to_string(c + 1) +
                    " is not in the source system");
      }
      if (!target->contains(outputs[idx], tol)) {
        throw Error("linear map: output " + std::to_string(c + 1) +
                    " is not in the target system");
      }
      cin.col(c) = source->coordinates(inputs[idx]);
      cout.col(c) = target->coordinates(outputs[idx]);
    }
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(cin);
    if (static_cast<std::size_t>(cod.rank()) != source->dim()) {
      throw Error("linear map: inputs do not span the source system");
    }
    Matrix t = cout * cod.pseudoInverse();
    if (!approx_equal(t * cin, cout, tol)) {
      throw Error("linear map: images are inconsistent with a linear map");
    }
    return linear(std::move(source), std::move(target), std::move(t), tol);
  }

  const SystemPtr& source() const { return source_; }
  const SystemPtr& target() const { return target_; }
  const Kind& kind() const { return kind_; }
  bool is_star_hom() const { return std::holds_alternative<StarHom>(kind_); }

  /// Highest n at which n-positivity has been confirmed (kAllLevels = cp).
  std::size_t verified_level() const { return verified_; }
  CpMap with_verified_level(std::size_t n) const {
    CpMap f = *this;
    f.verified_ = n;
    return f;
  }

  /// Image of a d x d matrix (for linear maps, x must lie in the source span).
  Matrix apply(const Matrix& x) const {
    if (const auto* h = std::get_if<StarHom>(&kind_)) {
      require_square(x);
      if (static_cast<std::size_t>(x.rows()) != source_->ambient_dim()) {
        throw DimensionError("star-hom: input dimension mismatch");
      }
      Matrix y = uhf::canonical_embed(x, h->multiplicity);
      if (h->unitary.size() != 0) y = h->unitary * y * h->unitary.adjoint();
      return y;
    }
    const auto& lin = std::get<LinearCoefficients>(kind_);
    if (!source_->contains(x, Tolerance(1e-8))) {
      throw Error("linear map applied outside its source system");
    }
    return target_->realize(lin.coefficients * source_->coordinates(x));
  }

  /// (id_n (x) f) on an assembled n x n array.
  Matrix apply_blocks(std::size_t n, const Matrix& a) const {
    const std::size_t d = source_->ambient_dim();
    const std::size_t e = target_->ambient_dim();
    if (static_cast<std::size_t>(a.rows()) != n * d ||
        static_cast<std::size_t>(a.cols()) != n * d) {
      throw DimensionError("apply_blocks: assembled matrix dimension mismatch");
    }
    Matrix out(static_cast<Eigen::Index>(n * e), static_cast<Eigen::Index>(n * e));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        out.block(static_cast<Eigen::Index>(i * e), static_cast<Eigen::Index>(j * e),
                  static_cast<Eigen::Index>(e), static_cast<Eigen::Index>(e)) =
            apply(block_of(a, d, i, j));
      }
    }
    return out;
  }

  ElementArray apply(const ElementArray& x) const {
    if (!same_system(x.system(), source_)) {
      throw Error("map applied to an element of a different system");
    }
    return ElementArray::from_assembled(target_, x.n(),
                                        apply_blocks(x.n(), x.assembled()),
                                        Tolerance(1e-8));
  }

  /// Hilbert-Schmidt adjoint of a star-hom on one block: sum_r (U^* y U)_{r,r}.
  Matrix adjoint_apply(const Matrix& y) const {
    const auto* h = std::get_if<StarHom>(&kind_);
    if (!h) throw Error("adjoint_apply: only defined for star-homomorphisms");
    const auto d = static_cast<Eigen::Index>(source_->ambient_dim());
    const Matrix z = h->unitary.size() ? Matrix(h->unitary.adjoint() * y * h->unitary)
                                       : y;
    Matrix out = Matrix::Zero(d, d);
    for (std::size_t r = 0; r < h->multiplicity; ++r) {
      const auto off = static_cast<Eigen::Index>(r) * d;
      out += z.block(off, off, d, d);
    }
    return out;
  }

 private:
  bool image_contained(Tolerance tol) const {
    const auto& h = std::get<StarHom>(kind_);
    const ConcreteOpSys& s = *source_;
    const ConcreteOpSys& t = *target_;
    if (h.unitary.size() == 0 && s.has_pattern() && t.has_pattern()) {
      const std::size_t d = s.ambient_dim();
      for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
          if (!s.in_pattern(i, j)) continue;
          for (std::size_t r = 0; r < h.multiplicity; ++r) {
            if (!t.in_pattern(uhf::lifted_index(r, d, i), uhf::lifted_index(r, d, j))) {
              return false;
            }
          }
        }
      }
      return true;
    }
    for (std::size_t k = 0; k < s.dim(); ++k) {
      if (!t.contains(apply(s.basis_element(k)), tol)) return false;
    }
    return true;
  }

  CpMap(SystemPtr s, SystemPtr t, Kind k)
      : source_(std::move(s)), target_(std::move(t)), kind_(std::move(k)) {}

  SystemPtr source_;
  SystemPtr target_;
  Kind kind_;
  std::size_t verified_ = 0;
};

/// Canonical embedding of S into T with multiplicity l (T must contain the
/// block-diagonal lift of S).
inline CpMap canonical_map(SystemPtr source, SystemPtr target) {
  const std::size_t d = source->ambient_dim();
  const std::size_t e = target->ambient_dim();
  if (d == 0 || e % d != 0) {
    throw DimensionError("canonical map: " + std::to_string(d) +
                         " does not divide " + std::to_string(e));
  }
  return CpMap::star_hom(std::move(source), std::move(target), e / d);
}

// ---------------------------------------------------------------------------
// Complete positivity checks.

struct CpWitness {
  std::size_t level = 0;
  Matrix input;   // positive element of M_n(source)
  Matrix image;   // its image, not PSD
  double min_eigenvalue = 0.0;
};

struct CpCheckResult {
  bool positive = true;  // CpVerified(level) vs NotPositiveAt(level)
  std::size_t level = 0;
  /// False when a clean result comes from sampling: a necessary check only.
  bool exact = true;
  std::string method;
  std::optional<CpWitness> witness;
};

namespace detail {

/// Boundary point of M_n(S)^+: a random hermitian element shifted by its
/// smallest eigenvalue.
inline Matrix sample_boundary_positive(const ConcreteOpSys& s, std::size_t n,
                                       Sampler& rng) {
  const std::size_t d = s.ambient_dim();
  const auto m = static_cast<Eigen::Index>(s.dim());
  Matrix a = Matrix::Zero(static_cast<Eigen::Index>(n * d),
                          static_cast<Eigen::Index>(n * d));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      Vector c(m);
      for (Eigen::Index t = 0; t < m; ++t) {
        const double re = rng.normal();
        const double im = i == j ? 0.0 : rng.normal();
        c(t) = Complex(re, im);
      }
      const Matrix blk = s.realize(c);
      const auto di = static_cast<Eigen::Index>(d);
      a.block(static_cast<Eigen::Index>(i) * di, static_cast<Eigen::Index>(j) * di,
              di, di) = blk;
      if (i != j) {
        a.block(static_cast<Eigen::Index>(j) * di,
                static_cast<Eigen::Index>(i) * di, di, di) = blk.adjoint();
      }
    }
  }
  a = hermitian_part(a);
  const double lo = min_eigenvalue(a);
  a -= lo * identity(n * d);
  return a;
}

inline std::optional<CpWitness> probe(const CpMap& f, std::size_t n,
                                      const Matrix& input, Tolerance tol) {
  const Matrix image = f.apply_blocks(n, input);
  const double lo = min_eigenvalue(image);
  if (!is_psd(image, tol)) return CpWitness{n, input, image, lo};
  return std::nullopt;
}

}  // namespace detail

/// n-positivity verification. Star-homomorphisms are cp outright; linear maps
/// on all of M_d are decided by the Choi matrix, and on the diagonal algebra
/// by the images of the e_ii. Other subsystems are sampled up to n_max and a
/// clean pass is flagged inexact.
inline CpCheckResult cp_check(const CpMap& f, std::size_t n_max,
                              Tolerance tol = {}, std::uint64_t seed = 0,
                              std::size_t samples = 64) {
  if (n_max == 0) throw Error("cp_check: n_max must be at least 1");
  CpCheckResult res;
  const SystemPtr& src = f.source();
  const std::size_t d = src->ambient_dim();

  if (f.is_star_hom()) {
    const Matrix id = identity(d);
    if (!approx_equal(f.apply(id), identity(f.target()->ambient_dim()), tol)) {
      res.positive = false;
      res.level = 1;
      res.method = "star-hom";
      return res;
    }
    // Multiplicative by construction; spot-check on basis pairs.
    Sampler rng(seed);
    const std::size_t m = src->dim();
    const std::size_t pairs = std::min<std::size_t>(m * m, 64);
    for (std::size_t p = 0; p < pairs; ++p) {
      const std::size_t ia = m * m <= 64 ? p / m : rng.index(m);
      const std::size_t ib = m * m <= 64 ? p % m : rng.index(m);
      const Matrix a = src->basis_element(ia);
      const Matrix b = src->basis_element(ib);
      if (!approx_equal(f.apply(a * b), f.apply(a) * f.apply(b), tol)) {
        throw Error("cp_check: star-hom failed multiplicativity");
      }
    }
    res.level = kAllLevels;
    res.method = "star-hom";
    return res;
  }

  Sampler rng(seed);
  if (src->is_full()) {
    Matrix choi_in = Matrix::Zero(static_cast<Eigen::Index>(d * d),
                                  static_cast<Eigen::Index>(d * d));
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        choi_in(static_cast<Eigen::Index>(i * d + i),
                static_cast<Eigen::Index>(j * d + j)) = 1.0;
      }
    }
    const Matrix choi = f.apply_blocks(d, choi_in);
    res.method = "choi";
    if (is_psd(choi, tol)) {
      res.level = kAllLevels;
      return res;
    }
    // Not d-positive. Look for the first failing level below d.
    const EigenPair neg = min_eigenpair(choi);
    Matrix v(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t s = 0; s < d; ++s) {
        v(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(s)) =
            neg.vector(static_cast<Eigen::Index>(i * d + s));
      }
    }
    Eigen::JacobiSVD<Matrix> svd(v, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const std::size_t top = std::min(n_max, d - 1);
    for (std::size_t n = 1; n <= top; ++n) {
      std::vector<Vector> candidates;
      Vector w = Vector::Zero(static_cast<Eigen::Index>(n * d));
      for (std::size_t k = 0; k < n; ++k) {
        const Vector b = svd.matrixV().col(static_cast<Eigen::Index>(k)).conjugate();
        w.segment(static_cast<Eigen::Index>(k * d), static_cast<Eigen::Index>(d)) =
            svd.singularValues()(static_cast<Eigen::Index>(k)) * b;
      }
      if (w.norm() > 0) candidates.push_back(w / w.norm());
      for (std::size_t s = 0; s < samples; ++s) {
        candidates.push_back(rng.unit_vector(n * d));
      }
      for (const Vector& c : candidates) {
        if (auto wit = detail::probe(f, n, c * c.adjoint(), tol)) {
          res.positive = false;
          res.level = n;
          res.witness = std::move(wit);
          return res;
        }
      }
    }
    if (n_max >= d) {
      res.positive = false;
      res.level = d;
      res.witness = CpWitness{d, choi_in, choi, neg.value};
      return res;
    }
    res.level = n_max;
    res.exact = false;
    res.method = "choi+sampling";
    return res;
  }

  if (src->is_diagonal() && src->dim() == d) {
    // Positive maps out of a commutative C*-algebra are cp, and the cone of
    // the diagonal algebra is generated by the e_ii.
    res.method = "abelian-source";
    for (std::size_t i = 0; i < d; ++i) {
      if (auto wit = detail::probe(f, 1, matrix_unit(d, i, i), tol)) {
        res.positive = false;
        res.level = 1;
        res.witness = std::move(wit);
        return res;
      }
    }
    res.level = kAllLevels;
    return res;
  }

  res.method = "sampling";
  for (std::size_t n = 1; n <= n_max; ++n) {
    if (auto wit = detail::probe(f, n, identity(n * d), tol)) {
      res.positive = false;
      res.level = n;
      res.witness = std::move(wit);
      return res;
    }
    for (std::size_t s = 0; s < samples; ++s) {
      const Matrix x = detail::sample_boundary_positive(*src, n, rng);
      if (auto wit = detail::probe(f, n, x, tol)) {
        res.positive = false;
        res.level = n;
        res.witness = std::move(wit);
        return res;
      }
    }
  }
  res.level = n_max;
  res.exact = false;
  return res;
}

// ---------------------------------------------------------------------------
// OMIN: block positivity.

enum class OminVerdict { kInside, kOutside, kUnknown };

inline const char* to_string(OminVerdict v) {
  switch (v) {
    case OminVerdict::kInside: return "Inside";
    case OminVerdict::kOutside: return "Outside";
    case OminVerdict::kUnknown: return "Unknown";
  }
  return "?";
}

struct OminResult {
  OminVerdict verdict = OminVerdict::kUnknown;
  bool exact = false;
  std::string method;
  Vector witness;       // lambda with sum conj(l_i) l_j X_ij not positive
  double value = 0.0;   // smallest eigenvalue found along the search
  std::size_t starts = 0;
};

/// sum_{i,j} conj(lambda_i) lambda_j X_{i,j}.
inline Matrix omin_pencil(const ElementArray& x, const Vector& lambda) {
  const std::size_t d = x.block_dim();
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < x.n(); ++i) {
    for (std::size_t j = 0; j < x.n(); ++j) {
      m += std::conj(lambda(static_cast<Eigen::Index>(i))) *
           lambda(static_cast<Eigen::Index>(j)) * x.entry(i, j);
    }
  }
  return m;
}

inline OminResult omin_contains(const SystemPtr& v, const ElementArray& x,
                                Tolerance tol = {}, std::size_t budget = 64,
                                std::uint64_t seed = 0) {
  if (!same_system(v, x.system())) {
    throw Error("omin_contains: element array belongs to a different system");
  }
  if (!x.is_hermitian(tol)) {
    throw Error("omin_contains: array is not hermitian (X_ji != X_ij^*)");
  }
  const std::size_t n = x.n();
  const std::size_t d = x.block_dim();
  const double scale = std::max(1.0, max_abs(x.assembled()));
  OminResult res;

  if (v->is_diagonal()) {
    // sum conj(l_i) l_j X_ij is diagonal with entries l^* s_k l, where s_k is
    // the k-th coordinate slice.
    res.method = "abelian-slices";
    res.exact = true;
    res.verdict = OminVerdict::kInside;
    res.value = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < d; ++k) {
      Matrix slice(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          slice(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
              x.assembled()(static_cast<Eigen::Index>(i * d + k),
                            static_cast<Eigen::Index>(j * d + k));
        }
      }
      const EigenPair p = min_eigenpair(slice);
      if (p.value < res.value) {
        res.value = p.value;
        res.witness = p.vector;
      }
    }
    if (res.value < -tol.eps * scale) res.verdict = OminVerdict::kOutside;
    return res;
  }

  if (is_psd(x.assembled(), tol)) {
    res.verdict = OminVerdict::kInside;
    res.exact = true;
    res.method = "psd-certificate";
    res.value = min_eigenvalue(x.assembled());
    return res;
  }
  if (n == 1) {
    res.verdict = OminVerdict::kOutside;
    res.exact = true;
    res.method = "level-one";
    res.witness = Vector::Ones(1);
    res.value = min_eigenvalue(x.assembled());
    return res;
  }

  // Alternating minimisation of <l (x) u, X (l (x) u)> over unit l, u.
  res.method = "see-saw";
  Sampler rng(seed);
  res.value = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < budget; ++s) {
    Vector lambda = rng.unit_vector(n);
    double best = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 100; ++it) {
      const EigenPair pu = min_eigenpair(omin_pencil(x, lambda));
      Matrix g(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
              pu.vector.dot(x.entry(i, j) * pu.vector);
        }
      }
      // l^* g l = <l (x) u, X (l (x) u)>.
      const EigenPair pl = min_eigenpair(g);
      lambda = pl.vector;
      if (best - pl.value < 1e-14) {
        best = std::min(best, pl.value);
        break;
      }
      best = pl.value;
    }
    ++res.starts;
    const double val = min_eigenvalue(omin_pencil(x, lambda));
    if (val < res.value) {
      res.value = val;
      res.witness = lambda;
    }
    if (res.value < -tol.eps * scale) {
      res.verdict = OminVerdict::kOutside;
      res.exact = true;
      return res;
    }
  }
  res.verdict = OminVerdict::kUnknown;
  return res;
}

// ---------------------------------------------------------------------------
// OMAX certificates: X = alpha (sum_i a_i (x) x_i) alpha^* with a_i PSD and
// x_i positive in V.

struct OmaxTerm {
  Matrix coefficient;  // k x k scalar matrix
  AouElement element;
};

struct OmaxCertificate {
  std::size_t n = 1;
  std::vector<OmaxTerm> terms;
  std::optional<Matrix> compression;  // n x k
};

struct CertificateCheck {
  bool accepted = false;
  std::string reason;
  explicit operator bool() const { return accepted; }
};

inline Matrix omax_reconstruct(const OmaxCertificate& cert) {
  if (cert.terms.empty()) throw DimensionError("omax certificate has no terms");
  const SystemPtr& sys = cert.terms.front().element.system();
  const auto k = cert.terms.front().coefficient.rows();
  const std::size_t d = sys->ambient_dim();
  Matrix sum = Matrix::Zero(k * static_cast<Eigen::Index>(d),
                            k * static_cast<Eigen::Index>(d));
  for (const OmaxTerm& t : cert.terms) {
    if (t.coefficient.rows() != k || t.coefficient.cols() != k) {
      throw DimensionError("omax certificate: coefficient blocks differ in size");
    }
    if (!same_system(t.element.system(), sys)) {
      throw Error("omax certificate: terms from different systems");
    }
    sum += kron(t.coefficient, t.element.matrix());
  }
  if (cert.compression) {
    const Matrix& a = *cert.compression;
    if (static_cast<std::size_t>(a.rows()) != cert.n || a.cols() != k) {
      throw DimensionError("omax certificate: compression must be n x k");
    }
    const Matrix big = kron(a, identity(d));
    return big * sum * big.adjoint();
  }
  if (static_cast<std::size_t>(k) != cert.n) {
    throw DimensionError("omax certificate: coefficient size differs from n");
  }
  return sum;
}

/// Verifies a membership certificate for the OMAX cone; this is a verifier,
/// not a membership oracle.
inline CertificateCheck omax_certificate_check(const OmaxCertificate& cert,
                                               const ElementArray& claimed,
                                               Tolerance tol = {}) {
  if (claimed.n() != cert.n) {
    throw DimensionError("omax certificate: claimed array has size " +
                         std::to_string(claimed.n()) + ", certificate n = " +
                         std::to_string(cert.n));
  }
  for (std::size_t i = 0; i < cert.terms.size(); ++i) {
    const OmaxTerm& t = cert.terms[i];
    if (!same_system(t.element.system(), claimed.system())) {
      throw Error("omax certificate: term element from a different system");
    }
    if (!is_psd(t.coefficient, tol)) {
      return {false, "coefficient " + std::to_string(i + 1) + " is not PSD"};
    }
    if (!t.element.is_positive(tol)) {
      return {false, "element " + std::to_string(i + 1) + " is not positive"};
    }
  }
  const Matrix rebuilt = omax_reconstruct(cert);
  if (!approx_equal(rebuilt, claimed.assembled(), tol)) {
    return {false, "reconstruction differs from the claimed array"};
  }
  return {true, ""};
}

}  // namespace osys
