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
#include <cmath>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "osys/matcore.hpp"
#include "osys/opsys.hpp"

namespace osys {

class LevelError : public Error {
 public:
  using Error::Error;
};

/// Produces level next_level and the map into it from the last system, or
/// nothing when the tower cannot be extended further.
using TailStep = std::optional<std::pair<SystemPtr, CpMap>>;
using TailRule =
    std::function<TailStep(const SystemPtr& last, std::size_t next_level)>;

struct TowerOptions {
  std::size_t cap = 32;
  /// Levels whose ambient dimension would exceed this are not realized.
  std::size_t max_ambient = 512;
  /// Promise that the tail produces star-homomorphisms only.
  bool tail_is_embedding = false;
};

/// S_1 -> S_2 -> ... with an explicit prefix and an optional tail rule that
/// extends the tower on demand (up to cap levels). Levels are 1-based.
class Tower {
 public:
  using Options = TowerOptions;

  Tower(std::vector<SystemPtr> levels, std::vector<CpMap> maps,
        TailRule tail = {}, Options opts = Options())
      : levels_(std::move(levels)), tail_(std::move(tail)), opts_(opts) {
    if (levels_.empty()) throw LevelError("tower needs at least one level");
    if (maps.size() + 1 != levels_.size()) {
      throw LevelError("tower with " + std::to_string(levels_.size()) +
                       " levels needs " + std::to_string(levels_.size() - 1) +
                       " maps, got " + std::to_string(maps.size()));
    }
    if (opts_.cap < levels_.size()) opts_.cap = levels_.size();
    explicit_ = levels_.size();
    explicit_embedding_ = true;
    for (std::size_t k = 0; k < maps.size(); ++k) {
      check_map(maps[k], levels_[k], levels_[k + 1], k + 1);
      explicit_embedding_ = explicit_embedding_ && maps[k].is_star_hom();
      maps_.push_back(std::make_shared<const CpMap>(std::move(maps[k])));
    }
  }

  Tower(const Tower&) = delete;
  Tower& operator=(const Tower&) = delete;

  bool has_tail() const { return static_cast<bool>(tail_); }
  std::size_t explicit_levels() const { return explicit_count(); }
  std::size_t cap() const { return has_tail() ? opts_.cap : explicit_count(); }

  /// True when every connecting map is a star-homomorphism, hence a complete
  /// order embedding.
  bool embedding_flag() const {
    return explicit_embedding_ && (!has_tail() || opts_.tail_is_embedding);
  }

  /// Level k, or nullptr when it lies past the cap or the dimension guard.
  SystemPtr try_level(std::size_t k) const {
    if (k == 0) throw LevelError("levels are numbered from 1");
    std::lock_guard<std::mutex> lock(mu_);
    extend_locked(k);
    return k <= levels_.size() ? levels_[k - 1] : nullptr;
  }

  SystemPtr level(std::size_t k) const {
    SystemPtr s = try_level(k);
    if (!s) throw LevelError("level " + std::to_string(k) + " is not realizable");
    return s;
  }

  /// The map from level k to level k+1.
  std::shared_ptr<const CpMap> map(std::size_t k) const {
    if (!try_level(k + 1)) {
      throw LevelError("level " + std::to_string(k + 1) + " is not realizable");
    }
    std::lock_guard<std::mutex> lock(mu_);
    return maps_[k - 1];
  }

  /// Highest realizable level not above `horizon`.
  std::size_t top_level(std::size_t horizon) const {
    std::size_t m = 1;
    while (m < horizon && try_level(m + 1)) ++m;
    return m;
  }

  /// True when no level exists past `k` (a finite tower ending at k).
  bool ends_at(std::size_t k) const {
    return !has_tail() && k >= explicit_count();
  }

  /// phi_{k,m}^{(n)} on an assembled n x n array over level k.
  Matrix push(std::size_t k, std::size_t m, std::size_t n,
              const Matrix& assembled) const {
    if (m < k) throw LevelError("cannot push to a lower level");
    Matrix x = assembled;
    for (std::size_t j = k; j < m; ++j) x = map(j)->apply_blocks(n, x);
    return x;
  }

 private:
  std::size_t explicit_count() const {
    std::lock_guard<std::mutex> lock(mu_);
    return explicit_;
  }

  static void check_map(const CpMap& f, const SystemPtr& s, const SystemPtr& t,
                        std::size_t k) {
    if (!same_system(f.source(), s) || !same_system(f.target(), t)) {
      throw LevelError("map " + std::to_string(k) +
                       " does not connect levels " + std::to_string(k) +
                       " and " + std::to_string(k + 1));
    }
  }

  void extend_locked(std::size_t k) const {
    while (levels_.size() < k && tail_ && !exhausted_ &&
           levels_.size() < opts_.cap) {
      const std::size_t next = levels_.size() + 1;
      TailStep step = tail_(levels_.back(), next);
      if (!step || step->first->ambient_dim() > opts_.max_ambient) {
        exhausted_ = true;
        break;
      }
      auto& [sys, f] = *step;
      check_map(f, levels_.back(), sys, next - 1);
      if (opts_.tail_is_embedding && !f.is_star_hom()) {
        throw LevelError("tail rule declared as embedding produced a linear map");
      }
      levels_.push_back(std::move(sys));
      maps_.push_back(std::make_shared<const CpMap>(std::move(f)));
    }
  }

  mutable std::mutex mu_;
  mutable std::vector<SystemPtr> levels_;
  mutable std::vector<std::shared_ptr<const CpMap>> maps_;
  mutable std::size_t explicit_ = 0;
  mutable bool exhausted_ = false;
  TailRule tail_;
  Options opts_;
  bool explicit_embedding_ = true;
};

using TowerPtr = std::shared_ptr<const Tower>;

/// Tail that repeats a self-map S -> S forever.
inline TailRule repeat_tail(const CpMap& f) {
  if (!same_system(f.source(), f.target())) {
    throw LevelError("repeat tail needs a map from a system to itself");
  }
  return [f](const SystemPtr&, std::size_t) -> TailStep {
    return std::make_pair(f.target(), f);
  };
}

/// Tail M_d -> M_{d l} by canonical embeddings, cycling through `period`.
inline TailRule full_matrix_tail(std::vector<std::size_t> period,
                                 std::size_t prefix_levels) {
  if (period.empty()) throw LevelError("empty multiplicity period");
  return [period = std::move(period), prefix_levels](const SystemPtr& last,
                                                     std::size_t next) -> TailStep {
    const std::size_t l = period[(next - 1 - prefix_levels) % period.size()];
    auto sys = make_system(ConcreteOpSys::full(last->ambient_dim() * l));
    return std::make_pair(sys, CpMap::star_hom(last, sys, l));
  };
}

// ---------------------------------------------------------------------------

struct LimitElement {
  TowerPtr tower;
  std::size_t level = 1;
  ElementArray value;
};

inline LimitElement make_limit_element(TowerPtr tower, std::size_t level,
                                       ElementArray value) {
  if (!same_system(tower->level(level), value.system())) {
    throw LevelError("element does not belong to level " + std::to_string(level));
  }
  return LimitElement{std::move(tower), level, std::move(value)};
}

inline LimitElement push_forward(const LimitElement& e, std::size_t m) {
  if (m < e.level) {
    throw LevelError("push_forward to level " + std::to_string(m) +
                     " below the element's level " + std::to_string(e.level));
  }
  if (m == e.level) return e;
  const Tower& t = *e.tower;
  Matrix x = t.push(e.level, m, e.value.n(), e.value.assembled());
  return LimitElement{e.tower, m,
                      ElementArray::from_assembled(t.level(m), e.value.n(),
                                                   std::move(x), Tolerance(1e-8))};
}

/// A state on M_n(S_k), x -> Tr(density x).
struct LevelState {
  std::size_t level = 1;
  std::size_t n = 1;
  Matrix density;

  static LevelState make(std::size_t level, std::size_t n, Matrix density,
                         Tolerance tol = Tolerance(1e-8)) {
    require_square(density, "density");
    if (!is_psd(density, tol)) throw Error("state density is not PSD");
    if (std::abs(density.trace() - Complex(1.0)) > tol.eps * 10) {
      throw Error("state density does not have trace 1");
    }
    return LevelState{level, n, std::move(density)};
  }

  Complex evaluate(const Matrix& x) const { return (density * x).trace(); }
};

namespace detail {

/// Level-k representative of Y (an e x e block over level k+1) under the
/// dual of f: Tr(out x) = Tr(Y f(x)) for x in the source span.
inline Matrix pull_block(const CpMap& f, const Matrix& y) {
  if (f.is_star_hom()) return f.adjoint_apply(y);
  const auto& basis = f.source()->basis();
  const auto m = static_cast<Eigen::Index>(basis.size());
  Matrix gram(m, m);
  Vector rhs(m);
  for (Eigen::Index t = 0; t < m; ++t) {
    const auto ti = static_cast<std::size_t>(t);
    for (Eigen::Index s = 0; s < m; ++s) {
      gram(t, s) = (basis[static_cast<std::size_t>(s)] * basis[ti]).trace();
    }
    rhs(t) = (y * f.apply(basis[ti])).trace();
  }
  const Vector c = gram.ldlt().solve(rhs);
  return f.source()->realize(c);
}

}  // namespace detail

/// The state x -> Tr(f.density phi_{k,m}^{(n)}(x)) as a level-k density.
inline LevelState pullback_state(const Tower& tower, const LevelState& f,
                                 std::size_t k) {
  if (k == 0 || k > f.level) {
    throw LevelError("pullback from level " + std::to_string(f.level) +
                     " to level " + std::to_string(k) + " is out of range");
  }
  Matrix rho = f.density;
  for (std::size_t j = f.level; j > k; --j) {
    const auto map = tower.map(j - 1);
    const std::size_t e = map->target()->ambient_dim();
    const std::size_t d = map->source()->ambient_dim();
    if (static_cast<std::size_t>(rho.rows()) != f.n * e) {
      throw DimensionError("state density does not match level " +
                           std::to_string(j));
    }
    Matrix next(static_cast<Eigen::Index>(f.n * d), static_cast<Eigen::Index>(f.n * d));
    for (std::size_t a = 0; a < f.n; ++a) {
      for (std::size_t b = 0; b < f.n; ++b) {
        // Tr(rho X) pairs block (a,b) of rho with block (b,a) of X.
        next.block(static_cast<Eigen::Index>(a * d), static_cast<Eigen::Index>(b * d),
                   static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d)) =
            detail::pull_block(*map, block_of(rho, e, a, b));
      }
    }
    rho = std::move(next);
  }
  if (!is_psd(rho, Tolerance(1e-8))) {
    throw Error("pulled-back functional has no positive density in the span "
                "of level " + std::to_string(k));
  }
  return LevelState{k, f.n, std::move(rho)};
}

inline LevelState pullback_state(const TowerPtr& tower, const LevelState& f,
                                 std::size_t k) {
  return pullback_state(*tower, f, k);
}

// ---------------------------------------------------------------------------
// Limit norms, null space, equality, positivity.

inline constexpr std::size_t kDefaultHorizon = 32;

struct DecayFit {
  bool certified = false;
  double ratio = 1.0;
  double projected = 0.0;  // geometric projection of the norm to the cap
};

/// Needs >= 3 trailing ratios below 1 - 1e-6 and the geometric projection
/// of the last norm out to `cap` within tol.
inline DecayFit certify_decay(const std::vector<double>& norms,
                              std::size_t last_level, std::size_t cap,
                              Tolerance tol) {
  DecayFit fit;
  if (norms.size() < 4) return fit;
  double worst = 0.0;
  for (std::size_t i = norms.size() - 3; i < norms.size(); ++i) {
    if (norms[i - 1] <= 0.0) return fit;
    const double r = norms[i] / norms[i - 1];
    if (!(r < 1.0 - 1e-6)) return fit;
    worst = std::max(worst, r);
  }
  fit.ratio = worst;
  const double steps = cap > last_level ? static_cast<double>(cap - last_level) : 0.0;
  fit.projected = norms.back() * std::pow(worst, steps);
  fit.certified = fit.projected <= tol.eps;
  return fit;
}

namespace detail {

inline double array_norm(const Matrix& a) { return op_norm(a); }

struct Trajectory {
  std::vector<std::size_t> levels;
  std::vector<Matrix> values;
  std::vector<double> norms;
};

inline Trajectory trajectory(const LimitElement& e, std::size_t horizon) {
  const Tower& t = *e.tower;
  Trajectory tr;
  const std::size_t top = std::max(e.level, t.top_level(horizon));
  Matrix x = e.value.assembled();
  for (std::size_t m = e.level;; ++m) {
    tr.levels.push_back(m);
    tr.norms.push_back(array_norm(x));
    tr.values.push_back(x);
    if (m >= top) break;
    x = t.map(m)->apply_blocks(e.value.n(), x);
  }
  return tr;
}

inline bool stabilized(const std::vector<double>& v, Tolerance tol) {
  if (v.size() < 3) return false;
  const std::size_t s = v.size();
  return std::abs(v[s - 1] - v[s - 2]) <= tol.eps &&
         std::abs(v[s - 2] - v[s - 3]) <= tol.eps;
}

}  // namespace detail

struct LimitNorm {
  bool is_value = true;
  double value = 0.0;  // set when is_value
  double lo = 0.0;     // bracket otherwise
  double hi = 0.0;
  std::string method;
  std::vector<double> sequence;
};

inline LimitNorm limit_norm(const LimitElement& e,
                            std::size_t horizon = kDefaultHorizon,
                            Tolerance tol = {}) {
  LimitNorm out;
  const Tower& t = *e.tower;
  if (t.embedding_flag()) {
    out.value = out.lo = out.hi = detail::array_norm(e.value.assembled());
    out.sequence = {out.value};
    out.method = "embedding";
    return out;
  }
  const auto tr = detail::trajectory(e, horizon);
  out.sequence = tr.norms;
  const double last = tr.norms.back();
  if (t.ends_at(tr.levels.back())) {
    out.value = out.lo = out.hi = last;
    out.method = "terminal-level";
    return out;
  }
  if (last <= tol.eps) {
    out.value = out.lo = 0.0;
    out.hi = last;
    out.method = "reached-tolerance";
    return out;
  }
  const DecayFit fit = certify_decay(tr.norms, tr.levels.back(), t.cap(), tol);
  if (fit.certified) {
    out.value = out.lo = 0.0;
    out.hi = last;
    out.method = "geometric-decay";
    return out;
  }
  if (detail::stabilized(tr.norms, tol)) {
    out.value = out.lo = out.hi = last;
    out.method = "stabilized";
    return out;
  }
  out.is_value = false;
  out.lo = 0.0;
  out.hi = last;
  out.method = "bracket";
  return out;
}

enum class Trilean { kYes, kNo, kUndetermined };

inline const char* to_string(Trilean v) {
  switch (v) {
    case Trilean::kYes: return "Yes";
    case Trilean::kNo: return "No";
    case Trilean::kUndetermined: return "Undetermined";
  }
  return "?";
}

struct NullSpaceResult {
  Trilean verdict = Trilean::kUndetermined;
  std::string method;
  std::vector<double> sequence;
  std::optional<LevelState> witness;
  double witness_value = 0.0;
};

inline NullSpaceResult null_space_member(const LimitElement& e,
                                         std::size_t horizon = kDefaultHorizon,
                                         Tolerance tol = {}) {
  NullSpaceResult out;
  const Tower& t = *e.tower;
  const double n0 = detail::array_norm(e.value.assembled());
  if (n0 <= tol.eps) {
    out.verdict = Trilean::kYes;
    out.method = "zero";
    out.sequence = {n0};
    return out;
  }
  if (t.embedding_flag()) {
    out.verdict = Trilean::kNo;
    out.method = "embedding";
    out.sequence = {n0};
    return out;
  }
  const auto tr = detail::trajectory(e, horizon);
  out.sequence = tr.norms;
  const double last = tr.norms.back();
  if (last <= tol.eps) {
    out.verdict = Trilean::kYes;
    out.method = "reached-tolerance";
    return out;
  }
  if (t.ends_at(tr.levels.back())) {
    out.verdict = Trilean::kNo;
    out.method = "terminal-level";
    return out;
  }
  if (certify_decay(tr.norms, tr.levels.back(), t.cap(), tol).certified) {
    out.verdict = Trilean::kYes;
    out.method = "geometric-decay";
    return out;
  }
  // A vector state at the top level on which the hermitian (or skew) part
  // stays away from zero, with the norm sequence settled.
  const Matrix& top = tr.values.back();
  const Matrix herm = hermitian_part(top);
  const Matrix skew = (top - top.adjoint()) * Complex(0.0, -0.5);
  const EigenPair ph = max_abs_eigenpair(herm);
  const EigenPair ps = max_abs_eigenpair(skew);
  const EigenPair& p = std::abs(ph.value) >= std::abs(ps.value) ? ph : ps;
  const double delta = std::max(1e-6, 10.0 * tol.eps);
  if (std::abs(p.value) >= delta && detail::stabilized(tr.norms, tol)) {
    LevelState top_state{tr.levels.back(), e.value.n(), p.vector * p.vector.adjoint()};
    out.witness = pullback_state(t, top_state, e.level);
    out.witness_value = p.value;
    out.verdict = Trilean::kNo;
    out.method = "witness-state";
    return out;
  }
  out.method = "undetermined";
  return out;
}

enum class LimitEquality { kEqual, kNotEqual, kUndetermined };

inline const char* to_string(LimitEquality v) {
  switch (v) {
    case LimitEquality::kEqual: return "Equal";
    case LimitEquality::kNotEqual: return "NotEqual";
    case LimitEquality::kUndetermined: return "Undetermined";
  }
  return "?";
}

struct EqualityResult {
  LimitEquality verdict = LimitEquality::kUndetermined;
  std::size_t compared_at = 0;
  NullSpaceResult difference;
};

inline EqualityResult eq_in_limit(const LimitElement& a, const LimitElement& b,
                                  std::size_t horizon = kDefaultHorizon,
                                  Tolerance tol = {}) {
  if (a.tower != b.tower) throw Error("eq_in_limit: elements of different towers");
  if (a.value.n() != b.value.n()) {
    throw DimensionError("eq_in_limit: elements at different matrix levels");
  }
  const std::size_t m = std::max(a.level, b.level);
  const LimitElement pa = push_forward(a, m);
  const LimitElement pb = push_forward(b, m);
  LimitElement diff{a.tower, m,
                    ElementArray::from_assembled(
                        pa.value.system(), pa.value.n(),
                        pa.value.assembled() - pb.value.assembled(), Tolerance(1e-8))};
  EqualityResult out;
  out.compared_at = m;
  out.difference = null_space_member(diff, std::max(horizon, m), tol);
  switch (out.difference.verdict) {
    case Trilean::kYes: out.verdict = LimitEquality::kEqual; break;
    case Trilean::kNo: out.verdict = LimitEquality::kNotEqual; break;
    case Trilean::kUndetermined: out.verdict = LimitEquality::kUndetermined; break;
  }
  return out;
}

enum class Positivity { kPositive, kNotPositive, kUndetermined };

inline const char* to_string(Positivity v) {
  switch (v) {
    case Positivity::kPositive: return "Positive";
    case Positivity::kNotPositive: return "NotPositive";
    case Positivity::kUndetermined: return "Undetermined";
  }
  return "?";
}

struct RungResult {
  double r = 0.0;
  std::optional<std::size_t> passed_at;  // first level m with r I + x_m >= 0
};

struct PositivityResult {
  Positivity verdict = Positivity::kUndetermined;
  std::string method;
  std::vector<RungResult> ladder;
  std::vector<double> min_eigenvalues;  // along the probed levels
  std::optional<LevelState> witness;    // at the element's level
  double witness_value = 0.0;
};

inline const std::vector<double>& default_ladder() {
  static const std::vector<double> ladder{1e-3, 1e-6, 1e-9};
  return ladder;
}

inline PositivityResult limit_positive(const LimitElement& e,
                                       std::size_t horizon = kDefaultHorizon,
                                       Tolerance tol = {}, double delta = 0.0) {
  if (!e.value.is_hermitian(tol)) {
    throw Error("limit_positive: element is not hermitian");
  }
  if (delta <= 0.0) delta = std::max(1e-6, 10.0 * tol.eps);
  const Tower& t = *e.tower;
  PositivityResult out;

  auto witness_from = [&](const Matrix& x, std::size_t level) {
    const EigenPair p = min_eigenpair(x);
    LevelState s{level, e.value.n(), p.vector * p.vector.adjoint()};
    out.witness = level == e.level ? s : pullback_state(t, s, e.level);
    out.witness_value = p.value;
  };

  if (t.embedding_flag() || t.ends_at(e.level)) {
    const Matrix& x = e.value.assembled();
    out.method = t.embedding_flag() ? "embedding" : "terminal-level";
    out.min_eigenvalues = {min_eigenvalue(x)};
    if (is_psd(x, tol)) {
      out.verdict = Positivity::kPositive;
    } else {
      out.verdict = Positivity::kNotPositive;
      witness_from(x, e.level);
    }
    return out;
  }

  const auto tr = detail::trajectory(e, horizon);
  for (const Matrix& x : tr.values) out.min_eigenvalues.push_back(min_eigenvalue(x));
  if (t.ends_at(tr.levels.back())) {
    const Matrix& x = tr.values.back();
    out.method = "terminal-level";
    if (is_psd(x, tol)) {
      out.verdict = Positivity::kPositive;
    } else {
      out.verdict = Positivity::kNotPositive;
      witness_from(x, tr.levels.back());
    }
    return out;
  }
  bool all = true;
  for (double r : default_ladder()) {
    RungResult rung{r, std::nullopt};
    for (std::size_t i = 0; i < tr.values.size(); ++i) {
      const double lo = out.min_eigenvalues[i];
      const double scale = std::max(1.0, tr.norms[i]);
      if (lo + r >= -tol.eps * scale) {
        rung.passed_at = tr.levels[i];
        break;
      }
    }
    all = all && rung.passed_at.has_value();
    out.ladder.push_back(rung);
  }
  if (all) {
    out.verdict = Positivity::kPositive;
    out.method = "r-ladder";
    return out;
  }
  // min eigenvalues are non-decreasing along ucp maps; a settled value below
  // -delta is taken as a persisting negative state value.
  if (out.min_eigenvalues.back() <= -delta &&
      detail::stabilized(out.min_eigenvalues, tol)) {
    out.verdict = Positivity::kNotPositive;
    out.method = "witness-state";
    witness_from(tr.values.back(), tr.levels.back());
    return out;
  }
  out.method = "undetermined";
  return out;
}

}  // namespace osys
