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
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "osys/indlimit.hpp"
#include "osys/matcore.hpp"
#include "osys/opsys.hpp"
#include "osys/random.hpp"
#include "osys/uhf/canonical_embed.hpp"

namespace osys {

/// S (x)_min T realized inside M_{d e}; ambient index i * e + s.
struct MinTensorSystem {
  SystemPtr left;
  SystemPtr right;
  SystemPtr system;
};

inline MinTensorSystem min_tensor(const SystemPtr& left, const SystemPtr& right) {
  const std::size_t d = left->ambient_dim();
  const std::size_t e = right->ambient_dim();
  if (left->has_pattern() && right->has_pattern()) {
    // Kronecker products of matrix units span exactly the product pattern.
    ConcreteOpSys::Pairs pairs;
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        if (!left->in_pattern(i, j)) continue;
        for (std::size_t s = 0; s < e; ++s) {
          for (std::size_t t = 0; t < e; ++t) {
            const std::size_t a = i * e + s;
            const std::size_t b = j * e + t;
            if (a < b && right->in_pattern(s, t)) pairs.emplace_back(a, b);
          }
        }
      }
    }
    return {left, right, make_system(ConcreteOpSys::from_pattern(d * e, std::move(pairs)))};
  }
  std::vector<Matrix> basis;
  std::size_t unit = 0;
  for (std::size_t a = 0; a < left->dim(); ++a) {
    for (std::size_t b = 0; b < right->dim(); ++b) {
      if (a == left->unit_index() && b == right->unit_index()) unit = basis.size();
      basis.push_back(kron(left->basis_element(a), right->basis_element(b)));
    }
  }
  return {left, right, make_system(ConcreteOpSys::validate(std::move(basis), unit))};
}

/// (f (x) id_T)^{(n)} for a star-hom f: M_d -> M_{l d}, on an assembled
/// n x n array with (d e) x (d e) blocks.
inline Matrix tensor_push(const CpMap& f, std::size_t e, std::size_t n,
                          const Matrix& assembled) {
  const auto* h = std::get_if<StarHom>(&f.kind());
  if (!h) throw Error("tensor_push: only star-homomorphisms are supported");
  const std::size_t d = f.source()->ambient_dim();
  const std::size_t de = d * e;
  const std::size_t out_b = de * h->multiplicity;
  if (static_cast<std::size_t>(assembled.rows()) != n * de) {
    throw DimensionError("tensor_push: assembled matrix dimension mismatch");
  }
  Matrix conj;
  if (h->unitary.size() != 0) conj = kron(h->unitary, identity(e));
  Matrix out(static_cast<Eigen::Index>(n * out_b), static_cast<Eigen::Index>(n * out_b));
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      // (i, s) blocks of size e move as whole entries of M_d.
      Matrix y = uhf::canonical_embed(block_of(assembled, de, a, b), h->multiplicity);
      if (conj.size() != 0) y = conj * y * conj.adjoint();
      out.block(static_cast<Eigen::Index>(a * out_b), static_cast<Eigen::Index>(b * out_b),
                static_cast<Eigen::Index>(out_b), static_cast<Eigen::Index>(out_b)) = y;
    }
  }
  return out;
}

inline Matrix tensor_push(const Tower& t, std::size_t k, std::size_t m, std::size_t e,
                          std::size_t n, const Matrix& assembled) {
  Matrix x = assembled;
  for (std::size_t j = k; j < m; ++j) x = tensor_push(*t.map(j), e, n, x);
  return x;
}

namespace detail {

/// Random hermitian element of M_n(sys).
inline Matrix random_hermitian_array(const ConcreteOpSys& sys, std::size_t n,
                                     Sampler& rng) {
  const std::size_t d = sys.ambient_dim();
  const auto di = static_cast<Eigen::Index>(d);
  Matrix a(static_cast<Eigen::Index>(n * d), static_cast<Eigen::Index>(n * d));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      Vector c(static_cast<Eigen::Index>(sys.dim()));
      for (Eigen::Index t = 0; t < c.size(); ++t) {
        c(t) = Complex(rng.normal(), i == j ? 0.0 : rng.normal());
      }
      Matrix blk = sys.realize(c);
      if (i == j) blk = hermitian_part(blk);
      a.block(static_cast<Eigen::Index>(i) * di, static_cast<Eigen::Index>(j) * di, di, di) =
          blk;
      if (i != j) {
        a.block(static_cast<Eigen::Index>(j) * di, static_cast<Eigen::Index>(i) * di, di,
                di) = blk.adjoint();
      }
    }
  }
  return a;
}

/// Shifts h so that its smallest eigenvalue is exactly `target`.
inline Matrix with_min_eigenvalue(const Matrix& h, double target) {
  return h + (target - min_eigenvalue(h)) * identity(static_cast<std::size_t>(h.rows()));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Min commutation.

struct MinSample {
  std::size_t level = 0;
  std::size_t n = 0;
  double min_eigenvalue = 0.0;  // of the level-k array
  bool member = false;
  std::vector<std::size_t> probed;
  std::vector<bool> agreed;
};

struct MinCommutationReport {
  std::uint64_t seed = 0;
  std::size_t samples = 0;
  std::size_t comparisons = 0;
  std::size_t agreements = 0;
  std::size_t disagreements = 0;
  std::vector<MinSample> details;
};

/// For sampled hermitian X over S_k (x) T, membership in M_n(S_k (x)_min T)
/// must match membership of its push-forward in M_n(S_m (x)_min T), m > k.
inline MinCommutationReport verify_min_commutation(const TowerPtr& tower,
                                                   const SystemPtr& t,
                                                   std::size_t samples,
                                                   std::size_t levels,
                                                   std::size_t n_max = 2,
                                                   Tolerance tol = {},
                                                   std::uint64_t seed = 0) {
  if (!tower->embedding_flag()) {
    throw Error("verify_min_commutation: the tower's maps must be complete order "
                "embeddings");
  }
  if (levels < 2) throw Error("verify_min_commutation: need at least two levels");
  const std::size_t top = tower->top_level(levels);
  if (top < 2) throw Error("verify_min_commutation: tower has a single level");
  std::vector<MinTensorSystem> tensors;
  for (std::size_t k = 1; k <= top; ++k) tensors.push_back(min_tensor(tower->level(k), t));

  MinCommutationReport rep;
  rep.seed = seed;
  rep.samples = samples;
  Sampler rng(seed);
  const std::size_t e = t->ambient_dim();
  for (std::size_t s = 0; s < samples; ++s) {
    MinSample ms;
    ms.level = 1 + rng.index(top - 1);
    ms.n = 1 + rng.index(n_max);
    const auto& sk = tensors[ms.level - 1].system;
    Matrix h = detail::random_hermitian_array(*sk, ms.n, rng);
    // Keep the smallest eigenvalue well away from zero on either side.
    const double margin = 0.05 * std::max(1.0, op_norm(h));
    h = detail::with_min_eigenvalue(h, rng.uniform() < 0.5 ? margin : -margin);
    ms.min_eigenvalue = min_eigenvalue(h);
    ms.member = cone_contains(
        sk, ElementArray::from_assembled(sk, ms.n, h, Tolerance(1e-8)), tol);
    Matrix x = h;
    for (std::size_t m = ms.level + 1; m <= top; ++m) {
      x = tensor_push(*tower->map(m - 1), e, ms.n, x);
      const auto& tm = tensors[m - 1].system;
      bool agree = false;
      try {
        agree = cone_contains(tm, ElementArray::from_assembled(tm, ms.n, x, Tolerance(1e-8)),
                              tol) == ms.member;
      } catch (const Error&) {
        agree = false;  // push-forward left the level-m tensor system
      }
      ms.probed.push_back(m);
      ms.agreed.push_back(agree);
      ++rep.comparisons;
      ++(agree ? rep.agreements : rep.disagreements);
    }
    rep.details.push_back(std::move(ms));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Max certificates: X = sum_i alpha_i (C_i (x) D_i) alpha_i^*, C_i positive in
// M_p(S), D_i positive in M_q(T), alpha_i in M_{n, p q}.

struct MaxTerm {
  Matrix alpha;
  ElementArray left;
  ElementArray right;
};

struct MaxCertificate {
  std::size_t n = 1;
  std::vector<MaxTerm> terms;
};

/// C (x) D in M_{pq}(S (x) T), entry ((a,c),(b,f)) = C_{a,b} (x) D_{c,f}.
inline Matrix array_tensor(const ElementArray& c, const ElementArray& dm) {
  const std::size_t p = c.n();
  const std::size_t q = dm.n();
  const std::size_t d = c.block_dim();
  const std::size_t e = dm.block_dim();
  const auto de = static_cast<Eigen::Index>(d * e);
  Matrix out(static_cast<Eigen::Index>(p * q) * de, static_cast<Eigen::Index>(p * q) * de);
  for (std::size_t a = 0; a < p; ++a) {
    for (std::size_t b = 0; b < p; ++b) {
      const Matrix cab = c.entry(a, b);
      for (std::size_t cc = 0; cc < q; ++cc) {
        for (std::size_t f = 0; f < q; ++f) {
          out.block(static_cast<Eigen::Index>(a * q + cc) * de,
                    static_cast<Eigen::Index>(b * q + f) * de, de, de) =
              kron(cab, dm.entry(cc, f));
        }
      }
    }
  }
  return out;
}

inline Matrix max_reconstruct(const MaxCertificate& cert) {
  if (cert.terms.empty()) throw DimensionError("max certificate has no terms");
  const std::size_t de =
      cert.terms[0].left.block_dim() * cert.terms[0].right.block_dim();
  Matrix sum = Matrix::Zero(static_cast<Eigen::Index>(cert.n * de),
                            static_cast<Eigen::Index>(cert.n * de));
  for (const MaxTerm& term : cert.terms) {
    const std::size_t pq = term.left.n() * term.right.n();
    if (static_cast<std::size_t>(term.alpha.rows()) != cert.n ||
        static_cast<std::size_t>(term.alpha.cols()) != pq) {
      throw DimensionError("max certificate: alpha must be n x pq");
    }
    if (term.left.block_dim() * term.right.block_dim() != de) {
      throw DimensionError("max certificate: terms over different ambient sizes");
    }
    const Matrix big = kron(term.alpha, identity(de));
    sum += big * array_tensor(term.left, term.right) * big.adjoint();
  }
  return sum;
}

inline CertificateCheck max_certificate_check(const MaxCertificate& cert,
                                              const Matrix& claimed,
                                              Tolerance tol = {}) {
  for (std::size_t i = 0; i < cert.terms.size(); ++i) {
    const MaxTerm& term = cert.terms[i];
    if (!is_psd(term.left.assembled(), tol)) {
      return {false, "left factor " + std::to_string(i + 1) + " is not positive"};
    }
    if (!is_psd(term.right.assembled(), tol)) {
      return {false, "right factor " + std::to_string(i + 1) + " is not positive"};
    }
  }
  const Matrix rebuilt = max_reconstruct(cert);
  if (!approx_equal(rebuilt, claimed, tol)) {
    return {false, "reconstruction differs from the claimed array"};
  }
  return {true, ""};
}

/// Pushes every left factor from level k to level m.
inline MaxCertificate max_certificate_transport(const MaxCertificate& cert,
                                                const Tower& tower, std::size_t k,
                                                std::size_t m, Tolerance tol = {}) {
  for (std::size_t i = 0; i < cert.terms.size(); ++i) {
    const MaxTerm& term = cert.terms[i];
    if (!same_system(term.left.system(), tower.level(k))) {
      throw Error("max certificate: left factor " + std::to_string(i + 1) +
                  " is not over level " + std::to_string(k));
    }
    if (!is_psd(term.left.assembled(), tol) || !is_psd(term.right.assembled(), tol)) {
      throw Error("max certificate: term " + std::to_string(i + 1) +
                  " has a non-positive factor");
    }
  }
  MaxCertificate out{cert.n, {}};
  for (const MaxTerm& term : cert.terms) {
    const std::size_t p = term.left.n();
    out.terms.push_back(MaxTerm{
        term.alpha,
        ElementArray::from_assembled(tower.level(m), p,
                                     tower.push(k, m, p, term.left.assembled()),
                                     Tolerance(1e-8)),
        term.right});
  }
  return out;
}

struct MaxCommutationReport {
  std::uint64_t seed = 0;
  std::size_t certificates = 0;
  std::size_t transports = 0;         // (certificate, level) pairs checked
  std::size_t verified = 0;
  std::size_t rejected_valid = 0;     // must stay zero
  std::size_t injected = 0;
  std::size_t injected_rejected = 0;  // corrupted samples caught
  std::size_t false_accepts = 0;      // corrupted samples accepted
  std::size_t elementary = 0;
  std::size_t elementary_certified = 0;
  std::size_t elementary_not_positive = 0;
  std::size_t elementary_failed = 0;  // positive but no certificate verified
};

struct MaxHarness {
  std::size_t samples = 200;
  std::size_t levels = 3;
  /// Every k-th certificate is corrupted (0 disables).
  std::size_t corrupt_every = 0;
};

namespace detail {

inline ElementArray random_positive_array(const SystemPtr& sys, std::size_t n,
                                          Sampler& rng, double margin) {
  Matrix h = random_hermitian_array(*sys, n, rng);
  h = with_min_eigenvalue(h, margin);
  return ElementArray::from_assembled(sys, n, std::move(h), Tolerance(1e-8));
}

}  // namespace detail

inline MaxCommutationReport verify_max_commutation(const TowerPtr& tower,
                                                   const SystemPtr& t,
                                                   MaxHarness harness = MaxHarness(),
                                                   Tolerance tol = {},
                                                   std::uint64_t seed = 0) {
  MaxCommutationReport rep;
  rep.seed = seed;
  Sampler rng(seed);
  const std::size_t top = tower->top_level(std::max<std::size_t>(harness.levels, 1));
  const std::size_t e = t->ambient_dim();

  // (1) transport of sampled certificates.
  for (std::size_t s = 0; s < harness.samples; ++s) {
    const std::size_t k = top > 1 ? 1 + rng.index(top - 1) : 1;
    const std::size_t n = 1 + rng.index(2);
    MaxCertificate cert{n, {}};
    const std::size_t terms = 1 + rng.index(3);
    for (std::size_t i = 0; i < terms; ++i) {
      const std::size_t p = 1 + rng.index(2);
      const std::size_t q = 1 + rng.index(2);
      cert.terms.push_back(MaxTerm{rng.gaussian(n, p * q),
                                   detail::random_positive_array(tower->level(k), p, rng, 0.0),
                                   detail::random_positive_array(t, q, rng, 0.0)});
    }
    const bool corrupt =
        harness.corrupt_every != 0 && (s + 1) % harness.corrupt_every == 0;
    if (corrupt) {
      ++rep.injected;
      MaxTerm& victim = cert.terms[rng.index(cert.terms.size())];
      const Matrix bad = detail::with_min_eigenvalue(
          hermitian_part(victim.left.assembled()), -0.5);
      victim.left = ElementArray::from_assembled(victim.left.system(), victim.left.n(),
                                                 bad, Tolerance(1e-8));
      if (max_certificate_check(cert, max_reconstruct(cert), tol)) {
        ++rep.false_accepts;
      } else {
        ++rep.injected_rejected;
      }
      continue;
    }
    ++rep.certificates;
    Matrix pushed = max_reconstruct(cert);
    for (std::size_t m = k; m <= top; ++m) {
      if (m > k) pushed = tensor_push(*tower->map(m - 1), e, n, pushed);
      ++rep.transports;
      bool ok = false;
      try {
        ok = static_cast<bool>(max_certificate_check(
            max_certificate_transport(cert, *tower, k, m, tol), pushed, tol));
      } catch (const Error&) {
        ok = false;
      }
      ++(ok ? rep.verified : rep.rejected_valid);
    }
  }

  // (2) elementary tensors P (x) Q.
  for (std::size_t s = 0; s < harness.samples; ++s) {
    const std::size_t k = 1 + rng.index(top);
    const std::size_t p = 1 + rng.index(2);
    const std::size_t q = 1 + rng.index(2);
    const SystemPtr sk = tower->level(k);
    Matrix hp = detail::random_hermitian_array(*sk, p, rng);
    // A quarter of the P samples are not positive and must be refused.
    const double margin = 0.05 * std::max(1.0, op_norm(hp));
    hp = detail::with_min_eigenvalue(hp, rng.uniform() < 0.25 ? -margin : 0.0);
    const ElementArray pa = ElementArray::from_assembled(sk, p, hp, Tolerance(1e-8));
    const ElementArray qa = detail::random_positive_array(t, q, rng, 0.0);
    ++rep.elementary;
    const PositivityResult pos =
        limit_positive(LimitElement{tower, k, pa}, kDefaultHorizon, tol);
    if (pos.verdict != Positivity::kPositive) {
      ++rep.elementary_not_positive;
      continue;
    }
    // Certificate at the level where positivity was seen, shifted by the
    // smallest passing rung when the ladder was needed.
    std::size_t level = k;
    double shift = 0.0;
    if (pos.method == "r-ladder") {
      level = *pos.ladder.back().passed_at;
      shift = pos.ladder.back().r;
    }
    Matrix left = tower->push(k, level, p, hp);
    left += shift * identity(static_cast<std::size_t>(left.rows()));
    const ElementArray la =
        ElementArray::from_assembled(tower->level(level), p, left, Tolerance(1e-8));
    MaxCertificate cert{p * q, {MaxTerm{identity(p * q), la, qa}}};
    // Claimed element via the other route: push P (x) Q through f (x) id_T,
    // then add the shift r (1 (x) Q).
    Matrix claimed = tensor_push(*tower, k, level, e, p * q, array_tensor(pa, qa));
    if (shift != 0.0) {
      claimed += shift * array_tensor(ElementArray::unit(tower->level(level), p), qa);
    }
    if (max_certificate_check(cert, claimed, tol)) {
      ++rep.elementary_certified;
    } else {
      ++rep.elementary_failed;
    }
  }
  return rep;
}

}  // namespace osys
