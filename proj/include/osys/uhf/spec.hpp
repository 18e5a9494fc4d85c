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
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "osys/uhf/relation.hpp"

namespace osys::uhf {

class SpecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

inline std::size_t checked_mul(std::size_t a, std::size_t b) {
  if (a != 0 && b > std::numeric_limits<std::size_t>::max() / a) {
    throw SpecError("dimension overflow");
  }
  return a * b;
}

inline std::map<std::uint64_t, std::uint64_t> factorize(std::uint64_t v) {
  std::map<std::uint64_t, std::uint64_t> f;
  for (std::uint64_t p = 2; p * p <= v; ++p) {
    while (v % p == 0) {
      ++f[p];
      v /= p;
    }
  }
  if (v > 1) ++f[v];
  return f;
}

}  // namespace detail

/// n_1 and the eventually periodic multiplicities l_k = n_{k+1} / n_k.
struct UhfSpec {
  std::size_t n1 = 1;
  std::vector<std::size_t> prefix;
  std::vector<std::size_t> period;

  void validate() const {
    if (n1 == 0) throw SpecError("n1 must be positive");
    if (period.empty()) throw SpecError("multiplicity period must be nonempty");
    for (std::size_t l : prefix) {
      if (l == 0) throw SpecError("multiplicities must be positive");
    }
    for (std::size_t l : period) {
      if (l == 0) throw SpecError("multiplicities must be positive");
    }
  }

  /// l_k for k >= 1.
  std::size_t multiplicity(std::size_t k) const {
    if (k == 0) throw SpecError("levels are numbered from 1");
    if (k <= prefix.size()) return prefix[k - 1];
    return period[(k - 1 - prefix.size()) % period.size()];
  }

  /// n_k; throws on overflow.
  std::size_t dim(std::size_t k) const {
    std::size_t d = n1;
    for (std::size_t j = 1; j < k; ++j) d = detail::checked_mul(d, multiplicity(j));
    return d;
  }

  std::uint64_t period_product() const {
    std::uint64_t p = 1;
    for (std::size_t l : period) p = detail::checked_mul(p, l);
    return p;
  }
};

/// Exponent map prime -> e, with std::nullopt standing for infinity.
class SupernaturalNumber {
 public:
  using Exponent = std::optional<std::uint64_t>;

  static SupernaturalNumber of(const UhfSpec& s) {
    s.validate();
    SupernaturalNumber out;
    auto add = [&](std::uint64_t v) {
      for (const auto& [p, e] : detail::factorize(v)) {
        auto& slot = out.exp_.try_emplace(p, 0).first->second;
        if (slot) *slot += e;
      }
    };
    add(s.n1);
    for (std::size_t l : s.prefix) add(l);
    for (std::size_t l : s.period) {
      for (const auto& [p, e] : detail::factorize(l)) out.exp_[p] = std::nullopt;
    }
    return out;
  }

  /// Exponent of p (0 when absent).
  Exponent exponent(std::uint64_t p) const {
    auto it = exp_.find(p);
    return it == exp_.end() ? Exponent(0) : it->second;
  }
  const std::map<std::uint64_t, Exponent>& exponents() const { return exp_; }

  /// e.g. "2^inf * 3^2".
  std::string to_string() const {
    if (exp_.empty()) return "1";
    std::string s;
    for (const auto& [p, e] : exp_) {
      if (!s.empty()) s += " * ";
      s += std::to_string(p) + "^" + (e ? std::to_string(*e) : "inf");
    }
    return s;
  }

  friend bool operator==(const SupernaturalNumber&, const SupernaturalNumber&) = default;

 private:
  std::map<std::uint64_t, Exponent> exp_;
};

struct GlimmResult {
  bool equivalent = true;
  std::uint64_t prime = 0;
  /// True when the left tower has the larger power of `prime`, so some n_w
  /// of the left tower divides no m_x of the right one.
  bool left_exceeds = false;
};

inline GlimmResult glimm_equivalent(const UhfSpec& a, const UhfSpec& b) {
  const auto sa = SupernaturalNumber::of(a);
  const auto sb = SupernaturalNumber::of(b);
  std::map<std::uint64_t, bool> primes;
  for (const auto& [p, e] : sa.exponents()) primes[p] = true;
  for (const auto& [p, e] : sb.exponents()) primes[p] = true;
  auto bigger = [](const SupernaturalNumber::Exponent& x,
                   const SupernaturalNumber::Exponent& y) {
    if (!x) return static_cast<bool>(y);
    return y && *x > *y;
  };
  for (const auto& [p, unused] : primes) {
    const auto ea = sa.exponent(p);
    const auto eb = sb.exponent(p);
    if (ea == eb) continue;
    return GlimmResult{false, p, bigger(ea, eb) || (!ea && eb)};
  }
  return GlimmResult{};
}

/// Telescopes the multiplicity stream: keeps levels 1, 1+s, 1+2s, ...
inline UhfSpec telescope(const UhfSpec& s, std::size_t stride) {
  if (stride == 0) throw SpecError("telescope stride must be positive");
  s.validate();
  // Once past the prefix, groups of `stride` repeat with period p/gcd(p,s).
  const std::size_t p = s.period.size();
  const std::size_t new_period = p / std::gcd(p, stride);
  const std::size_t new_prefix = (s.prefix.size() + stride - 1) / stride;
  UhfSpec out;
  out.n1 = s.n1;
  auto group = [&](std::size_t k) {
    std::size_t prod = 1;
    for (std::size_t j = 0; j < stride; ++j) {
      prod = detail::checked_mul(prod, s.multiplicity(1 + (k - 1) * stride + j));
    }
    return prod;
  };
  for (std::size_t k = 1; k <= new_prefix; ++k) out.prefix.push_back(group(k));
  for (std::size_t k = new_prefix + 1; k <= new_prefix + new_period; ++k) {
    out.period.push_back(group(k));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Graph towers.

struct GraphRule {
  enum class Kind { kExplicit, kLift, kEmpty, kComplete, kCliques };
  Kind kind = Kind::kLift;
  FiniteGraph graph;       // kExplicit
  std::size_t clique = 1;  // kCliques

  static GraphRule explicit_graph(FiniteGraph g) {
    return GraphRule{Kind::kExplicit, std::move(g), 1};
  }
  static GraphRule lift() { return GraphRule{Kind::kLift, {}, 1}; }
  static GraphRule empty() { return GraphRule{Kind::kEmpty, {}, 1}; }
  static GraphRule complete() { return GraphRule{Kind::kComplete, {}, 1}; }
  static GraphRule cliques(std::size_t c) { return GraphRule{Kind::kCliques, {}, c}; }
};

inline const char* to_string(GraphRule::Kind k) {
  switch (k) {
    case GraphRule::Kind::kExplicit: return "explicit";
    case GraphRule::Kind::kLift: return "lift";
    case GraphRule::Kind::kEmpty: return "empty";
    case GraphRule::Kind::kComplete: return "complete";
    case GraphRule::Kind::kCliques: return "cliques";
  }
  return "?";
}

struct GraphTowerSpec {
  UhfSpec uhf;
  std::vector<GraphRule> prefix;  // graph rules for levels 1..prefix.size()
  std::vector<GraphRule> period;  // then cycled; empty means "lift"

  const GraphRule& rule(std::size_t k) const {
    static const GraphRule kLift = GraphRule::lift();
    if (k == 0) throw SpecError("levels are numbered from 1");
    if (k <= prefix.size()) return prefix[k - 1];
    if (period.empty()) return kLift;
    return period[(k - 1 - prefix.size()) % period.size()];
  }
};

class CompatibilityError : public SpecError {
 public:
  CompatibilityError(std::size_t level, Violation v)
      : SpecError("graph at level " + std::to_string(level + 1) +
                  " misses the lift of edge (" + std::to_string(v.i + 1) + "," +
                  std::to_string(v.j + 1) + ") in copy r=" + std::to_string(v.r) +
                  " from level " + std::to_string(level)),
        level_(level),
        violation_(v) {}
  std::size_t level() const { return level_; }
  const Violation& violation() const { return violation_; }

 private:
  std::size_t level_;
  Violation violation_;
};

/// Lazily materialized graph tower; safe to share between threads.
class GraphTower {
 public:
  explicit GraphTower(GraphTowerSpec spec, std::size_t max_vertices = 1u << 14)
      : spec_(std::move(spec)), max_vertices_(max_vertices) {
    spec_.uhf.validate();
    if (spec_.rule(1).kind == GraphRule::Kind::kLift) {
      throw SpecError("level 1 graph cannot be a lift");
    }
  }

  const GraphTowerSpec& spec() const { return spec_; }
  std::size_t dim(std::size_t k) const { return spec_.uhf.dim(k); }
  std::size_t multiplicity(std::size_t k) const { return spec_.uhf.multiplicity(k); }

  /// Graph at level k; throws on incompatibility or when too large.
  std::shared_ptr<const FiniteGraph> graph(std::size_t k) const {
    if (k == 0) throw SpecError("levels are numbered from 1");
    std::lock_guard<std::mutex> lock(mu_);
    while (graphs_.size() < k) {
      const std::size_t level = graphs_.size() + 1;
      const std::size_t n = dim(level);
      if (n > max_vertices_) {
        throw SpecError("level " + std::to_string(level) + " has " +
                        std::to_string(n) + " vertices, above the limit " +
                        std::to_string(max_vertices_));
      }
      auto g = std::make_shared<const FiniteGraph>(build(level, n));
      if (level > 1) {
        if (auto v = graph_compatible(*graphs_.back(), *g, multiplicity(level - 1))) {
          throw CompatibilityError(level - 1, *v);
        }
      }
      graphs_.push_back(std::move(g));
    }
    return graphs_[k - 1];
  }

  /// Largest envelope block over all levels; nullopt when unbounded.
  std::optional<std::size_t> envelope_sup() const {
    const std::size_t p = spec_.prefix.size();
    const std::size_t q = std::max<std::size_t>(spec_.period.size(), 1);
    const bool growing = spec_.uhf.period_product() > 1;
    // With a constant dimension the tower repeats after one pass through
    // both periods; otherwise only the rules matter past the prefix.
    const std::size_t per = std::max(spec_.uhf.period.size(), q);
    const std::size_t last =
        growing ? p + 1 : std::max(p, spec_.uhf.prefix.size()) + 2 * per;
    std::size_t best = 0;
    for (std::size_t k = 1; k <= last; ++k) {
      const auto blocks = envelope_blocks(*graph(k));
      if (!blocks.empty()) best = std::max(best, blocks.front());
    }
    if (!growing) return best;
    for (const GraphRule& r : spec_.period) {
      switch (r.kind) {
        case GraphRule::Kind::kComplete: return std::nullopt;
        case GraphRule::Kind::kCliques: best = std::max(best, r.clique); break;
        case GraphRule::Kind::kEmpty: best = std::max<std::size_t>(best, 1); break;
        case GraphRule::Kind::kLift: break;
        case GraphRule::Kind::kExplicit:
          throw SpecError("explicit graphs cannot repeat on a growing tower");
      }
    }
    return best;
  }

 private:
  FiniteGraph build(std::size_t level, std::size_t n) const {
    const GraphRule& r = spec_.rule(level);
    switch (r.kind) {
      case GraphRule::Kind::kExplicit:
        if (r.graph.size() != n) {
          throw SpecError("explicit graph at level " + std::to_string(level) +
                          " has " + std::to_string(r.graph.size()) +
                          " vertices, expected " + std::to_string(n));
        }
        return r.graph;
      case GraphRule::Kind::kLift:
        return lift_graph(*graphs_.back(), multiplicity(level - 1));
      case GraphRule::Kind::kEmpty: return FiniteGraph(n);
      case GraphRule::Kind::kComplete: return FiniteGraph::complete(n);
      case GraphRule::Kind::kCliques: return FiniteGraph::cliques(n, r.clique);
    }
    throw SpecError("unknown graph rule");
  }

  GraphTowerSpec spec_;
  std::size_t max_vertices_;
  mutable std::mutex mu_;
  mutable std::vector<std::shared_ptr<const FiniteGraph>> graphs_;
};

/// Keeps levels 1, 1+s, 1+2s, ... of a graph tower. Explicit graphs are
/// materialized; past the prefix the graph rules must be uniform.
inline GraphTowerSpec telescope(const GraphTowerSpec& spec, std::size_t stride) {
  GraphTowerSpec out;
  out.uhf = telescope(spec.uhf, stride);
  const std::size_t q = spec.period.size();
  for (std::size_t k = 1; k < q; ++k) {
    if (spec.period[k].kind != spec.period[0].kind ||
        spec.period[k].clique != spec.period[0].clique) {
      throw SpecError("telescope needs a uniform tail graph rule");
    }
  }
  GraphTower src(spec);
  const std::size_t graph_prefix = (spec.prefix.size() + stride - 1) / stride;
  const std::size_t keep = std::max(out.uhf.prefix.size(), graph_prefix) + 1;
  for (std::size_t k = 1; k <= keep; ++k) {
    out.prefix.push_back(
        GraphRule::explicit_graph(*src.graph(1 + (k - 1) * stride)));
  }
  if (!spec.period.empty()) out.period.push_back(spec.period[0]);
  return out;
}

}  // namespace osys::uhf
