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
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "osys/uhf/relation.hpp"
#include "osys/uhf/spec.hpp"

namespace osys::uhf {

/// A unital matrix-unit map M_a -> M_b, b = l a: e_{i,j} goes to
/// sum_r e_{image[r a + i], image[r a + j]}. Diagonal-preserving and a
/// *-homomorphism whenever image is a bijection of [b].
struct IndexMap {
  std::size_t source_dim = 0;
  std::size_t target_dim = 0;
  std::vector<std::size_t> image;

  std::size_t multiplicity() const { return target_dim / source_dim; }
  std::size_t operator()(std::size_t r, std::size_t i) const {
    return image[r * source_dim + i];
  }
  friend bool operator==(const IndexMap&, const IndexMap&) = default;
};

inline IndexMap canonical_index_map(std::size_t a, std::size_t b) {
  if (a == 0 || b % a != 0) {
    throw SpecError("no unital matrix-unit map M_" + std::to_string(a) + " -> M_" +
                    std::to_string(b));
  }
  IndexMap f{a, b, std::vector<std::size_t>(b)};
  for (std::size_t k = 0; k < b; ++k) f.image[k] = k;
  return f;
}

/// g o f, with copy (r1, r2) numbered r2 * l1 + r1.
inline IndexMap compose(const IndexMap& g, const IndexMap& f) {
  if (f.target_dim != g.source_dim) throw SpecError("compose: dimension mismatch");
  const std::size_t a = f.source_dim;
  const std::size_t l1 = f.multiplicity();
  const std::size_t l2 = g.multiplicity();
  IndexMap h{a, g.target_dim, std::vector<std::size_t>(g.target_dim)};
  for (std::size_t r2 = 0; r2 < l2; ++r2) {
    for (std::size_t r1 = 0; r1 < l1; ++r1) {
      for (std::size_t i = 0; i < a; ++i) {
        h.image[(r2 * l1 + r1) * a + i] = g(r2, f(r1, i));
      }
    }
  }
  return h;
}

inline bool well_formed(const IndexMap& f) {
  if (f.source_dim == 0 || f.target_dim % f.source_dim != 0 ||
      f.image.size() != f.target_dim) {
    return false;
  }
  std::vector<char> seen(f.target_dim, 0);
  for (std::size_t v : f.image) {
    if (v >= f.target_dim || seen[v]) return false;
    seen[v] = 1;
  }
  return true;
}

/// Does f, as a map of matrices, equal the canonical embedding? Copy c must
/// be a translate i -> s a + i, with distinct s across copies.
inline bool equals_canonical(const IndexMap& f) {
  if (!well_formed(f)) return false;
  const std::size_t a = f.source_dim;
  for (std::size_t c = 0; c < f.multiplicity(); ++c) {
    const std::size_t base = f(c, 0);
    if (base % a != 0) return false;
    for (std::size_t i = 1; i < a; ++i) {
      if (f(c, i) != base + i) return false;
    }
  }
  return true;
}

/// f maps S_G into S_H.
inline bool preserves(const IndexMap& f, const FiniteGraph& g, const FiniteGraph& h) {
  if (g.size() != f.source_dim || h.size() != f.target_dim) return false;
  const auto edges = g.edges();
  for (std::size_t r = 0; r < f.multiplicity(); ++r) {
    for (const auto& [i, j] : edges) {
      if (!h.adjacent(f(r, i), f(r, j))) return false;
    }
  }
  return true;
}

/// S_1 -> S_{m_1} -> ... over T_{n_1} -> T_{n_2} -> ...: phi[k] maps level
/// a_levels[k] of A to level b_levels[k] of B, psi[k] maps b_levels[k] to
/// a_levels[k+1]. a_levels[0] is 1.
struct IsoWitness {
  std::vector<std::size_t> a_levels;
  std::vector<std::size_t> b_levels;
  std::vector<IndexMap> phi;
  std::vector<IndexMap> psi;

  std::size_t depth() const { return phi.size(); }
};

struct ReplayResult {
  bool ok = false;
  std::string reason;
  explicit operator bool() const { return ok; }
};

inline ReplayResult replay_witness(const GraphTower& a, const GraphTower& b,
                                   const IsoWitness& w) {
  const std::size_t depth = w.phi.size();
  if (depth == 0) return {false, "empty witness"};
  if (w.psi.size() != depth || w.b_levels.size() != depth ||
      w.a_levels.size() != depth + 1) {
    return {false, "witness arrays have inconsistent lengths"};
  }
  if (w.a_levels[0] != 1) return {false, "the first A level must be 1"};
  for (std::size_t k = 1; k < w.a_levels.size(); ++k) {
    if (w.a_levels[k] <= w.a_levels[k - 1]) return {false, "A levels not increasing"};
  }
  if (w.b_levels[0] == 0) return {false, "B levels are numbered from 1"};
  for (std::size_t k = 1; k < w.b_levels.size(); ++k) {
    if (w.b_levels[k] <= w.b_levels[k - 1]) return {false, "B levels not increasing"};
  }
  auto check = [](const IndexMap& f, const GraphTower& src, std::size_t ls,
                  const GraphTower& dst, std::size_t ld,
                  const std::string& name) -> ReplayResult {
    if (f.source_dim != src.dim(ls) || f.target_dim != dst.dim(ld)) {
      return {false, name + " has the wrong dimensions"};
    }
    if (!well_formed(f)) return {false, name + " is not a bijective index map"};
    if (!preserves(f, *src.graph(ls), *dst.graph(ld))) {
      return {false, name + " does not map the graph system into its target"};
    }
    return {true, ""};
  };
  for (std::size_t k = 0; k < depth; ++k) {
    const std::string idx = std::to_string(k + 1);
    if (auto r = check(w.phi[k], a, w.a_levels[k], b, w.b_levels[k], "phi_" + idx); !r) {
      return r;
    }
    if (auto r = check(w.psi[k], b, w.b_levels[k], a, w.a_levels[k + 1], "psi_" + idx);
        !r) {
      return r;
    }
  }
  for (std::size_t k = 0; k < depth; ++k) {
    if (!equals_canonical(compose(w.psi[k], w.phi[k]))) {
      return {false, "psi_" + std::to_string(k + 1) + " o phi_" +
                         std::to_string(k + 1) + " differs from the connecting map"};
    }
    if (k + 1 < depth && !equals_canonical(compose(w.phi[k + 1], w.psi[k]))) {
      return {false, "phi_" + std::to_string(k + 2) + " o psi_" +
                         std::to_string(k + 1) + " differs from the connecting map"};
    }
  }
  return {true, ""};
}

enum class IsoVerdict { kFound, kRefuted, kUnknown };

inline const char* to_string(IsoVerdict v) {
  switch (v) {
    case IsoVerdict::kFound: return "Found";
    case IsoVerdict::kRefuted: return "Refuted";
    case IsoVerdict::kUnknown: return "Unknown";
  }
  return "?";
}

struct IsoOptions {
  std::size_t node_budget = 200000;
  /// Candidate levels tried past the first admissible one at each step.
  std::size_t level_window = 4;
  std::size_t max_dim = 4096;
};

struct IsoResult {
  IsoVerdict verdict = IsoVerdict::kUnknown;
  std::optional<IsoWitness> witness;
  std::string invariant;  // refuting invariant
  std::string detail;
  std::size_t depth = 0;
  std::size_t nodes = 0;
};

namespace detail {

class IsoSearch {
 public:
  IsoSearch(const GraphTower& a, const GraphTower& b, std::size_t depth,
            IsoOptions opts)
      : a_(a), b_(b), depth_(depth), opts_(opts) {}

  /// True when a witness was completed; budget exhaustion leaves `exhausted`.
  bool run() {
    w_.a_levels = {1};
    return extend_phi(0);
  }

  const IsoWitness& witness() const { return w_; }
  std::size_t nodes() const { return nodes_; }
  bool exhausted() const { return exhausted_; }

 private:
  // Levels of `t` above `after` whose dimension is a multiple of `d`.
  std::vector<std::size_t> candidates(const GraphTower& t, std::size_t after,
                                      std::size_t d) const {
    std::vector<std::size_t> out;
    std::size_t first = 0;
    for (std::size_t k = after + 1; k <= after + 64; ++k) {
      std::size_t dk = 0;
      try {
        dk = t.dim(k);
      } catch (const SpecError&) {
        break;
      }
      if (dk > opts_.max_dim) break;
      if (dk % d != 0) continue;
      if (!first) first = k;
      if (k > first + opts_.level_window) break;
      out.push_back(k);
    }
    return out;
  }

  bool tick() {
    if (++nodes_ > opts_.node_budget) {
      exhausted_ = true;
      return false;
    }
    return true;
  }

  // phi_k : A(a_levels[k]) -> B(n).
  bool extend_phi(std::size_t k) {
    const std::size_t m = w_.a_levels[k];
    const std::size_t da = a_.dim(m);
    const std::size_t after = k == 0 ? 0 : w_.b_levels[k - 1];
    for (std::size_t n : candidates(b_, after, da)) {
      w_.b_levels.push_back(n);
      bool done = false;
      if (k == 0) {
        done = free_maps(*a_.graph(m), *b_.graph(n), [&](IndexMap f) {
          w_.phi.push_back(std::move(f));
          if (extend_psi(k)) return true;
          w_.phi.pop_back();
          return false;
        });
      } else {
        done = determined_maps(w_.psi[k - 1], *b_.graph(w_.b_levels[k - 1]),
                               b_.dim(n), *a_.graph(m), *b_.graph(n),
                               [&](IndexMap f) {
                                 w_.phi.push_back(std::move(f));
                                 if (extend_psi(k)) return true;
                                 w_.phi.pop_back();
                                 return false;
                               });
      }
      if (done) return true;
      w_.b_levels.pop_back();
      if (exhausted_) return false;
    }
    return false;
  }

  // psi_k : B(b_levels[k]) -> A(m'), m' > a_levels[k].
  bool extend_psi(std::size_t k) {
    const std::size_t n = w_.b_levels[k];
    for (std::size_t m : candidates(a_, w_.a_levels[k], b_.dim(n))) {
      w_.a_levels.push_back(m);
      const bool done = determined_maps(
          w_.phi[k], *a_.graph(w_.a_levels[k]), a_.dim(m), *b_.graph(n),
          *a_.graph(m), [&](IndexMap g) {
            w_.psi.push_back(std::move(g));
            if (k + 1 == depth_ || extend_phi(k + 1)) return true;
            w_.psi.pop_back();
            return false;
          });
      if (done) return true;
      w_.a_levels.pop_back();
      if (exhausted_) return false;
    }
    return false;
  }

  /// Every bijective f : [l] x [a] -> [b] mapping g into h, canonical first.
  template <typename Fn>
  bool free_maps(const FiniteGraph& g, const FiniteGraph& h, Fn&& accept) {
    const std::size_t a = g.size();
    const std::size_t b = h.size();
    IndexMap f{a, b, std::vector<std::size_t>(b)};
    std::vector<char> used(b, 0);
    std::vector<std::vector<std::size_t>> lower(a);  // neighbours j < i
    for (const auto& [i, j] : g.edges()) lower[j].push_back(i);
    std::function<bool(std::size_t)> place = [&](std::size_t pos) -> bool {
      if (pos == b) return accept(f);
      const std::size_t r = pos / a;
      const std::size_t i = pos % a;
      for (std::size_t v = 0; v < b; ++v) {
        if (used[v]) continue;
        if (!tick()) return false;
        bool ok = true;
        for (std::size_t j : lower[i]) {
          if (!h.adjacent(v, f.image[r * a + j])) {
            ok = false;
            break;
          }
        }
        if (!ok) continue;
        used[v] = 1;
        f.image[pos] = v;
        if (place(pos + 1)) return true;
        used[v] = 0;
        if (exhausted_) return false;
      }
      return false;
    };
    return place(0);
  }

  /// Every g : M_b -> M_c with g o f canonical (f : M_a -> M_b) mapping
  /// graph gb into gc. Such g is fixed by a bijection sigma of copies:
  /// g(r2, f(r1, i)) = sigma(r1, r2) a + i. Canonical sigma first.
  template <typename Fn>
  bool determined_maps(const IndexMap& f, const FiniteGraph& /*ga*/,
                       std::size_t c, const FiniteGraph& gb, const FiniteGraph& gc,
                       Fn&& accept) {
    const std::size_t a = f.source_dim;
    const std::size_t b = f.target_dim;
    const std::size_t l1 = b / a;
    const std::size_t l2 = c / b;
    const std::size_t slots = l1 * l2;
    std::vector<std::size_t> copy_of(b);
    std::vector<std::size_t> index_of(b);
    std::vector<std::vector<std::size_t>> members(l1);
    for (std::size_t r1 = 0; r1 < l1; ++r1) {
      for (std::size_t i = 0; i < a; ++i) {
        const std::size_t q = f(r1, i);
        copy_of[q] = r1;
        index_of[q] = i;
        members[r1].push_back(q);
      }
    }
    std::vector<std::size_t> sigma(slots, 0);
    std::vector<char> used(slots, 0);
    IndexMap g{b, c, std::vector<std::size_t>(c)};
    std::function<bool(std::size_t)> place = [&](std::size_t slot) -> bool {
      if (slot == slots) return accept(g);
      const std::size_t r2 = slot / l1;
      const std::size_t r1 = slot % l1;
      for (std::size_t v = 0; v < slots; ++v) {
        if (used[v]) continue;
        if (!tick()) return false;
        sigma[slot] = v;
        for (std::size_t q : members[r1]) g.image[r2 * b + q] = v * a + index_of[q];
        // Edges of gb whose endpoints are both placed under copy r2.
        bool ok = true;
        for (std::size_t q : members[r1]) {
          gb.adjacency().for_each_in_row(q, [&](std::size_t q2) {
            if (!ok || copy_of[q2] > r1) return;
            if (!gc.adjacent(g.image[r2 * b + q], g.image[r2 * b + q2])) ok = false;
          });
          if (!ok) break;
        }
        if (!ok) continue;
        used[v] = 1;
        if (place(slot + 1)) return true;
        used[v] = 0;
        if (exhausted_) return false;
      }
      return false;
    };
    return place(0);
  }

  const GraphTower& a_;
  const GraphTower& b_;
  std::size_t depth_;
  IsoOptions opts_;
  IsoWitness w_;
  std::size_t nodes_ = 0;
  bool exhausted_ = false;
};

}  // namespace detail

/// Searches for a commuting ladder of matrix-unit maps between the two
/// graph towers, after two refuting invariants: divisibility of the
/// ambient levels, and the largest envelope block over the tower.
inline IsoResult iso_search(const GraphTowerSpec& sa, const GraphTowerSpec& sb,
                            std::size_t depth = 6, IsoOptions opts = IsoOptions()) {
  if (depth == 0) throw SpecError("iso_search depth must be at least 1");
  IsoResult out;
  out.depth = depth;
  const GraphTower a(sa);
  const GraphTower b(sb);

  const GlimmResult glimm = glimm_equivalent(sa.uhf, sb.uhf);
  if (!glimm.equivalent) {
    out.verdict = IsoVerdict::kRefuted;
    out.invariant = "glimm";
    out.detail = "prime " + std::to_string(glimm.prime) + ": " +
                 (glimm.left_exceeds ? "left" : "right") +
                 " tower has the larger power, so no unital matrix-unit maps "
                 "exist in that direction beyond some level";
    return out;
  }
  const auto ea = a.envelope_sup();
  const auto eb = b.envelope_sup();
  if (ea != eb) {
    auto show = [](const std::optional<std::size_t>& v) {
      return v ? std::to_string(*v) : std::string("unbounded");
    };
    out.verdict = IsoVerdict::kRefuted;
    out.invariant = "envelope-block-sup";
    out.detail = "largest envelope block " + show(ea) + " vs " + show(eb);
    return out;
  }

  detail::IsoSearch search(a, b, depth, opts);
  const bool found = search.run();
  out.nodes = search.nodes();
  if (found) {
    out.verdict = IsoVerdict::kFound;
    out.witness = search.witness();
    return out;
  }
  out.verdict = IsoVerdict::kUnknown;
  out.detail = search.exhausted() ? "node budget exhausted"
                                  : "no witness within the level window";
  return out;
}

}  // namespace osys::uhf
