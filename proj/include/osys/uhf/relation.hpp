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
#include <bit>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace osys::uhf {

/// Square bit matrix over [n] x [n], one uint64 word run per row.
class BitRelation {
 public:
  BitRelation() = default;
  explicit BitRelation(std::size_t n)
      : n_(n), words_((n + 63) / 64), bits_(n * words_, 0) {}

  static BitRelation diagonal(std::size_t n) {
    BitRelation r(n);
    for (std::size_t i = 0; i < n; ++i) r.set(i, i);
    return r;
  }

  static BitRelation full(std::size_t n) {
    BitRelation r(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) r.set(i, j);
    }
    return r;
  }

  std::size_t size() const { return n_; }

  bool test(std::size_t i, std::size_t j) const {
    return (bits_[i * words_ + j / 64] >> (j % 64)) & 1u;
  }
  void set(std::size_t i, std::size_t j, bool v = true) {
    std::uint64_t& w = bits_[i * words_ + j / 64];
    const std::uint64_t mask = std::uint64_t{1} << (j % 64);
    w = v ? (w | mask) : (w & ~mask);
  }

  std::size_t count() const {
    std::size_t c = 0;
    for (std::uint64_t w : bits_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }

  bool is_reflexive() const {
    for (std::size_t i = 0; i < n_; ++i) {
      if (!test(i, i)) return false;
    }
    return true;
  }
  bool is_symmetric() const {
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = i + 1; j < n_; ++j) {
        if (test(i, j) != test(j, i)) return false;
      }
    }
    return true;
  }
  bool has_loops() const {
    for (std::size_t i = 0; i < n_; ++i) {
      if (test(i, i)) return true;
    }
    return false;
  }

  /// Every pair of *this also lies in other.
  bool subset_of(const BitRelation& other) const {
    if (other.n_ != n_) return false;
    for (std::size_t k = 0; k < bits_.size(); ++k) {
      if (bits_[k] & ~other.bits_[k]) return false;
    }
    return true;
  }

  BitRelation& operator|=(const BitRelation& other) {
    if (other.n_ != n_) throw std::invalid_argument("relation size mismatch");
    for (std::size_t k = 0; k < bits_.size(); ++k) bits_[k] |= other.bits_[k];
    return *this;
  }

  /// Calls fn(j) for every j with (i, j) set.
  template <typename Fn>
  void for_each_in_row(std::size_t i, Fn&& fn) const {
    for (std::size_t w = 0; w < words_; ++w) {
      std::uint64_t bits = bits_[i * words_ + w];
      while (bits) {
        const int b = std::countr_zero(bits);
        fn(w * 64 + static_cast<std::size_t>(b));
        bits &= bits - 1;
      }
    }
  }

  friend bool operator==(const BitRelation&, const BitRelation&) = default;

 private:
  std::size_t n_ = 0;
  std::size_t words_ = 0;
  std::vector<std::uint64_t> bits_;
};

using Edge = std::pair<std::size_t, std::size_t>;

/// Simple undirected graph on [n]: symmetric, loopless. Vertices are 0-based
/// here; configs and reports use 1-based labels.
class FiniteGraph {
 public:
  FiniteGraph() = default;
  explicit FiniteGraph(std::size_t n) : adj_(n) {}

  static FiniteGraph from_edges(std::size_t n, const std::vector<Edge>& edges) {
    FiniteGraph g(n);
    for (const auto& [i, j] : edges) g.add_edge(i, j);
    return g;
  }

  /// Adjacency must be symmetric and loopless.
  static FiniteGraph from_adjacency(BitRelation adj) {
    if (adj.has_loops()) throw std::invalid_argument("graph adjacency has loops");
    if (!adj.is_symmetric()) {
      throw std::invalid_argument("graph adjacency is not symmetric");
    }
    FiniteGraph g;
    g.adj_ = std::move(adj);
    return g;
  }

  static FiniteGraph complete(std::size_t n) {
    FiniteGraph g(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) g.add_edge(i, j);
    }
    return g;
  }

  /// Disjoint cliques on consecutive runs of c vertices.
  static FiniteGraph cliques(std::size_t n, std::size_t c) {
    if (c == 0 || n % c != 0) {
      throw std::invalid_argument("clique size " + std::to_string(c) +
                                  " does not divide " + std::to_string(n));
    }
    FiniteGraph g(n);
    for (std::size_t b = 0; b < n; b += c) {
      for (std::size_t i = b; i < b + c; ++i) {
        for (std::size_t j = i + 1; j < b + c; ++j) g.add_edge(i, j);
      }
    }
    return g;
  }

  void add_edge(std::size_t i, std::size_t j) {
    if (i >= size() || j >= size()) {
      throw std::out_of_range("edge (" + std::to_string(i + 1) + "," +
                              std::to_string(j + 1) + ") outside " +
                              std::to_string(size()) + " vertices");
    }
    if (i == j) {
      throw std::invalid_argument("loop at vertex " + std::to_string(i + 1));
    }
    adj_.set(i, j);
    adj_.set(j, i);
  }

  std::size_t size() const { return adj_.size(); }
  bool adjacent(std::size_t i, std::size_t j) const { return adj_.test(i, j); }
  /// Membership in the extended edge set E ∪ diagonal.
  bool extended(std::size_t i, std::size_t j) const {
    return i == j || adj_.test(i, j);
  }
  std::size_t edge_count() const { return adj_.count() / 2; }
  bool is_complete() const { return edge_count() * 2 == size() * (size() - (size() ? 1 : 0)); }
  const BitRelation& adjacency() const { return adj_; }

  /// Sorted (i < j) edge list.
  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    for (std::size_t i = 0; i < size(); ++i) {
      adj_.for_each_in_row(i, [&](std::size_t j) {
        if (i < j) out.emplace_back(i, j);
      });
    }
    return out;
  }

  friend bool operator==(const FiniteGraph&, const FiniteGraph&) = default;

 private:
  BitRelation adj_;
};

/// A reflexive symmetric relation at one level.
class LevelRelation {
 public:
  explicit LevelRelation(BitRelation rel) : rel_(std::move(rel)) {
    if (!rel_.is_reflexive()) throw std::invalid_argument("relation not reflexive");
    if (!rel_.is_symmetric()) throw std::invalid_argument("relation not symmetric");
  }
  static LevelRelation diagonal(std::size_t n) {
    return LevelRelation(BitRelation::diagonal(n));
  }

  std::size_t size() const { return rel_.size(); }
  bool test(std::size_t i, std::size_t j) const { return rel_.test(i, j); }
  const BitRelation& bits() const { return rel_; }

  friend bool operator==(const LevelRelation&, const LevelRelation&) = default;

 private:
  BitRelation rel_;
};

/// Index of the r-th copy of i under a multiplicity-l embedding of M_n.
constexpr std::size_t lift(std::size_t r, std::size_t n, std::size_t i) {
  return r * n + i;
}

/// First compatibility failure, 0-based (i < j and copy r).
struct Violation {
  std::size_t i = 0;
  std::size_t j = 0;
  std::size_t r = 0;
};

/// Checks that every edge of g lifts to all l copies inside next.
inline std::optional<Violation> graph_compatible(const FiniteGraph& g,
                                                 const FiniteGraph& next,
                                                 std::size_t l) {
  const std::size_t n = g.size();
  if (l == 0 || next.size() != l * n) {
    throw std::invalid_argument("graph_compatible: next graph has " +
                                std::to_string(next.size()) + " vertices, expected " +
                                std::to_string(l * n));
  }
  for (const auto& [i, j] : g.edges()) {
    for (std::size_t r = 0; r < l; ++r) {
      if (!next.adjacent(lift(r, n, i), lift(r, n, j))) return Violation{i, j, r};
    }
  }
  return std::nullopt;
}

inline LevelRelation refine_relation(const LevelRelation& p, std::size_t l) {
  if (l == 0) throw std::invalid_argument("refine_relation: multiplicity 0");
  const std::size_t n = p.size();
  BitRelation out(n * l);
  for (std::size_t i = 0; i < n; ++i) {
    p.bits().for_each_in_row(i, [&](std::size_t j) {
      for (std::size_t r = 0; r < l; ++r) out.set(lift(r, n, i), lift(r, n, j));
    });
  }
  return LevelRelation(std::move(out));
}

/// The minimal compatible graph at the next level.
inline FiniteGraph lift_graph(const FiniteGraph& g, std::size_t l) {
  const std::size_t n = g.size();
  FiniteGraph out(n * l);
  for (const auto& [i, j] : g.edges()) {
    for (std::size_t r = 0; r < l; ++r) out.add_edge(lift(r, n, i), lift(r, n, j));
  }
  return out;
}

inline LevelRelation relation_of_system(const FiniteGraph& g) {
  BitRelation rel = g.adjacency();
  for (std::size_t i = 0; i < g.size(); ++i) rel.set(i, i);
  return LevelRelation(std::move(rel));
}

inline FiniteGraph system_of_relation(const LevelRelation& p) {
  BitRelation adj = p.bits();
  for (std::size_t i = 0; i < p.size(); ++i) adj.set(i, i, false);
  return FiniteGraph::from_adjacency(std::move(adj));
}

/// Component label per vertex (labels in order of first appearance).
inline std::vector<std::size_t> components(const BitRelation& rel) {
  const std::size_t n = rel.size();
  constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> label(n, kUnset);
  std::vector<std::size_t> stack;
  std::size_t next = 0;
  for (std::size_t s = 0; s < n; ++s) {
    if (label[s] != kUnset) continue;
    label[s] = next;
    stack.push_back(s);
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      rel.for_each_in_row(v, [&](std::size_t w) {
        if (label[w] == kUnset) {
          label[w] = next;
          stack.push_back(w);
        }
      });
    }
    ++next;
  }
  return label;
}

/// Transitive closure of a reflexive symmetric relation.
inline LevelRelation epsilon_closure(const LevelRelation& p) {
  const std::vector<std::size_t> label = components(p.bits());
  const std::size_t n = p.size();
  std::vector<std::vector<std::size_t>> members;
  for (std::size_t v = 0; v < n; ++v) {
    if (label[v] >= members.size()) members.resize(label[v] + 1);
    members[label[v]].push_back(v);
  }
  BitRelation out(n);
  for (const auto& block : members) {
    for (std::size_t a : block) {
      for (std::size_t b : block) out.set(a, b);
    }
  }
  return LevelRelation(std::move(out));
}

/// Component sizes of the extended edge set, descending.
inline std::vector<std::size_t> envelope_blocks(const FiniteGraph& g) {
  const std::vector<std::size_t> label = components(g.adjacency());
  std::vector<std::size_t> sizes;
  for (std::size_t v : label) {
    if (v >= sizes.size()) sizes.resize(v + 1, 0);
    ++sizes[v];
  }
  std::sort(sizes.begin(), sizes.end(), std::greater<>());
  return sizes;
}

}  // namespace osys::uhf
