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
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "osys/cli/toml.hpp"
#include "osys/indlimit.hpp"
#include "osys/opsys.hpp"
#include "osys/uhf/graph_system.hpp"
#include "osys/uhf/spec.hpp"

namespace osys::cli {

inline constexpr int kConfigVersion = 1;

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& path, const std::string& what)
      : std::runtime_error(path.empty() ? what : path + ": " + what) {}
};

struct QueryKind {
  std::string name;
  std::string summary;
  std::vector<std::string> required;
  std::vector<std::string> optional;
  std::vector<std::string> verdicts;
};

inline const std::vector<QueryKind>& query_kinds() {
  static const std::vector<QueryKind> kinds{
      {"check-tower", "Realize a tower up to `levels`, check every connecting map is unital and cp.",
       {"tower"}, {"levels"}, {"Valid", "Invalid"}},
      {"limit-norm", "Norm of the limit image of `element` placed at `level`.",
       {"tower", "element", "level"}, {"horizon"}, {"Value", "Bracket"}},
      {"limit-positive", "Positivity in the limit cone of `element` at `level` (matrix level from the element).",
       {"tower", "element", "level"}, {"horizon", "delta"},
       {"Positive", "NotPositive", "Undetermined"}},
      {"null-space", "Whether `element` at `level` lies in the null space of the limit.",
       {"tower", "element", "level"}, {"horizon"}, {"Yes", "No", "Undetermined"}},
      {"eq-in-limit", "Equality in the limit of left = {element, level} and right = {element, level}.",
       {"tower", "left", "right"}, {"horizon"}, {"Equal", "NotEqual", "Undetermined"}},
      {"pullback-state", "Pull a state at `from` back to level `to`; state = \"trace\", {vector = [...]} or {density = [[...]]}.",
       {"tower", "from", "to", "state"}, {"n"}, {"State"}},
      {"glimm", "Glimm equivalence of the multiplicity streams of towers `left` and `right`.",
       {"left", "right"}, {}, {"Equivalent", "NotEquivalent"}},
      {"iso-search", "Search a commuting ladder of matrix-unit maps between graph towers `left` and `right`.",
       {"left", "right"}, {"depth", "budget", "window"}, {"Found", "Refuted", "Unknown"}},
      {"envelope", "Block sizes of the C*-envelope of a graph system.",
       {"graph"}, {}, {"Blocks"}},
      {"relation-roundtrip", "Relation/system roundtrip for `graph`, or roundtrip and refinement naturality along `tower` up to `levels`.",
       {}, {"graph", "tower", "levels"}, {"Holds", "Fails"}},
      {"epsilon", "Transitive closure of the extended edge relation of `graph`.",
       {"graph"}, {}, {"Closure"}},
      {"omin", "Block positivity of `element` (n x n over `system`) in the OMIN structure.",
       {"system", "element"}, {"budget"}, {"Inside", "Outside", "Unknown"}},
      {"omax-verify", "Verify an OMAX certificate: terms = [{coefficient, element}], optional compression, against `claimed`.",
       {"system", "terms", "claimed"}, {"compression"}, {"Accepted", "Rejected"}},
      {"min-commute", "Sample the min-tensor commutation along an embedding tower with right factor `right`.",
       {"tower", "right"}, {"samples", "levels", "n_max"}, {"Agree", "Disagree"}},
      {"max-commute", "Sample max-tensor certificate transport and elementary tensors with right factor `right`.",
       {"tower", "right"}, {"samples", "levels", "corrupt_every"}, {"Verified", "Rejected"}},
      {"cp-check", "n-positivity of a map: the tower map at `level`, or a map given by source/target and inputs/outputs or multiplicity.",
       {}, {"tower", "level", "source", "target", "inputs", "outputs", "multiplicity", "n_max", "samples"},
       {"CpVerified", "NotPositiveAt"}},
  };
  return kinds;
}

inline const QueryKind* find_kind(std::string_view name) {
  for (const QueryKind& k : query_kinds()) {
    if (k.name == name) return &k;
  }
  return nullptr;
}

struct TowerDecl {
  std::string kind;  // "uhf", "graph" or "linear"
  std::optional<uhf::GraphTowerSpec> graph_spec;
  std::shared_ptr<const uhf::GraphTower> graphs;
  TowerPtr tower;
};

struct ElementDecl {
  Matrix matrix;
  std::size_t n = 1;
};

struct QueryDecl {
  std::size_t index = 0;
  std::string id;
  std::string kind;
  Json args;
  double tol = 1e-9;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> expect;
};

struct Config {
  int version = kConfigVersion;
  std::optional<std::uint64_t> seed;
  std::map<std::string, SystemPtr> systems;
  std::map<std::string, uhf::FiniteGraph> graphs;
  std::map<std::string, TowerDecl> towers;
  std::map<std::string, ElementDecl> elements;
  std::vector<QueryDecl> queries;
};

namespace detail {

inline std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

inline std::string at_index(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

inline const Json& require(const Json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw ConfigError(path, "missing key '" + key + "'");
  }
  return obj.at(key);
}

inline std::uint64_t as_count(const Json& v, const std::string& path, bool allow_zero = false) {
  if (!v.is_number_integer() || v.get<long long>() < (allow_zero ? 0 : 1)) {
    throw ConfigError(path, allow_zero ? "expected a nonnegative integer"
                                       : "expected a positive integer");
  }
  return v.get<std::uint64_t>();
}

inline std::string as_string(const Json& v, const std::string& path) {
  if (!v.is_string()) throw ConfigError(path, "expected a string");
  return v.get<std::string>();
}

inline double as_real(const Json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path, "expected a number");
  return v.get<double>();
}

inline Complex as_complex(const Json& v, const std::string& path) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
    return {v[0].get<double>(), v[1].get<double>()};
  }
  throw ConfigError(path, "expected a number or [re, im]");
}

}  // namespace detail

/// Rows of numbers or [re, im] pairs.
inline Matrix parse_matrix(const Json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) throw ConfigError(path, "expected a nonempty array of rows");
  const std::size_t rows = v.size();
  if (!v[0].is_array() || v[0].empty()) throw ConfigError(path, "rows must be nonempty arrays");
  const std::size_t cols = v[0].size();
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    const std::string rp = detail::at_index(path, i);
    if (!v[i].is_array() || v[i].size() != cols) {
      throw ConfigError(rp, "row length differs from row 1");
    }
    for (std::size_t j = 0; j < cols; ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          detail::as_complex(v[i][j], detail::at_index(rp, j));
    }
  }
  return m;
}

inline Vector parse_vector(const Json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) throw ConfigError(path, "expected a nonempty array");
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    out(static_cast<Eigen::Index>(i)) = detail::as_complex(v[i], detail::at_index(path, i));
  }
  return out;
}

/// n plus edges (undirected, 1-based), arcs (directed, must be symmetric)
/// or an adjacency matrix (must be symmetric, zero diagonal).
inline uhf::FiniteGraph parse_graph(const Json& g, const std::string& path) {
  if (!g.is_object()) throw ConfigError(path, "graph must be a table");
  const std::size_t n = detail::as_count(detail::require(g, "n", path), detail::join(path, "n"));
  const int given = static_cast<int>(g.contains("edges")) + static_cast<int>(g.contains("arcs")) +
                    static_cast<int>(g.contains("adjacency"));
  if (given > 1) throw ConfigError(path, "give only one of edges, arcs, adjacency");
  auto pair_of = [&](const Json& e, const std::string& p) {
    if (!e.is_array() || e.size() != 2) throw ConfigError(p, "expected [i, j]");
    const std::size_t i = detail::as_count(e[0], p);
    const std::size_t j = detail::as_count(e[1], p);
    if (i > n || j > n) throw ConfigError(p, "vertex out of range 1.." + std::to_string(n));
    if (i == j) throw ConfigError(p, "graph invariant: loops are not allowed");
    return std::make_pair(i - 1, j - 1);
  };
  if (g.contains("adjacency")) {
    const std::string p = detail::join(path, "adjacency");
    const Json& a = g.at("adjacency");
    if (!a.is_array() || a.size() != n) throw ConfigError(p, "expected n rows");
    uhf::BitRelation rel(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (!a[i].is_array() || a[i].size() != n) {
        throw ConfigError(detail::at_index(p, i), "expected n entries");
      }
      for (std::size_t j = 0; j < n; ++j) {
        const Json& x = a[i][j];
        if (!(x.is_number_integer() || x.is_boolean())) {
          throw ConfigError(detail::at_index(detail::at_index(p, i), j), "expected 0/1");
        }
        const bool on = x.is_boolean() ? x.get<bool>() : x.get<long long>() != 0;
        if (on) rel.set(i, j);
      }
    }
    if (rel.has_loops()) throw ConfigError(p, "graph invariant: nonzero diagonal (loops)");
    if (!rel.is_symmetric()) throw ConfigError(p, "graph invariant: adjacency not symmetric");
    return uhf::FiniteGraph::from_adjacency(std::move(rel));
  }
  if (g.contains("arcs")) {
    const std::string p = detail::join(path, "arcs");
    uhf::BitRelation rel(n);
    const Json& arcs = g.at("arcs");
    if (!arcs.is_array()) throw ConfigError(p, "expected an array of [i, j]");
    for (std::size_t k = 0; k < arcs.size(); ++k) {
      const auto [i, j] = pair_of(arcs[k], detail::at_index(p, k));
      rel.set(i, j);
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (rel.test(i, j) && !rel.test(j, i)) {
          throw ConfigError(p, "graph invariant: arc (" + std::to_string(i + 1) + "," +
                                   std::to_string(j + 1) + ") has no reverse (" +
                                   std::to_string(j + 1) + "," + std::to_string(i + 1) + ")");
        }
      }
    }
    return uhf::FiniteGraph::from_adjacency(std::move(rel));
  }
  uhf::FiniteGraph out(n);
  if (g.contains("edges")) {
    const std::string p = detail::join(path, "edges");
    const Json& edges = g.at("edges");
    if (!edges.is_array()) throw ConfigError(p, "expected an array of [i, j]");
    for (std::size_t k = 0; k < edges.size(); ++k) {
      const auto [i, j] = pair_of(edges[k], detail::at_index(p, k));
      out.add_edge(i, j);
    }
  }
  return out;
}

namespace detail {

inline void check_keys(const Json& obj, const std::string& path,
                       const std::set<std::string>& allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) throw ConfigError(path, "unknown key '" + it.key() + "'");
  }
}

inline std::vector<std::size_t> parse_counts(const Json& v, const std::string& path) {
  if (!v.is_array()) throw ConfigError(path, "expected an array of positive integers");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(static_cast<std::size_t>(as_count(v[i], at_index(path, i))));
  }
  return out;
}

inline uhf::GraphRule parse_rule(const Json& v, const std::string& path, const Config& cfg) {
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "lift") return uhf::GraphRule::lift();
    if (s == "empty") return uhf::GraphRule::empty();
    if (s == "complete") return uhf::GraphRule::complete();
    auto it = cfg.graphs.find(s);
    if (it == cfg.graphs.end()) throw ConfigError(path, "undeclared graph '" + s + "'");
    return uhf::GraphRule::explicit_graph(it->second);
  }
  if (v.is_object() && v.contains("cliques")) {
    return uhf::GraphRule::cliques(
        static_cast<std::size_t>(as_count(v.at("cliques"), join(path, "cliques"))));
  }
  if (v.is_object()) return uhf::GraphRule::explicit_graph(parse_graph(v, path));
  throw ConfigError(path, "graph rule must be lift, empty, complete, {cliques = c}, a graph "
                          "name or an inline graph");
}

inline SystemPtr parse_system(const Json& s, const std::string& path, const Config& cfg) {
  const std::string kind = as_string(require(s, "kind", path), join(path, "kind"));
  if (kind == "full" || kind == "diagonal") {
    check_keys(s, path, {"kind", "dim"});
    const auto d = static_cast<std::size_t>(as_count(require(s, "dim", path), join(path, "dim")));
    return make_system(kind == "full" ? ConcreteOpSys::full(d) : ConcreteOpSys::diagonal(d));
  }
  if (kind == "graph") {
    check_keys(s, path, {"kind", "graph"});
    const Json& g = require(s, "graph", path);
    if (g.is_string()) {
      auto it = cfg.graphs.find(g.get<std::string>());
      if (it == cfg.graphs.end()) {
        throw ConfigError(join(path, "graph"), "undeclared graph '" + g.get<std::string>() + "'");
      }
      return make_system(uhf::graph_system(it->second));
    }
    return make_system(uhf::graph_system(parse_graph(g, join(path, "graph"))));
  }
  if (kind == "basis") {
    check_keys(s, path, {"kind", "basis", "unit"});
    const Json& b = require(s, "basis", path);
    if (!b.is_array()) throw ConfigError(join(path, "basis"), "expected an array of matrices");
    std::vector<Matrix> basis;
    for (std::size_t i = 0; i < b.size(); ++i) {
      basis.push_back(parse_matrix(b[i], at_index(join(path, "basis"), i)));
    }
    const std::size_t unit =
        s.contains("unit") ? static_cast<std::size_t>(as_count(s.at("unit"), join(path, "unit"))) : 1;
    try {
      return make_system(ConcreteOpSys::validate(std::move(basis), unit - 1));
    } catch (const Error& e) {
      throw ConfigError(path, e.what());
    }
  }
  throw ConfigError(join(path, "kind"), "unknown system kind '" + kind +
                                            "' (full, diagonal, graph, basis)");
}

inline Matrix resolve_matrix(const Json& v, const std::string& path, const Config& cfg) {
  if (v.is_string()) {
    auto it = cfg.elements.find(v.get<std::string>());
    if (it == cfg.elements.end()) {
      throw ConfigError(path, "undeclared element '" + v.get<std::string>() + "'");
    }
    return it->second.matrix;
  }
  return parse_matrix(v, path);
}

inline TowerDecl parse_tower(const Json& t, const std::string& path, const Config& cfg) {
  const std::string kind = as_string(require(t, "kind", path), join(path, "kind"));
  TowerDecl decl;
  decl.kind = kind;
  if (kind == "uhf" || kind == "graph") {
    check_keys(t, path, {"kind", "n1", "prefix", "period", "graphs", "tail", "cap", "max_dim"});
    uhf::GraphTowerSpec spec;
    spec.uhf.n1 = t.contains("n1") ? static_cast<std::size_t>(as_count(t.at("n1"), join(path, "n1")))
                                   : 1;
    if (t.contains("prefix")) spec.uhf.prefix = parse_counts(t.at("prefix"), join(path, "prefix"));
    spec.uhf.period = parse_counts(require(t, "period", path), join(path, "period"));
    if (spec.uhf.period.empty()) {
      throw ConfigError(join(path, "period"), "multiplicity period must be nonempty");
    }
    if (kind == "uhf") {
      if (t.contains("graphs") || t.contains("tail")) {
        throw ConfigError(path, "uhf towers use complete graphs; graphs/tail not allowed");
      }
      spec.prefix = {uhf::GraphRule::complete()};
      spec.period = {uhf::GraphRule::complete()};
    } else {
      const Json& g = require(t, "graphs", path);
      if (!g.is_array() || g.empty()) {
        throw ConfigError(join(path, "graphs"), "expected a nonempty array of graph rules");
      }
      for (std::size_t i = 0; i < g.size(); ++i) {
        spec.prefix.push_back(parse_rule(g[i], at_index(join(path, "graphs"), i), cfg));
      }
      if (t.contains("tail")) {
        const Json& tl = t.at("tail");
        if (!tl.is_array() || tl.empty()) {
          throw ConfigError(join(path, "tail"), "expected a nonempty array of graph rules");
        }
        for (std::size_t i = 0; i < tl.size(); ++i) {
          spec.period.push_back(parse_rule(tl[i], at_index(join(path, "tail"), i), cfg));
        }
      } else {
        spec.period = {uhf::GraphRule::lift()};
      }
    }
    TowerOptions opts;
    if (t.contains("cap")) opts.cap = static_cast<std::size_t>(as_count(t.at("cap"), join(path, "cap")));
    if (t.contains("max_dim")) {
      opts.max_ambient = static_cast<std::size_t>(as_count(t.at("max_dim"), join(path, "max_dim")));
    }
    try {
      auto graphs = std::make_shared<const uhf::GraphTower>(spec);
      // Materialize the explicit part so compatibility errors surface here.
      const std::size_t check = std::max(spec.prefix.size(), spec.uhf.prefix.size()) + 1;
      for (std::size_t k = 1; k <= check; ++k) {
        if (graphs->dim(k) > opts.max_ambient) break;
        graphs->graph(k);
      }
      decl.graph_spec = spec;
      decl.graphs = graphs;
      decl.tower = uhf::make_graph_tower(graphs, opts);
    } catch (const uhf::SpecError& e) {
      throw ConfigError(path, e.what());
    }
    return decl;
  }
  if (kind == "linear") {
    check_keys(t, path, {"kind", "levels", "maps", "tail", "cap"});
    const Json& lv = require(t, "levels", path);
    if (!lv.is_array() || lv.empty()) {
      throw ConfigError(join(path, "levels"), "expected a nonempty array of system names");
    }
    std::vector<SystemPtr> levels;
    for (std::size_t i = 0; i < lv.size(); ++i) {
      const std::string p = at_index(join(path, "levels"), i);
      const std::string name = as_string(lv[i], p);
      auto it = cfg.systems.find(name);
      if (it == cfg.systems.end()) throw ConfigError(p, "undeclared system '" + name + "'");
      levels.push_back(it->second);
    }
    const Json maps_j = t.contains("maps") ? t.at("maps") : Json::array();
    if (!maps_j.is_array() || maps_j.size() + 1 != levels.size()) {
      throw ConfigError(join(path, "maps"), "need one map per consecutive pair of levels");
    }
    std::vector<CpMap> maps;
    for (std::size_t i = 0; i < maps_j.size(); ++i) {
      const std::string p = at_index(join(path, "maps"), i);
      const Json& m = maps_j[i];
      try {
        if (m.is_object() && m.contains("multiplicity")) {
          check_keys(m, p, {"multiplicity"});
          maps.push_back(CpMap::star_hom(
              levels[i], levels[i + 1],
              static_cast<std::size_t>(as_count(m.at("multiplicity"), join(p, "multiplicity")))));
          continue;
        }
        check_keys(m, p, {"inputs", "outputs"});
        const Json& in = require(m, "inputs", p);
        const Json& out = require(m, "outputs", p);
        if (!in.is_array() || !out.is_array() || in.size() != out.size()) {
          throw ConfigError(p, "inputs and outputs must be arrays of equal length");
        }
        std::vector<Matrix> ins, outs;
        for (std::size_t k = 0; k < in.size(); ++k) {
          ins.push_back(resolve_matrix(in[k], at_index(join(p, "inputs"), k), cfg));
          outs.push_back(resolve_matrix(out[k], at_index(join(p, "outputs"), k), cfg));
        }
        maps.push_back(CpMap::linear_from_images(levels[i], levels[i + 1], ins, outs));
      } catch (const Error& e) {
        throw ConfigError(p, e.what());
      }
    }
    TailRule tail;
    TowerOptions opts;
    if (t.contains("cap")) opts.cap = static_cast<std::size_t>(as_count(t.at("cap"), join(path, "cap")));
    if (t.contains("tail")) {
      const std::string tl = as_string(t.at("tail"), join(path, "tail"));
      if (tl == "repeat") {
        if (maps.empty()) throw ConfigError(join(path, "tail"), "repeat needs at least one map");
        try {
          tail = repeat_tail(maps.back());
        } catch (const Error& e) {
          throw ConfigError(join(path, "tail"), e.what());
        }
        opts.tail_is_embedding = maps.back().is_star_hom();
      } else if (tl != "none") {
        throw ConfigError(join(path, "tail"), "tail must be \"repeat\" or \"none\"");
      }
    }
    try {
      decl.tower = std::make_shared<const Tower>(std::move(levels), std::move(maps),
                                                 std::move(tail), opts);
    } catch (const Error& e) {
      throw ConfigError(path, e.what());
    }
    return decl;
  }
  throw ConfigError(join(path, "kind"), "unknown tower kind '" + kind + "' (uhf, graph, linear)");
}

/// Names the query arguments refer to, checked at parse time.
inline void check_references(const QueryDecl& q, const std::string& path, const Config& cfg) {
  const Json& a = q.args;
  auto need = [&](const std::string& key, const auto& table, const char* what) {
    if (!a.contains(key)) return;
    const std::string name = as_string(a.at(key), join(path, key));
    if (!table.count(name)) {
      throw ConfigError(join(path, key), std::string("undeclared ") + what + " '" + name + "'");
    }
  };
  need("tower", cfg.towers, "tower");
  need("element", cfg.elements, "element");
  need("system", cfg.systems, "system");
  need("graph", cfg.graphs, "graph");
  need("claimed", cfg.elements, "element");
  need("source", cfg.systems, "system");
  need("target", cfg.systems, "system");
  if (q.kind == "glimm" || q.kind == "iso-search") {
    need("left", cfg.towers, "tower");
    need("right", cfg.towers, "tower");
    for (const char* side : {"left", "right"}) {
      const auto& decl = cfg.towers.at(a.at(side).get<std::string>());
      if (!decl.graph_spec) {
        throw ConfigError(join(path, side), "tower '" + a.at(side).get<std::string>() +
                                                "' is not a uhf or graph tower");
      }
    }
  }
  if (q.kind == "min-commute" || q.kind == "max-commute") need("right", cfg.systems, "system");
  if (q.kind == "eq-in-limit") {
    for (const char* side : {"left", "right"}) {
      const Json& s = a.at(side);
      const std::string p = join(path, side);
      if (!s.is_object()) throw ConfigError(p, "expected {element = ..., level = ...}");
      check_keys(s, p, {"element", "level"});
      const std::string name = as_string(require(s, "element", p), join(p, "element"));
      if (!cfg.elements.count(name)) throw ConfigError(join(p, "element"), "undeclared element '" + name + "'");
      as_count(require(s, "level", p), join(p, "level"));
    }
  }
  if (q.kind == "omax-verify") {
    const Json& terms = a.at("terms");
    if (!terms.is_array() || terms.empty()) {
      throw ConfigError(join(path, "terms"), "expected a nonempty array of terms");
    }
    for (std::size_t i = 0; i < terms.size(); ++i) {
      const std::string p = at_index(join(path, "terms"), i);
      check_keys(terms[i], p, {"coefficient", "element"});
      require(terms[i], "coefficient", p);
      const std::string name = as_string(require(terms[i], "element", p), join(p, "element"));
      if (!cfg.elements.count(name)) throw ConfigError(join(p, "element"), "undeclared element '" + name + "'");
    }
  }
  if (q.kind == "cp-check") {
    const bool tower_form = a.contains("tower");
    const bool map_form = a.contains("source") || a.contains("target");
    if (tower_form == map_form) {
      throw ConfigError(path, "give either tower and level, or source and target");
    }
    if (tower_form && !a.contains("level")) throw ConfigError(path, "missing key 'level'");
    if (map_form && !(a.contains("source") && a.contains("target"))) {
      throw ConfigError(path, "give both source and target");
    }
  }
  if (q.kind == "relation-roundtrip" && !a.contains("graph") && !a.contains("tower")) {
    throw ConfigError(path, "give a graph or a tower");
  }
}

}  // namespace detail

/// Parses TOML (or JSON, when the text starts with '{') and validates names,
/// dimensions and graph invariants.
inline Config parse_config(std::string_view text) {
  Json root;
  std::size_t first = text.find_first_not_of(" \t\r\n");
  try {
    if (first != std::string_view::npos && text[first] == '{') {
      root = Json::parse(text);
    } else {
      root = parse_toml(text);
    }
  } catch (const TomlError& e) {
    throw ConfigError("", std::string("TOML syntax: ") + e.what());
  } catch (const Json::exception& e) {
    throw ConfigError("", std::string("JSON syntax: ") + e.what());
  }
  using detail::join;
  detail::check_keys(root, "", {"version", "seed", "systems", "graphs", "towers", "elements", "queries"});
  Config cfg;
  const Json& ver = detail::require(root, "version", "");
  if (!ver.is_number_integer() || ver.get<long long>() != kConfigVersion) {
    throw ConfigError("version", "unsupported config version (expected " +
                                     std::to_string(kConfigVersion) + ")");
  }
  if (root.contains("seed")) cfg.seed = detail::as_count(root.at("seed"), "seed", true);

  auto section = [&](const char* key) -> Json {
    if (!root.contains(key)) return Json::object();
    if (!root.at(key).is_object()) throw ConfigError(key, "expected a table");
    return root.at(key);
  };
  const Json graphs_j = section("graphs");
  for (const auto& [name, g] : graphs_j.items()) {
    try {
      cfg.graphs.emplace(name, parse_graph(g, join("graphs", name)));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(join("graphs", name), e.what());
    }
  }
  const Json systems_j = section("systems");
  for (const auto& [name, s] : systems_j.items()) {
    cfg.systems.emplace(name, detail::parse_system(s, join("systems", name), cfg));
  }
  const Json elements_j = section("elements");
  for (const auto& [name, e] : elements_j.items()) {
    const std::string p = join("elements", name);
    detail::check_keys(e, p, {"matrix", "n"});
    ElementDecl decl;
    decl.matrix = parse_matrix(detail::require(e, "matrix", p), join(p, "matrix"));
    if (decl.matrix.rows() != decl.matrix.cols()) throw ConfigError(join(p, "matrix"), "not square");
    if (e.contains("n")) decl.n = static_cast<std::size_t>(detail::as_count(e.at("n"), join(p, "n")));
    if (decl.matrix.rows() % static_cast<Eigen::Index>(decl.n) != 0) {
      throw ConfigError(join(p, "n"), "matrix size is not a multiple of n");
    }
    cfg.elements.emplace(name, std::move(decl));
  }
  const Json towers_j = section("towers");
  for (const auto& [name, t] : towers_j.items()) {
    cfg.towers.emplace(name, detail::parse_tower(t, join("towers", name), cfg));
  }

  if (root.contains("queries")) {
    const Json& qs = root.at("queries");
    if (!qs.is_array()) throw ConfigError("queries", "expected an array of tables");
    std::set<std::string> ids;
    for (std::size_t i = 0; i < qs.size(); ++i) {
      const std::string p = detail::at_index("queries", i);
      const Json& q = qs[i];
      if (!q.is_object()) throw ConfigError(p, "expected a table");
      QueryDecl decl;
      decl.index = i;
      decl.kind = detail::as_string(detail::require(q, "kind", p), join(p, "kind"));
      const QueryKind* kind = find_kind(decl.kind);
      if (!kind) throw ConfigError(join(p, "kind"), "unknown query kind '" + decl.kind + "'");
      decl.id = q.contains("id") ? detail::as_string(q.at("id"), join(p, "id"))
                                 : "q" + std::to_string(i + 1);
      if (!ids.insert(decl.id).second) throw ConfigError(join(p, "id"), "duplicate id '" + decl.id + "'");
      if (q.contains("tol")) {
        decl.tol = detail::as_real(q.at("tol"), join(p, "tol"));
        if (!(decl.tol >= 0.0)) throw ConfigError(join(p, "tol"), "must be nonnegative");
      }
      if (q.contains("seed")) decl.seed = detail::as_count(q.at("seed"), join(p, "seed"), true);
      if (q.contains("expect")) decl.expect = detail::as_string(q.at("expect"), join(p, "expect"));
      std::set<std::string> allowed{"kind", "id", "tol", "seed", "expect"};
      allowed.insert(kind->required.begin(), kind->required.end());
      allowed.insert(kind->optional.begin(), kind->optional.end());
      detail::check_keys(q, p, allowed);
      for (const std::string& r : kind->required) detail::require(q, r, p);
      decl.args = Json::object();
      for (auto it = q.begin(); it != q.end(); ++it) {
        if (!std::set<std::string>{"kind", "id", "tol", "seed", "expect"}.count(it.key())) {
          decl.args[it.key()] = it.value();
        }
      }
      if (decl.expect &&
          std::find(kind->verdicts.begin(), kind->verdicts.end(), *decl.expect) ==
              kind->verdicts.end()) {
        throw ConfigError(join(p, "expect"), "'" + *decl.expect + "' is not a verdict of " + decl.kind);
      }
      detail::check_references(decl, p, cfg);
      cfg.queries.push_back(std::move(decl));
    }
  }
  return cfg;
}

}  // namespace osys::cli
