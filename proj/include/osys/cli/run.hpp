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
#include <atomic>
#include <chrono>
#include <cstdint>
#include <exception>
#include <string>
#include <thread>
#include <vector>

#include "osys/cli/config.hpp"
#include "osys/osys.hpp"

namespace osys::cli {

enum class Outcome { kPass, kFail, kUnknown, kError };

inline const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::kPass: return "pass";
    case Outcome::kFail: return "fail";
    case Outcome::kUnknown: return "unknown";
    case Outcome::kError: return "error";
  }
  return "?";
}

struct QueryResult {
  std::size_t index = 0;
  std::string id;
  std::string kind;
  Outcome outcome = Outcome::kError;
  std::string verdict;
  Json data = Json::object();
  std::uint64_t seed = 0;
  double wall_ms = 0.0;
  std::string error;
};

namespace detail {

inline Json complex_json(Complex z) {
  if (z.imag() == 0.0) return z.real();
  return Json::array({z.real(), z.imag()});
}

inline Json matrix_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(complex_json(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Json vector_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(complex_json(v(i)));
  return out;
}

inline std::size_t count_arg(const Json& a, const char* key, std::size_t fallback) {
  if (!a.contains(key)) return fallback;
  return static_cast<std::size_t>(as_count(a.at(key), key));
}

inline double real_arg(const Json& a, const char* key, double fallback) {
  if (!a.contains(key)) return fallback;
  return as_real(a.at(key), key);
}

/// What a query computed before `expect` is taken into account.
struct Answer {
  std::string verdict;
  Outcome natural = Outcome::kPass;
  Json data = Json::object();
};

struct Runner {
  const Config& cfg;
  const QueryDecl& q;
  std::uint64_t seed;

  Tolerance tol() const { return Tolerance(q.tol); }
  const Json& args() const { return q.args; }

  const TowerDecl& tower(const char* key = "tower") const {
    return cfg.towers.at(args().at(key).get<std::string>());
  }
  const ElementDecl& element(const std::string& name) const { return cfg.elements.at(name); }
  SystemPtr system(const char* key) const {
    return cfg.systems.at(args().at(key).get<std::string>());
  }

  LimitElement limit_element(const TowerPtr& t, const std::string& name, std::size_t level) const {
    const ElementDecl& e = element(name);
    auto arr = ElementArray::from_assembled(t->level(level), e.n, e.matrix, Tolerance(1e-8));
    return make_limit_element(t, level, std::move(arr));
  }

  LimitElement arg_element() const {
    return limit_element(tower().tower, args().at("element").get<std::string>(),
                         count_arg(args(), "level", 1));
  }

  std::size_t horizon() const { return count_arg(args(), "horizon", kDefaultHorizon); }

  Json state_json(const LevelState& s) const {
    return Json{{"level", s.level}, {"n", s.n}, {"density", matrix_json(s.density)}};
  }

  Answer check_tower() const {
    const TowerPtr& t = tower().tower;
    const std::size_t want = count_arg(args(), "levels", std::min<std::size_t>(t->cap(), 6));
    const std::size_t top = t->top_level(want);
    Answer a;
    Json maps = Json::array();
    bool ok = true;
    for (std::size_t k = 1; k < top; ++k) {
      const auto f = t->map(k);
      const CpCheckResult r = cp_check(*f, 4, tol(), derive_seed(seed, k));
      ok = ok && r.positive;
      Json m{{"level", k},
             {"kind", f->is_star_hom() ? "star-hom" : "linear"},
             {"positive", r.positive},
             {"exact", r.exact},
             {"method", r.method}};
      if (r.level == kAllLevels) {
        m["checked_to"] = "all";
      } else {
        m["checked_to"] = r.level;
      }
      maps.push_back(std::move(m));
    }
    Json dims = Json::array();
    for (std::size_t k = 1; k <= top; ++k) {
      const auto s = t->level(k);
      dims.push_back(Json{{"ambient", s->ambient_dim()}, {"dim", s->dim()}});
    }
    a.data = Json{{"levels", top}, {"requested", want}, {"dims", dims}, {"maps", maps},
                  {"embedding", t->embedding_flag()}};
    a.verdict = ok ? "Valid" : "Invalid";
    a.natural = ok ? Outcome::kPass : Outcome::kFail;
    return a;
  }

  Answer limit_norm_q() const {
    const LimitNorm r = limit_norm(arg_element(), horizon(), tol());
    Answer a;
    a.verdict = r.is_value ? "Value" : "Bracket";
    a.natural = r.is_value ? Outcome::kPass : Outcome::kUnknown;
    a.data = Json{{"method", r.method}, {"lo", r.lo}, {"hi", r.hi}, {"sequence", r.sequence}};
    if (r.is_value) a.data["value"] = r.value;
    return a;
  }

  Answer limit_positive_q() const {
    const PositivityResult r =
        limit_positive(arg_element(), horizon(), tol(), real_arg(args(), "delta", 0.0));
    Answer a;
    a.verdict = to_string(r.verdict);
    a.natural = r.verdict == Positivity::kUndetermined ? Outcome::kUnknown : Outcome::kPass;
    Json ladder = Json::array();
    for (const RungResult& rung : r.ladder) {
      Json j{{"r", rung.r}};
      j["passed_at"] = rung.passed_at ? Json(*rung.passed_at) : Json(nullptr);
      ladder.push_back(std::move(j));
    }
    a.data = Json{{"method", r.method}, {"ladder", ladder}, {"min_eigenvalues", r.min_eigenvalues}};
    if (r.witness) {
      a.data["witness"] = state_json(*r.witness);
      a.data["witness_value"] = r.witness_value;
    }
    return a;
  }

  static Json null_json(const NullSpaceResult& r, const Runner& self) {
    Json j{{"method", r.method}, {"sequence", r.sequence}};
    if (r.witness) {
      j["witness"] = self.state_json(*r.witness);
      j["witness_value"] = r.witness_value;
    }
    return j;
  }

  Answer null_space_q() const {
    const NullSpaceResult r = null_space_member(arg_element(), horizon(), tol());
    Answer a;
    a.verdict = to_string(r.verdict);
    a.natural = r.verdict == Trilean::kUndetermined ? Outcome::kUnknown : Outcome::kPass;
    a.data = null_json(r, *this);
    return a;
  }

  Answer eq_in_limit_q() const {
    const TowerPtr& t = tower().tower;
    auto side = [&](const char* key) {
      const Json& s = args().at(key);
      return limit_element(t, s.at("element").get<std::string>(),
                           static_cast<std::size_t>(s.at("level").get<std::uint64_t>()));
    };
    const EqualityResult r = eq_in_limit(side("left"), side("right"), horizon(), tol());
    Answer a;
    a.verdict = to_string(r.verdict);
    a.natural = r.verdict == LimitEquality::kUndetermined ? Outcome::kUnknown : Outcome::kPass;
    a.data = null_json(r.difference, *this);
    a.data["compared_at"] = r.compared_at;
    return a;
  }

  Answer pullback_q() const {
    const TowerPtr& t = tower().tower;
    const std::size_t from = count_arg(args(), "from", 1);
    const std::size_t to = count_arg(args(), "to", 1);
    const std::size_t n = count_arg(args(), "n", 1);
    const std::size_t d = t->level(from)->ambient_dim();
    const Json& st = args().at("state");
    Matrix rho;
    if (st.is_string() && st.get<std::string>() == "trace") {
      rho = identity(n * d) / static_cast<double>(n * d);
    } else if (st.is_object() && st.contains("vector")) {
      Vector v = parse_vector(st.at("vector"), "state.vector");
      if (v.norm() == 0.0) throw Error("state vector is zero");
      v /= v.norm();
      rho = v * v.adjoint();
    } else if (st.is_object() && st.contains("density")) {
      rho = parse_matrix(st.at("density"), "state.density");
    } else {
      throw ConfigError("state", "expected \"trace\", {vector = [...]} or {density = [[...]]}");
    }
    if (static_cast<std::size_t>(rho.rows()) != n * d) {
      throw DimensionError("state has size " + std::to_string(rho.rows()) + ", level " +
                           std::to_string(from) + " needs " + std::to_string(n * d));
    }
    const LevelState top = LevelState::make(from, n, rho);
    const LevelState out = pullback_state(t, top, to);
    Answer a;
    a.verdict = "State";
    a.data = state_json(out);
    a.data["trace"] = complex_json(out.density.trace());
    a.data["min_eigenvalue"] = min_eigenvalue(out.density);
    return a;
  }

  Answer glimm_q() const {
    const auto& l = tower("left").graph_spec->uhf;
    const auto& r = tower("right").graph_spec->uhf;
    const uhf::GlimmResult g = uhf::glimm_equivalent(l, r);
    Answer a;
    a.verdict = g.equivalent ? "Equivalent" : "NotEquivalent";
    a.data = Json{{"left", uhf::SupernaturalNumber::of(l).to_string()},
                  {"right", uhf::SupernaturalNumber::of(r).to_string()}};
    if (!g.equivalent) {
      a.data["prime"] = g.prime;
      a.data["larger"] = g.left_exceeds ? "left" : "right";
    }
    return a;
  }

  Answer iso_q() const {
    const TowerDecl& l = tower("left");
    const TowerDecl& r = tower("right");
    uhf::IsoOptions opts;
    opts.node_budget = count_arg(args(), "budget", opts.node_budget);
    opts.level_window = count_arg(args(), "window", opts.level_window);
    const uhf::IsoResult res =
        uhf::iso_search(*l.graph_spec, *r.graph_spec, count_arg(args(), "depth", 6), opts);
    Answer a;
    a.verdict = uhf::to_string(res.verdict);
    a.natural = res.verdict == uhf::IsoVerdict::kUnknown ? Outcome::kUnknown : Outcome::kPass;
    a.data = Json{{"depth", res.depth}, {"nodes", res.nodes}};
    if (!res.invariant.empty()) a.data["invariant"] = res.invariant;
    if (!res.detail.empty()) a.data["detail"] = res.detail;
    if (res.witness) {
      const uhf::IsoWitness& w = *res.witness;
      Json phi = Json::array(), psi = Json::array();
      for (const auto& f : w.phi) phi.push_back(f.image);
      for (const auto& f : w.psi) psi.push_back(f.image);
      a.data["a_levels"] = w.a_levels;
      a.data["b_levels"] = w.b_levels;
      a.data["phi"] = phi;
      a.data["psi"] = psi;
      const uhf::ReplayResult rep = uhf::replay_witness(*l.graphs, *r.graphs, w);
      a.data["replay"] = rep.ok ? "ok" : rep.reason;
      if (!rep.ok) a.natural = Outcome::kFail;
    }
    return a;
  }

  const uhf::FiniteGraph& graph() const {
    return cfg.graphs.at(args().at("graph").get<std::string>());
  }

  Answer envelope_q() const {
    const auto blocks = uhf::envelope_blocks(graph());
    Answer a;
    a.verdict = "Blocks";
    a.data = Json{{"blocks", blocks}, {"largest", blocks.empty() ? 0 : blocks.front()}};
    return a;
  }

  Answer roundtrip_q() const {
    Answer a;
    bool ok = true;
    Json checks = Json::array();
    auto roundtrip = [&](const uhf::FiniteGraph& g, const std::string& where) {
      const uhf::LevelRelation p = uhf::relation_of_system(g);
      const bool fwd = uhf::system_of_relation(p) == g;
      const bool back = uhf::relation_of_system(uhf::system_of_relation(p)) == p;
      ok = ok && fwd && back;
      checks.push_back(Json{{"at", where}, {"graph_roundtrip", fwd}, {"relation_roundtrip", back}});
    };
    if (args().contains("graph")) roundtrip(graph(), "graph");
    if (args().contains("tower")) {
      const TowerDecl& t = tower();
      if (!t.graphs) throw ConfigError("tower", "relation-roundtrip needs a uhf or graph tower");
      const std::size_t levels = count_arg(args(), "levels", 3);
      for (std::size_t k = 1; k <= levels; ++k) {
        if (t.graphs->dim(k) > 4096) break;
        const auto g = t.graphs->graph(k);
        roundtrip(*g, "level " + std::to_string(k));
        if (k == levels || t.graphs->dim(k + 1) > 4096) break;
        const std::size_t l = t.graphs->multiplicity(k);
        const auto next = t.graphs->graph(k + 1);
        // Refining the relation and lifting the system agree, and the next
        // level contains the refinement.
        const uhf::LevelRelation refined = uhf::refine_relation(uhf::relation_of_system(*g), l);
        const bool natural = refined == uhf::relation_of_system(uhf::lift_graph(*g, l));
        const bool contained = refined.bits().subset_of(uhf::relation_of_system(*next).bits());
        ok = ok && natural && contained;
        checks.back()["refine_matches_lift"] = natural;
        checks.back()["refinement_in_next"] = contained;
      }
    }
    a.verdict = ok ? "Holds" : "Fails";
    a.natural = ok ? Outcome::kPass : Outcome::kFail;
    a.data = Json{{"checks", checks}};
    return a;
  }

  Answer epsilon_q() const {
    const uhf::LevelRelation p = uhf::relation_of_system(graph());
    const uhf::LevelRelation c = uhf::epsilon_closure(p);
    const auto label = uhf::components(c.bits());
    std::vector<std::vector<std::size_t>> classes;
    for (std::size_t v = 0; v < label.size(); ++v) {
      if (label[v] >= classes.size()) classes.resize(label[v] + 1);
      classes[label[v]].push_back(v + 1);
    }
    Answer a;
    a.verdict = "Closure";
    a.data = Json{{"classes", classes},
                  {"pairs", c.bits().count()},
                  {"already_transitive", c == p}};
    return a;
  }

  Answer omin_q() const {
    const SystemPtr s = system("system");
    const ElementDecl& e = element(args().at("element").get<std::string>());
    const auto x = ElementArray::from_assembled(s, e.n, e.matrix, Tolerance(1e-8));
    const OminResult r = omin_contains(s, x, tol(), count_arg(args(), "budget", 64), seed);
    Answer a;
    a.verdict = to_string(r.verdict);
    a.natural = r.verdict == OminVerdict::kUnknown ? Outcome::kUnknown : Outcome::kPass;
    a.data = Json{{"exact", r.exact}, {"method", r.method}, {"value", r.value}, {"starts", r.starts}};
    if (r.verdict == OminVerdict::kOutside) a.data["witness"] = vector_json(r.witness);
    return a;
  }

  Answer omax_q() const {
    const SystemPtr s = system("system");
    const ElementDecl& claimed = element(args().at("claimed").get<std::string>());
    OmaxCertificate cert;
    cert.n = claimed.n;
    const Json& terms = args().at("terms");
    for (std::size_t i = 0; i < terms.size(); ++i) {
      const std::string p = at_index("terms", i);
      const ElementDecl& e = element(terms[i].at("element").get<std::string>());
      if (e.n != 1) throw ConfigError(join(p, "element"), "term elements must be single entries (n = 1)");
      cert.terms.push_back(OmaxTerm{parse_matrix(terms[i].at("coefficient"), join(p, "coefficient")),
                                    AouElement::from_matrix(s, e.matrix, Tolerance(1e-8))});
    }
    if (args().contains("compression")) {
      cert.compression = parse_matrix(args().at("compression"), "compression");
    }
    const auto x = ElementArray::from_assembled(s, claimed.n, claimed.matrix, Tolerance(1e-8));
    const CertificateCheck r = omax_certificate_check(cert, x, tol());
    Answer a;
    a.verdict = r.accepted ? "Accepted" : "Rejected";
    a.data = Json{{"reason", r.reason}};
    return a;
  }

  Answer min_commute_q() const {
    const MinCommutationReport r = verify_min_commutation(
        tower().tower, system("right"), count_arg(args(), "samples", 20),
        count_arg(args(), "levels", 3), count_arg(args(), "n_max", 2), tol(), seed);
    Answer a;
    const bool ok = r.disagreements == 0;
    a.verdict = ok ? "Agree" : "Disagree";
    a.natural = ok ? Outcome::kPass : Outcome::kFail;
    a.data = Json{{"samples", r.samples},
                  {"comparisons", r.comparisons},
                  {"agreements", r.agreements},
                  {"disagreements", r.disagreements}};
    return a;
  }

  Answer max_commute_q() const {
    MaxHarness h;
    h.samples = count_arg(args(), "samples", 50);
    h.levels = count_arg(args(), "levels", 3);
    if (args().contains("corrupt_every")) {
      h.corrupt_every = static_cast<std::size_t>(as_count(args().at("corrupt_every"), "corrupt_every", true));
    }
    const MaxCommutationReport r = verify_max_commutation(tower().tower, system("right"), h, tol(), seed);
    const bool ok = r.rejected_valid == 0 && r.false_accepts == 0 && r.elementary_failed == 0;
    Answer a;
    a.verdict = ok ? "Verified" : "Rejected";
    a.natural = ok ? Outcome::kPass : Outcome::kFail;
    a.data = Json{{"certificates", r.certificates},
                  {"transports", r.transports},
                  {"verified", r.verified},
                  {"rejected_valid", r.rejected_valid},
                  {"injected", r.injected},
                  {"injected_rejected", r.injected_rejected},
                  {"false_accepts", r.false_accepts},
                  {"elementary", r.elementary},
                  {"elementary_certified", r.elementary_certified},
                  {"elementary_not_positive", r.elementary_not_positive},
                  {"elementary_failed", r.elementary_failed}};
    return a;
  }

  Answer cp_q() const {
    std::shared_ptr<const CpMap> f;
    if (args().contains("tower")) {
      f = tower().tower->map(count_arg(args(), "level", 1));
    } else {
      const SystemPtr src = system("source");
      const SystemPtr tgt = system("target");
      if (args().contains("multiplicity")) {
        f = std::make_shared<const CpMap>(
            CpMap::star_hom(src, tgt, count_arg(args(), "multiplicity", 1)));
      } else {
        if (!args().contains("inputs") || !args().contains("outputs")) {
          throw ConfigError("", "cp-check needs multiplicity or inputs/outputs");
        }
        const Json& in = args().at("inputs");
        const Json& out = args().at("outputs");
        if (!in.is_array() || !out.is_array() || in.size() != out.size()) {
          throw ConfigError("inputs", "inputs and outputs must be arrays of equal length");
        }
        std::vector<Matrix> ins, outs;
        for (std::size_t k = 0; k < in.size(); ++k) {
          ins.push_back(resolve_matrix(in[k], at_index("inputs", k), cfg));
          outs.push_back(resolve_matrix(out[k], at_index("outputs", k), cfg));
        }
        f = std::make_shared<const CpMap>(CpMap::linear_from_images(src, tgt, ins, outs));
      }
    }
    const CpCheckResult r = cp_check(*f, count_arg(args(), "n_max", 4), tol(), seed,
                                     count_arg(args(), "samples", 64));
    Answer a;
    a.verdict = r.positive ? "CpVerified" : "NotPositiveAt";
    a.natural = r.positive && !r.exact ? Outcome::kUnknown : Outcome::kPass;
    a.data = Json{{"exact", r.exact}, {"method", r.method}};
    if (r.level == kAllLevels) {
      a.data["level"] = "all";
    } else {
      a.data["level"] = r.level;
    }
    if (r.witness) {
      a.data["witness"] = Json{{"level", r.witness->level},
                               {"input", matrix_json(r.witness->input)},
                               {"min_eigenvalue", r.witness->min_eigenvalue}};
    }
    return a;
  }

  Answer dispatch() const {
    const std::string& k = q.kind;
    if (k == "check-tower") return check_tower();
    if (k == "limit-norm") return limit_norm_q();
    if (k == "limit-positive") return limit_positive_q();
    if (k == "null-space") return null_space_q();
    if (k == "eq-in-limit") return eq_in_limit_q();
    if (k == "pullback-state") return pullback_q();
    if (k == "glimm") return glimm_q();
    if (k == "iso-search") return iso_q();
    if (k == "envelope") return envelope_q();
    if (k == "relation-roundtrip") return roundtrip_q();
    if (k == "epsilon") return epsilon_q();
    if (k == "omin") return omin_q();
    if (k == "omax-verify") return omax_q();
    if (k == "min-commute") return min_commute_q();
    if (k == "max-commute") return max_commute_q();
    if (k == "cp-check") return cp_q();
    throw ConfigError("kind", "unknown query kind '" + k + "'");
  }
};

}  // namespace detail

inline std::uint64_t query_seed(const QueryDecl& q, std::uint64_t global) {
  return q.seed ? *q.seed : derive_seed(global, q.index);
}

/// Runs one query; exceptions become an error outcome.
inline QueryResult run_query(const Config& cfg, const QueryDecl& q, std::uint64_t global_seed) {
  QueryResult res;
  res.index = q.index;
  res.id = q.id;
  res.kind = q.kind;
  res.seed = query_seed(q, global_seed);
  const auto start = std::chrono::steady_clock::now();
  try {
    detail::Answer a = detail::Runner{cfg, q, res.seed}.dispatch();
    res.verdict = a.verdict;
    res.data = std::move(a.data);
    if (!q.expect) {
      res.outcome = a.natural;
    } else if (*q.expect == a.verdict) {
      res.outcome = Outcome::kPass;
    } else {
      res.outcome = a.natural == Outcome::kUnknown ? Outcome::kUnknown : Outcome::kFail;
    }
  } catch (const std::exception& e) {
    res.outcome = Outcome::kError;
    res.error = e.what();
  }
  res.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - start)
                    .count();
  return res;
}

/// Runs all queries on up to `parallel` threads; results keep config order.
inline std::vector<QueryResult> run_all(const Config& cfg, std::uint64_t global_seed,
                                        std::size_t parallel = 1) {
  std::vector<QueryResult> out(cfg.queries.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < out.size(); i = next++) {
      out[i] = run_query(cfg, cfg.queries[i], global_seed);
    }
  };
  parallel = std::max<std::size_t>(1, std::min(parallel, out.size()));
  if (parallel == 1) {
    worker();
    return out;
  }
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < parallel; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  return out;
}

}  // namespace osys::cli
