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

#include <fstream>
#include <sstream>

#include "osys/cli/config.hpp"
#include "osys/cli/report.hpp"
#include "osys/cli/run.hpp"
#include "osys/cli/toml.hpp"

namespace osys::cli {
namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

// (a, b) -> (a, q b + (1 - q) a); the second coordinate decays like q^k.
const char* kSlowDecay = R"(
version = 1
[systems.c2]
kind = "diagonal"
dim = 2
[elements.second]
matrix = [[0, 0], [0, 1]]
[towers.slow]
kind = "linear"
levels = ["c2", "c2"]
maps = [{ inputs = [[[1, 0], [0, 0]], [[0, 0], [0, 1]]], outputs = [[[1, 0], [0, 0.001]], [[0, 0], [0, 0.999]]] }]
tail = "repeat"
[[queries]]
kind = "limit-norm"
tower = "slow"
element = "second"
level = 1
)";

TEST(Toml, TablesArraysAndValues) {
  const Json j = parse_toml(R"(
# comment
title = "a \"quoted\" \u00e9 string"  # trailing
literal = 'C:\path'
[a.b]
int = -42
float = 1.5e3
flag = true
list = [1, [2, 3], { x = 1 }]
dotted.key = 7
[[items]]
v = 1
[[items]]
v = 2
)");
  EXPECT_EQ(j["title"], "a \"quoted\" \xc3\xa9 string");
  EXPECT_EQ(j["literal"], "C:\\path");
  EXPECT_EQ(j["a"]["b"]["int"], -42);
  EXPECT_DOUBLE_EQ(j["a"]["b"]["float"].get<double>(), 1500.0);
  EXPECT_EQ(j["a"]["b"]["flag"], true);
  EXPECT_EQ(j["a"]["b"]["list"][1][1], 3);
  EXPECT_EQ(j["a"]["b"]["list"][2]["x"], 1);
  EXPECT_EQ(j["a"]["b"]["dotted"]["key"], 7);
  ASSERT_EQ(j["items"].size(), 2u);
  EXPECT_EQ(j["items"][1]["v"], 2);
}

TEST(Toml, ErrorsCarryLineNumbers) {
  try {
    parse_toml("a = 1\nb = \n");
    FAIL() << "expected a syntax error";
  } catch (const TomlError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(parse_toml("a = 1\na = 2\n"), TomlError);
  EXPECT_THROW(parse_toml("[t]\n[t]\n"), TomlError);
  EXPECT_THROW(parse_toml("s = \"open\n"), TomlError);
}

TEST(Config, ExampleParses) {
  const Config cfg = parse_config(read_file(OSYS_SOURCE_DIR "/configs/example.toml"));
  EXPECT_EQ(cfg.version, 1);
  EXPECT_EQ(cfg.seed, std::optional<std::uint64_t>(7));
  EXPECT_EQ(cfg.queries.size(), 17u);
  EXPECT_EQ(cfg.queries[0].id, "norm-e12");
  EXPECT_EQ(cfg.queries[2].id, "q3");
}

TEST(Config, JsonInputIsAccepted) {
  const Config cfg = parse_config(R"({"version": 1, "queries": [
      {"kind": "envelope", "graph": "g"}], "graphs": {"g": {"n": 2, "edges": [[1, 2]]}}})");
  ASSERT_EQ(cfg.queries.size(), 1u);
}

TEST(Config, RejectsBadInput) {
  EXPECT_NE(config_error("version = 2").find("unsupported config version"), std::string::npos);
  EXPECT_NE(config_error("version = 1\nbogus = 1").find("bogus"), std::string::npos);
  EXPECT_NE(config_error("version = 1\n[[queries]]\nkind = \"limit-norm\"\ntower = \"t\"\n"
                         "element = \"e\"\nlevel = 1\n")
                .find("undeclared tower 't'"),
            std::string::npos);
  EXPECT_NE(config_error("version = 1\n[graphs.g]\nn = 3\narcs = [[1, 2]]\n")
                .find("graph invariant"),
            std::string::npos);
  EXPECT_NE(config_error("version = 1\n[graphs.g]\nn = 2\nedges = [[1, 1]]\n")
                .find("graph invariant"),
            std::string::npos);
  EXPECT_NE(config_error("version = 1\n[[queries]]\nkind = \"frobnicate\"\n")
                .find("unknown query kind 'frobnicate'"),
            std::string::npos);
  const std::string g = "version = 1\n[graphs.g]\nn = 2\n";
  EXPECT_NE(config_error(g + "[[queries]]\nkind = \"envelope\"\ngraph = \"g\"\nexpect = \"Yes\"\n")
                .find("not a verdict"),
            std::string::npos);
  EXPECT_NE(config_error(g + "[[queries]]\nid = \"x\"\nkind = \"envelope\"\ngraph = \"g\"\n"
                             "[[queries]]\nid = \"x\"\nkind = \"epsilon\"\ngraph = \"g\"\n")
                .find("duplicate id"),
            std::string::npos);
  EXPECT_NE(config_error(g + "[[queries]]\nkind = \"envelope\"\n").find("graph"), std::string::npos);
  EXPECT_NE(config_error("version = 1\n[towers.t]\nkind = \"graph\"\nn1 = 2\nperiod = [2]\n"
                         "graphs = [\"complete\"]\ntail = [\"empty\"]\n")
                .find("towers.t"),
            std::string::npos);
}

TEST(Run, EmptyQueryListPasses) {
  const Config cfg = parse_config("version = 1\n");
  const auto results = run_all(cfg, 0);
  EXPECT_TRUE(results.empty());
  EXPECT_EQ(exit_code(summarize(results), true), 0);
}

TEST(Run, FailingExpectationGivesExitOne) {
  const Config cfg = parse_config(R"(
version = 1
[towers.two]
kind = "uhf"
n1 = 1
period = [2]
[towers.three]
kind = "uhf"
n1 = 1
period = [3]
[[queries]]
kind = "glimm"
left = "two"
right = "three"
expect = "Equivalent"
)");
  const auto results = run_all(cfg, 0);
  ASSERT_EQ(results.size(), 1u);
  EXPECT_EQ(results[0].outcome, Outcome::kFail);
  EXPECT_EQ(results[0].verdict, "NotEquivalent");
  EXPECT_EQ(exit_code(summarize(results), false), 1);
}

TEST(Run, UnknownIsFatalOnlyWhenStrict) {
  const auto results = run_all(parse_config(kSlowDecay), 0);
  ASSERT_EQ(results.size(), 1u);
  EXPECT_EQ(results[0].verdict, "Bracket");
  EXPECT_EQ(results[0].outcome, Outcome::kUnknown);
  EXPECT_EQ(exit_code(summarize(results), false), 0);
  EXPECT_EQ(exit_code(summarize(results), true), 1);
}

TEST(Run, ExampleConfigAllPass) {
  const std::string text = read_file(OSYS_SOURCE_DIR "/configs/example.toml");
  const auto results = run_all(parse_config(text), 7);
  for (const auto& r : results) {
    EXPECT_EQ(r.outcome, Outcome::kPass) << r.id << ": " << r.verdict << " " << r.error;
  }
}

TEST(Report, HashIgnoresWallTimeAndParallelism) {
  const std::string text = read_file(OSYS_SOURCE_DIR "/configs/example.toml");
  const Config cfg = parse_config(text);
  const Json a = make_report(text, 7, run_all(cfg, 7, 1));
  const Json b = make_report(text, 7, run_all(cfg, 7, 3));
  EXPECT_EQ(a["report_sha256"], b["report_sha256"]);
  EXPECT_EQ(a["schema"], "osys-report/1");
  EXPECT_EQ(a["summary"]["total"], 17);
  EXPECT_TRUE(a["results"][0].contains("wall_time_ms"));
  const Json c = make_report(text, 8, run_all(cfg, 8, 1));
  EXPECT_NE(a["report_sha256"], c["report_sha256"]);
}

TEST(Report, Sha256KnownVector) {
  EXPECT_EQ(sha256_hex("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Report, TextFormat) {
  const std::string text = "version = 1\n[graphs.g]\nn = 2\nedges = [[1, 2]]\n"
                           "[[queries]]\nid = \"blocks\"\nkind = \"envelope\"\ngraph = \"g\"\n";
  const Json rep = make_report(text, 0, run_all(parse_config(text), 0));
  const std::string out = text_report(rep);
  EXPECT_NE(out.find("[PASS] blocks (envelope): Blocks"), std::string::npos) << out;
}

}  // namespace
}  // namespace osys::cli
