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


// osys: run batches of operator-system queries from a config file.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "osys/cli/config.hpp"
#include "osys/cli/report.hpp"
#include "osys/cli/run.hpp"

namespace {

constexpr int kUsageError = 2;

bool read_file(const std::string& path, std::string& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream ss;
  ss << in.rdbuf();
  out = ss.str();
  return true;
}

int explain(const std::string& kind) {
  const auto* k = osys::cli::find_kind(kind);
  if (!k) {
    std::cerr << "osys: unknown query kind '" << kind << "'. Known kinds:\n";
    for (const auto& q : osys::cli::query_kinds()) std::cerr << "  " << q.name << "\n";
    return kUsageError;
  }
  auto list = [](const std::vector<std::string>& v) {
    std::string s;
    for (const auto& x : v) s += (s.empty() ? "" : ", ") + x;
    return s.empty() ? std::string("-") : s;
  };
  std::cout << k->name << "\n  " << k->summary << "\n"
            << "  required: " << list(k->required) << "\n"
            << "  optional: " << list(k->optional) << ", tol, seed, expect, id\n"
            << "  verdicts: " << list(k->verdicts) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"osys: operator systems, inductive limits and UHF graph towers"};
  app.set_version_flag("--version", std::string(OSYS_VERSION));
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  std::size_t parallel = 1;
  std::string format = "json";
  bool strict_unknown = false;
  std::string output;

  auto* run = app.add_subcommand("run", "Run every query in a config and print a report");
  run->add_option("config", config_path, "Config file (TOML, or JSON)")->required();
  auto* seed_opt = run->add_option("--seed", seed, "Global seed (overrides the config's seed)");
  run->add_option("--parallel", parallel, "Worker threads")->check(CLI::PositiveNumber);
  run->add_option("--format", format, "Report format")->check(CLI::IsMember({"json", "text"}));
  run->add_flag("--strict-unknown", strict_unknown, "Treat unknown outcomes as failures");
  run->add_option("-o,--output", output, "Write the report here instead of stdout");

  auto* validate = app.add_subcommand("validate", "Parse and check a config without running it");
  validate->add_option("config", config_path, "Config file")->required();

  std::string kind;
  auto* expl = app.add_subcommand("explain", "Describe a query kind");
  expl->add_option("kind", kind, "Query kind")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  if (expl->parsed()) return explain(kind);

  std::string text;
  if (!read_file(config_path, text)) {
    std::cerr << "osys: cannot read " << config_path << "\n";
    return kUsageError;
  }
  osys::cli::Config cfg;
  try {
    cfg = osys::cli::parse_config(text);
  } catch (const std::exception& e) {
    std::cerr << "osys: " << config_path << ": " << e.what() << "\n";
    return kUsageError;
  }
  if (validate->parsed()) {
    std::cout << config_path << ": ok (" << cfg.systems.size() << " systems, "
              << cfg.graphs.size() << " graphs, " << cfg.towers.size() << " towers, "
              << cfg.elements.size() << " elements, " << cfg.queries.size() << " queries)\n";
    return 0;
  }

  const std::uint64_t global = seed_opt->count() ? seed : cfg.seed.value_or(0);
  const auto results = osys::cli::run_all(cfg, global, parallel);
  const osys::cli::Json report = osys::cli::make_report(text, global, results);
  const std::string body =
      format == "text" ? osys::cli::text_report(report) : report.dump(2) + "\n";
  if (output.empty()) {
    std::cout << body;
  } else {
    std::ofstream out(output, std::ios::binary);
    if (!out) {
      std::cerr << "osys: cannot write " << output << "\n";
      return kUsageError;
    }
    out << body;
  }
  return osys::cli::exit_code(osys::cli::summarize(results), strict_unknown);
}
