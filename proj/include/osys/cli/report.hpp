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

#include <openssl/evp.h>

#include <cctype>
#include <cstdint>
#include <stdexcept>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "osys/cli/run.hpp"

#ifndef OSYS_VERSION
#define OSYS_VERSION "0.0.0"
#endif

namespace osys::cli {

inline constexpr const char* kReportSchema = "osys-report/1";

inline std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 0xf];
  }
  return out;
}

struct Summary {
  std::size_t pass = 0, fail = 0, unknown = 0, error = 0;
};

inline Summary summarize(const std::vector<QueryResult>& results) {
  Summary s;
  for (const auto& r : results) {
    switch (r.outcome) {
      case Outcome::kPass: ++s.pass; break;
      case Outcome::kFail: ++s.fail; break;
      case Outcome::kUnknown: ++s.unknown; break;
      case Outcome::kError: ++s.error; break;
    }
  }
  return s;
}

inline int exit_code(const Summary& s, bool strict_unknown) {
  return s.fail + s.error + (strict_unknown ? s.unknown : 0) == 0 ? 0 : 1;
}

/// The report; report_sha256 hashes everything except wall times and the
/// hash itself, so identical inputs give identical hashes.
inline Json make_report(const std::string& config_text, std::uint64_t seed,
                        const std::vector<QueryResult>& results) {
  Json report;
  report["schema"] = kReportSchema;
  report["tool"] = "osys";
  report["version"] = OSYS_VERSION;
  report["config_sha256"] = sha256_hex(config_text);
  report["seed"] = seed;
  Json rs = Json::array();
  for (const QueryResult& r : results) {
    Json j{{"index", r.index},
           {"id", r.id},
           {"kind", r.kind},
           {"outcome", to_string(r.outcome)},
           {"verdict", r.verdict},
           {"data", r.data},
           {"seed", r.seed}};
    if (!r.error.empty()) j["error"] = r.error;
    rs.push_back(std::move(j));
  }
  report["results"] = rs;
  const Summary s = summarize(results);
  report["summary"] = Json{{"total", results.size()}, {"pass", s.pass}, {"fail", s.fail},
                           {"unknown", s.unknown}, {"error", s.error}};
  report["report_sha256"] = sha256_hex(report.dump());
  for (std::size_t i = 0; i < results.size(); ++i) {
    report["results"][i]["wall_time_ms"] = results[i].wall_ms;
  }
  return report;
}

inline std::string text_report(const Json& report) {
  std::ostringstream out;
  for (const Json& r : report.at("results")) {
    std::string tag = r.at("outcome").get<std::string>();
    for (char& c : tag) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    out << "[" << tag << "] " << r.at("id").get<std::string>() << " (" << r.at("kind").get<std::string>()
        << ")";
    if (r.contains("error")) {
      out << ": " << r.at("error").get<std::string>();
    } else {
      out << ": " << r.at("verdict").get<std::string>();
    }
    out << "\n";
  }
  const Json& s = report.at("summary");
  out << s.at("total") << " queries: " << s.at("pass") << " pass, " << s.at("fail") << " fail, "
      << s.at("unknown") << " unknown, " << s.at("error") << " error\n";
  out << "report sha256 " << report.at("report_sha256").get<std::string>() << "\n";
  return out.str();
}

}  // namespace osys::cli
