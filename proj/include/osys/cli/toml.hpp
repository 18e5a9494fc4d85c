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

#include <cmath>
#include <cstdint>
#include <limits>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace osys::cli {

using Json = nlohmann::json;

class TomlError : public std::runtime_error {
 public:
  TomlError(std::size_t line, std::size_t col, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ", column " +
                           std::to_string(col) + ": " + what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Parser for the TOML subset used by config files: tables, arrays of
/// tables, dotted keys, basic and literal strings, integers, floats,
/// booleans, arrays and inline tables. Dates are not supported.
class TomlParser {
 public:
  explicit TomlParser(std::string_view text) : s_(text) {}

  Json parse() {
    Json root = Json::object();
    Json* current = &root;
    while (true) {
      skip_ws_comments_newlines();
      if (eof()) break;
      if (peek() == '[') {
        const bool array = peek(1) == '[';
        advance(array ? 2 : 1);
        skip_inline_ws();
        std::vector<std::string> path = parse_key_path();
        skip_inline_ws();
        expect(']');
        if (array) expect(']');
        current = array ? &open_array_table(root, path) : &open_table(root, path);
        end_of_line();
        continue;
      }
      std::vector<std::string> path = parse_key_path();
      skip_inline_ws();
      expect('=');
      skip_inline_ws();
      assign(*current, path, parse_value());
      end_of_line();
    }
    return root;
  }

 private:
  bool eof() const { return pos_ >= s_.size(); }
  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < s_.size() ? s_[pos_ + ahead] : '\0';
  }
  void advance(std::size_t n = 1) {
    for (std::size_t k = 0; k < n && !eof(); ++k) {
      if (s_[pos_] == '\n') {
        ++line_;
        line_start_ = pos_ + 1;
      }
      ++pos_;
    }
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw TomlError(line_, pos_ - line_start_ + 1, what);
  }
  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    advance();
  }

  void skip_inline_ws() {
    while (peek() == ' ' || peek() == '\t') advance();
  }
  void skip_comment() {
    if (peek() == '#') {
      while (!eof() && peek() != '\n') advance();
    }
  }
  void skip_ws_comments_newlines() {
    while (!eof()) {
      skip_inline_ws();
      skip_comment();
      if (peek() == '\n' || peek() == '\r') {
        advance();
      } else {
        break;
      }
    }
  }
  void end_of_line() {
    skip_inline_ws();
    skip_comment();
    if (peek() == '\r') advance();
    if (!eof() && peek() != '\n') fail("unexpected text after value");
  }

  static bool bare_key_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
           (c >= '0' && c <= '9') || c == '_' || c == '-';
  }

  std::string parse_key() {
    if (peek() == '"') return parse_basic_string();
    if (peek() == '\'') return parse_literal_string();
    std::string key;
    while (bare_key_char(peek())) {
      key += peek();
      advance();
    }
    if (key.empty()) fail("expected a key");
    return key;
  }

  std::vector<std::string> parse_key_path() {
    std::vector<std::string> path{parse_key()};
    skip_inline_ws();
    while (peek() == '.') {
      advance();
      skip_inline_ws();
      path.push_back(parse_key());
      skip_inline_ws();
    }
    return path;
  }

  Json& descend(Json& at, const std::string& key) {
    if (!at.contains(key)) at[key] = Json::object();
    Json& next = at[key];
    if (next.is_array() && !next.empty() && next.back().is_object()) return next.back();
    if (!next.is_object()) fail("key '" + key + "' is not a table");
    return next;
  }

  Json& open_table(Json& root, const std::vector<std::string>& path) {
    Json* at = &root;
    std::string id;
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
      id += path[k];
      if ((*at).contains(path[k]) && (*at)[path[k]].is_array()) {
        id += "[" + std::to_string((*at)[path[k]].size()) + "]";
      }
      id += '.';
      at = &descend(*at, path[k]);
    }
    const std::string& last = path.back();
    id += last;
    if (at->contains(last)) {
      if (!(*at)[last].is_object()) fail("table '" + last + "' redefines a value");
    } else {
      (*at)[last] = Json::object();
    }
    if (!defined_.insert(id).second) fail("table '" + id + "' defined twice");
    return (*at)[last];
  }

  Json& open_array_table(Json& root, const std::vector<std::string>& path) {
    Json* at = &root;
    for (std::size_t k = 0; k + 1 < path.size(); ++k) at = &descend(*at, path[k]);
    const std::string& last = path.back();
    if (!at->contains(last)) (*at)[last] = Json::array();
    if (!(*at)[last].is_array()) fail("'" + last + "' is not an array of tables");
    (*at)[last].push_back(Json::object());
    return (*at)[last].back();
  }

  void assign(Json& table, const std::vector<std::string>& path, Json value) {
    Json* at = &table;
    for (std::size_t k = 0; k + 1 < path.size(); ++k) at = &descend(*at, path[k]);
    if (at->contains(path.back())) fail("duplicate key '" + path.back() + "'");
    (*at)[path.back()] = std::move(value);
  }

  Json parse_value() {
    const char c = peek();
    if (c == '"') return parse_basic_string();
    if (c == '\'') return parse_literal_string();
    if (c == '[') return parse_array();
    if (c == '{') return parse_inline_table();
    if (s_.compare(pos_, 4, "true") == 0 && !bare_key_char(peek(4))) {
      advance(4);
      return true;
    }
    if (s_.compare(pos_, 5, "false") == 0 && !bare_key_char(peek(5))) {
      advance(5);
      return false;
    }
    return parse_number();
  }

  Json parse_number() {
    std::string tok;
    while (!eof() && (bare_key_char(peek()) || peek() == '+' || peek() == '.')) {
      tok += peek();
      advance();
    }
    if (tok.empty()) fail("expected a value");
    std::string clean;
    for (char ch : tok) {
      if (ch != '_') clean += ch;
    }
    const std::string body = (clean[0] == '+' || clean[0] == '-') ? clean.substr(1) : clean;
    const double sign = clean[0] == '-' ? -1.0 : 1.0;
    if (body == "inf") return sign * std::numeric_limits<double>::infinity();
    if (body == "nan") return std::numeric_limits<double>::quiet_NaN();
    const bool is_float = body.find_first_of(".eE") != std::string::npos;
    try {
      std::size_t used = 0;
      if (is_float) {
        const double v = std::stod(clean, &used);
        if (used != clean.size()) fail("malformed number '" + tok + "'");
        return v;
      }
      const long long v = std::stoll(clean, &used, 10);
      if (used != clean.size()) fail("malformed number '" + tok + "'");
      return v;
    } catch (const std::logic_error&) {
      fail("malformed value '" + tok + "'");
    }
  }

  Json parse_array() {
    expect('[');
    Json arr = Json::array();
    while (true) {
      skip_ws_comments_newlines();
      if (peek() == ']') {
        advance();
        return arr;
      }
      arr.push_back(parse_value());
      skip_ws_comments_newlines();
      if (peek() == ',') {
        advance();
        continue;
      }
      if (peek() != ']') fail("expected ',' or ']' in array");
    }
  }

  Json parse_inline_table() {
    expect('{');
    Json table = Json::object();
    skip_inline_ws();
    if (peek() == '}') {
      advance();
      return table;
    }
    while (true) {
      skip_inline_ws();
      std::vector<std::string> path = parse_key_path();
      skip_inline_ws();
      expect('=');
      skip_inline_ws();
      assign(table, path, parse_value());
      skip_inline_ws();
      if (peek() == ',') {
        advance();
        continue;
      }
      expect('}');
      return table;
    }
  }

  static void append_utf8(std::string& out, std::uint32_t cp) {
    if (cp < 0x80) {
      out += static_cast<char>(cp);
    } else if (cp < 0x800) {
      out += static_cast<char>(0xC0 | (cp >> 6));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
      out += static_cast<char>(0xE0 | (cp >> 12));
      out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
      out += static_cast<char>(0xF0 | (cp >> 18));
      out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
      out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    }
  }

  std::string parse_basic_string() {
    expect('"');
    std::string out;
    while (true) {
      if (eof() || peek() == '\n') fail("unterminated string");
      const char c = peek();
      advance();
      if (c == '"') return out;
      if (c != '\\') {
        out += c;
        continue;
      }
      const char e = peek();
      advance();
      switch (e) {
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case 'r': out += '\r'; break;
        case 'b': out += '\b'; break;
        case 'f': out += '\f'; break;
        case 'u':
        case 'U': {
          const std::size_t len = e == 'u' ? 4 : 8;
          std::uint32_t cp = 0;
          for (std::size_t k = 0; k < len; ++k) {
            const char h = peek();
            advance();
            cp <<= 4;
            if (h >= '0' && h <= '9') cp |= static_cast<std::uint32_t>(h - '0');
            else if (h >= 'a' && h <= 'f') cp |= static_cast<std::uint32_t>(h - 'a' + 10);
            else if (h >= 'A' && h <= 'F') cp |= static_cast<std::uint32_t>(h - 'A' + 10);
            else fail("bad unicode escape");
          }
          append_utf8(out, cp);
          break;
        }
        default: fail(std::string("unknown escape '\\") + e + "'");
      }
    }
  }

  std::string parse_literal_string() {
    expect('\'');
    std::string out;
    while (peek() != '\'') {
      if (eof() || peek() == '\n') fail("unterminated string");
      out += peek();
      advance();
    }
    advance();
    return out;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t line_start_ = 0;
  std::set<std::string> defined_;
};

inline Json parse_toml(std::string_view text) { return TomlParser(text).parse(); }

}  // namespace osys::cli
