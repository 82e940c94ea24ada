#pragma once

// Flat key/value configuration with [sections]:
//
//   # comment
//   [engine]
//   command = raxml-ng --search --msa {input} ...
//   searches = 20
//
// Keys are addressed as "section.key". Values may be wrapped in double quotes.

#include <cctype>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "cognatree/error.hpp"

namespace cognatree {

class Config {
 public:
  static Config parse(const std::string& text, const std::string& origin = "config") {
    Config c;
    std::istringstream in(text);
    std::string line;
    std::string section;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const std::string where = origin + ":" + std::to_string(lineno);
      std::string t = trim(line);
      if (t.empty() || t[0] == '#' || t[0] == ';') continue;
      if (t.front() == '[') {
        if (t.back() != ']') throw ParseError(where, "malformed section header");
        section = trim(t.substr(1, t.size() - 2));
        if (section.empty()) throw ParseError(where, "empty section name");
        continue;
      }
      auto eq = t.find('=');
      if (eq == std::string::npos) throw ParseError(where, "expected key = value");
      std::string key = trim(t.substr(0, eq));
      std::string value = trim(t.substr(eq + 1));
      if (key.empty()) throw ParseError(where, "empty key");
      if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
        value = value.substr(1, value.size() - 2);
      c.values_[section.empty() ? key : section + "." + key] = value;
    }
    return c;
  }

  // "section.key=value"
  void set_override(const std::string& assignment) {
    auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
      throw DataError("override must look like section.key=value: '" + assignment + "'");
    values_[trim(assignment.substr(0, eq))] = trim(assignment.substr(eq + 1));
  }

  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }

  std::optional<std::string> get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
  }

  std::string get_or(const std::string& key, const std::string& fallback) const {
    return get(key).value_or(fallback);
  }

  std::string require(const std::string& key) const {
    auto v = get(key);
    if (!v || v->empty()) throw DataError("configuration lacks required key '" + key + "'");
    return *v;
  }

  std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    try {
      std::size_t used = 0;
      auto x = std::stoull(*v, &used);
      if (used != v->size()) throw std::invalid_argument(*v);
      return x;
    } catch (const std::exception&) {
      throw DataError("configuration key '" + key + "' is not an unsigned integer: '" + *v + "'");
    }
  }

  double get_double(const std::string& key, double fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    try {
      std::size_t used = 0;
      double x = std::stod(*v, &used);
      if (used != v->size()) throw std::invalid_argument(*v);
      return x;
    } catch (const std::exception&) {
      throw DataError("configuration key '" + key + "' is not a number: '" + *v + "'");
    }
  }

  const std::map<std::string, std::string>& values() const noexcept { return values_; }

 private:
  static std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
  }

  std::map<std::string, std::string> values_;
};

}  // namespace cognatree
