// Copyright 2026 The stratest Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "config.hpp"

#include <cctype>
#include <fstream>

#include "stratest/errors.hpp"

namespace stratest::cli {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool is_bare_word(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' ||
          c == '-' || c == '.' || c == '/')) {
      return false;
    }
  }
  return true;
}

const std::set<std::string> kCommonKeys = {"experiment", "seed", "samples",
                                           "out"};

}  // namespace

Config Config::Parse(std::istream& in, const std::string& origin) {
  Config c;
  c.origin_ = origin;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    // '#' inside a quoted string is kept.
    bool quoted = false;
    for (std::size_t k = 0; k < line.size(); ++k) {
      if (line[k] == '"') quoted = !quoted;
      if (line[k] == '#' && !quoted) {
        line.resize(k);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = origin + ":" + std::to_string(number);
    if (eq == std::string::npos) {
      throw ConfigError(where + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string text = trim(line.substr(eq + 1));
    if (key.empty() || text.empty()) {
      throw ConfigError(where + ": empty key or value");
    }
    if (c.values_.count(key)) {
      throw ConfigError(where + ": duplicate key '" + key + "'");
    }
    nlohmann::json value = nlohmann::json::parse(text, nullptr, false);
    if (value.is_discarded()) {
      if (!is_bare_word(text)) {
        throw ConfigError(where + ": cannot parse value for '" + key + "'");
      }
      value = text;
    }
    c.values_[key] = std::move(value);
  }
  return c;
}

Config Config::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  return Parse(in, path.string());
}

void Config::set(const std::string& key, nlohmann::json value) {
  values_[key] = std::move(value);
}

const nlohmann::json& Config::raw(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) {
    throw ConfigError(origin_ + ": missing key '" + key + "'");
  }
  return it->second;
}

std::string Config::experiment() const { return string("experiment"); }

std::string Config::string(const std::string& key,
                           const std::optional<std::string>& fallback) const {
  if (!has(key) && fallback) return *fallback;
  const auto& v = raw(key);
  if (!v.is_string()) throw ConfigError(origin_ + ": '" + key + "' must be a string");
  return v.get<std::string>();
}

double Config::number(const std::string& key,
                      const std::optional<double>& fallback) const {
  if (!has(key) && fallback) return *fallback;
  const auto& v = raw(key);
  if (!v.is_number()) throw ConfigError(origin_ + ": '" + key + "' must be a number");
  return v.get<double>();
}

Index Config::integer(const std::string& key,
                      const std::optional<Index>& fallback) const {
  if (!has(key) && fallback) return *fallback;
  const auto& v = raw(key);
  if (!v.is_number_integer()) {
    throw ConfigError(origin_ + ": '" + key + "' must be an integer");
  }
  return v.get<Index>();
}

bool Config::boolean(const std::string& key,
                     const std::optional<bool>& fallback) const {
  if (!has(key) && fallback) return *fallback;
  const auto& v = raw(key);
  if (!v.is_boolean()) throw ConfigError(origin_ + ": '" + key + "' must be true or false");
  return v.get<bool>();
}

std::uint64_t Config::seed() const {
  if (!has("seed")) return kDefaultSeed;
  const auto& v = raw("seed");
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  }
  throw ConfigError(origin_ + ": 'seed' must be a non-negative integer");
}

Matrix Config::matrix(const std::string& key,
                      const std::optional<Matrix>& fallback) const {
  if (!has(key) && fallback) return *fallback;
  const auto& v = raw(key);
  const std::string bad = origin_ + ": '" + key + "' must be a number or a matrix";
  if (v.is_number()) return Matrix::Constant(1, 1, v.get<double>());
  if (!v.is_array() || v.empty()) throw ConfigError(bad);
  if (v.front().is_number()) {
    Matrix m(static_cast<Index>(v.size()), 1);
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) throw ConfigError(bad);
      m(static_cast<Index>(i), 0) = v[i].get<double>();
    }
    return m;
  }
  const std::size_t cols = v.front().is_array() ? v.front().size() : 0;
  if (cols == 0) throw ConfigError(bad);
  Matrix m(static_cast<Index>(v.size()), static_cast<Index>(cols));
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_array() || v[i].size() != cols) {
      throw ConfigError(origin_ + ": '" + key + "' has ragged rows");
    }
    for (std::size_t j = 0; j < cols; ++j) {
      if (!v[i][j].is_number()) throw ConfigError(bad);
      m(static_cast<Index>(i), static_cast<Index>(j)) = v[i][j].get<double>();
    }
  }
  return m;
}

SymMatrix Config::covariance(const std::string& key,
                             const std::optional<SymMatrix>& fallback) const {
  if (!has(key) && fallback) return *fallback;
  try {
    return SymMatrix(matrix(key));
  } catch (const Error& e) {
    throw ConfigError(origin_ + ": '" + key + "': " + e.what());
  }
}

std::vector<double> Config::numbers(const std::string& key) const {
  const auto& v = raw(key);
  std::vector<double> out;
  if (v.is_number()) return {v.get<double>()};
  if (!v.is_array()) throw ConfigError(origin_ + ": '" + key + "' must be a list");
  for (const auto& e : v) {
    if (!e.is_number()) throw ConfigError(origin_ + ": '" + key + "' must be a list of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

void Config::require_only(const std::set<std::string>& allowed) const {
  for (const auto& [key, value] : values_) {
    if (!allowed.count(key) && !kCommonKeys.count(key)) {
      throw ConfigError(origin_ + ": unknown key '" + key + "' for experiment " +
                        experiment());
    }
  }
}

}  // namespace stratest::cli
