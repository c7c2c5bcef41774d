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

#ifndef STRATEST_TOOLS_CONFIG_HPP_
#define STRATEST_TOOLS_CONFIG_HPP_

// Flat experiment configuration. One `key = value` per line, `#` starts a
// comment. Values are JSON (numbers, booleans, strings, nested arrays for
// matrices in row-major order); a bare word is read as a string.
//
//   experiment = multisync
//   v_xx = [[1, 0], [0, 2]]
//   n_max = 10

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "stratest/gaussian_core.hpp"

namespace stratest::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Config {
 public:
  /// Throws ConfigError with the origin and line number.
  static Config Parse(std::istream& in, const std::string& origin);
  static Config Load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, nlohmann::json value);

  std::string experiment() const;
  std::string string(const std::string& key,
                     const std::optional<std::string>& fallback = {}) const;
  double number(const std::string& key,
                const std::optional<double>& fallback = {}) const;
  Index integer(const std::string& key,
                const std::optional<Index>& fallback = {}) const;
  bool boolean(const std::string& key,
               const std::optional<bool>& fallback = {}) const;
  std::uint64_t seed() const;
  /// Scalars become 1x1; a flat list is a column vector.
  Matrix matrix(const std::string& key,
                const std::optional<Matrix>& fallback = {}) const;
  /// Symmetric within tolerance; PD is left to the consumer.
  SymMatrix covariance(const std::string& key,
                       const std::optional<SymMatrix>& fallback = {}) const;
  std::vector<double> numbers(const std::string& key) const;

  /// Rejects keys outside `allowed` (plus the common ones).
  void require_only(const std::set<std::string>& allowed) const;

 private:
  const nlohmann::json& raw(const std::string& key) const;

  std::string origin_;
  std::map<std::string, nlohmann::json> values_;
};

}  // namespace stratest::cli

#endif  // STRATEST_TOOLS_CONFIG_HPP_
