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

#ifndef STRATEST_TOOLS_TABLE_HPP_
#define STRATEST_TOOLS_TABLE_HPP_

#include <cstdint>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

namespace stratest::cli {

using Cell = std::variant<double, std::int64_t, std::string>;

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<Cell>> rows;

  /// Throws std::invalid_argument on a width mismatch.
  void add(std::vector<Cell> row);
};

/// 17 significant digits, so the text round-trips to the same double.
std::string format_number(double v);

/// Header row, comma separated, LF line endings. Strings containing a
/// comma or quote are quoted.
void write_csv(const Table& table, std::ostream& out);

}  // namespace stratest::cli

#endif  // STRATEST_TOOLS_TABLE_HPP_
