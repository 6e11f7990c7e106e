// Copyright 2026 The EPF Authors. All Rights Reserved.
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

// Minimal CSV reading/writing: comma separated, header row, no quoting.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace epf {

struct CsvRow {
  std::size_t line = 0;  // 1-based line number in the file
  std::vector<std::string> cells;
};

struct CsvFile {
  std::filesystem::path path;
  std::vector<std::string> header;
  std::vector<CsvRow> rows;

  // Index of a header column, or nullopt.
  std::optional<std::size_t> column(std::string_view name) const;
  // "path:line" for diagnostics.
  std::string where(const CsvRow& row) const;
};

// Throws DataError if the file cannot be opened, ParseError on ragged rows.
CsvFile read_csv(const std::filesystem::path& path);

// Empty cell -> nullopt. Throws ParseError (with location) on garbage.
std::optional<double> parse_optional_double(std::string_view cell, const std::string& where);
double parse_double(std::string_view cell, const std::string& where);
int parse_int(std::string_view cell, const std::string& where);

// Shortest representation that round-trips exactly.
std::string format_double(double v);

}  // namespace epf
