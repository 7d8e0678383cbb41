// Copyright 2026 The ddopt Authors
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

#ifndef DDOPT_REPORT_IO_HPP_
#define DDOPT_REPORT_IO_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace ddopt {

using Cell = std::variant<double, std::int64_t, std::string>;

// Column-ordered table of results. Column order is part of every export.
class Table {
 public:
  Table() = default;
  explicit Table(std::vector<std::string> columns);

  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<std::vector<Cell>>& rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }

  // Throws ShapeError when the row width differs from the column count.
  void AddRow(std::vector<Cell> row);
  int ColumnIndex(const std::string& name) const;
  double Number(std::size_t row, const std::string& column) const;

  friend bool operator==(const Table&, const Table&) = default;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<Cell>> rows_;
};

// Shortest round-trippable decimal form for doubles; "nan", "inf", "-inf"
// for non-finite values.
std::string FormatCell(const Cell& cell);

// CSV with a header line; strings containing separators or quotes are
// quoted.
void WriteCsv(const Table& table, std::ostream& out);
void SaveCsv(const Table& table, const std::string& path);

// {"columns": [...], "rows": [[...], ...]}; non-finite doubles become null.
std::string TableToJson(const Table& table, int indent = 2);
Table TableFromJson(const std::string& text);
void SaveJson(const Table& table, const std::string& path);

// One JSON object per row, keyed by column name.
void WriteJsonLines(const Table& table, std::ostream& out);
void SaveJsonLines(const Table& table, const std::string& path);

// Creates the directory (and parents). Throws IoError on failure.
void EnsureDirectory(const std::string& path);

}  // namespace ddopt

#endif  // DDOPT_REPORT_IO_HPP_
