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

#include "ddopt/report_io.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "ddopt/error.hpp"
#include "json.hpp"

namespace ddopt {

using json = nlohmann::ordered_json;

Table::Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

void Table::AddRow(std::vector<Cell> row) {
  if (row.size() != columns_.size()) {
    throw Error(ErrorCode::kShapeError, "row has " + std::to_string(row.size()) +
                                            " cells, table has " +
                                            std::to_string(columns_.size()) + " columns");
  }
  rows_.push_back(std::move(row));
}

int Table::ColumnIndex(const std::string& name) const {
  for (std::size_t k = 0; k < columns_.size(); ++k) {
    if (columns_[k] == name) return static_cast<int>(k);
  }
  throw Error(ErrorCode::kInvalidArgument, "no column '" + name + "'");
}

double Table::Number(std::size_t row, const std::string& column) const {
  const Cell& c = rows_.at(row)[static_cast<std::size_t>(ColumnIndex(column))];
  if (const auto* d = std::get_if<double>(&c)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(&c)) return static_cast<double>(*i);
  throw Error(ErrorCode::kInvalidArgument, "column '" + column + "' is not numeric");
}

std::string FormatCell(const Cell& cell) {
  if (const auto* s = std::get_if<std::string>(&cell)) return *s;
  if (const auto* i = std::get_if<std::int64_t>(&cell)) return std::to_string(*i);
  const double d = std::get<double>(cell);
  if (std::isnan(d)) return "nan";
  if (std::isinf(d)) return d > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), d);
  return std::string(buf, res.ptr);
}

namespace {

std::string CsvEscape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::ofstream OpenOut(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kIoError, "cannot write '" + path + "'");
  return f;
}

json CellToJson(const Cell& c) {
  if (const auto* s = std::get_if<std::string>(&c)) return *s;
  if (const auto* i = std::get_if<std::int64_t>(&c)) return *i;
  const double d = std::get<double>(c);
  if (!std::isfinite(d)) return nullptr;
  return d;
}

}  // namespace

void WriteCsv(const Table& table, std::ostream& out) {
  for (std::size_t k = 0; k < table.columns().size(); ++k) {
    out << (k ? "," : "") << CsvEscape(table.columns()[k]);
  }
  out << '\n';
  for (const auto& row : table.rows()) {
    for (std::size_t k = 0; k < row.size(); ++k) {
      out << (k ? "," : "") << CsvEscape(FormatCell(row[k]));
    }
    out << '\n';
  }
}

void SaveCsv(const Table& table, const std::string& path) {
  std::ofstream f = OpenOut(path);
  WriteCsv(table, f);
  if (!f) throw Error(ErrorCode::kIoError, "write failed for '" + path + "'");
}

std::string TableToJson(const Table& table, int indent) {
  json j;
  j["columns"] = table.columns();
  j["rows"] = json::array();
  for (const auto& row : table.rows()) {
    json r = json::array();
    for (const Cell& c : row) r.push_back(CellToJson(c));
    j["rows"].push_back(std::move(r));
  }
  return j.dump(indent);
}

Table TableFromJson(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParseError, e.what());
  }
  try {
    Table t(j.at("columns").get<std::vector<std::string>>());
    for (const json& r : j.at("rows")) {
      std::vector<Cell> row;
      for (const json& c : r) {
        if (c.is_null()) {
          row.emplace_back(std::numeric_limits<double>::quiet_NaN());
        } else if (c.is_string()) {
          row.emplace_back(c.get<std::string>());
        } else if (c.is_number_integer()) {
          row.emplace_back(c.get<std::int64_t>());
        } else if (c.is_number()) {
          row.emplace_back(c.get<double>());
        } else {
          throw Error(ErrorCode::kParseError, "unsupported cell type");
        }
      }
      t.AddRow(std::move(row));
    }
    return t;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, e.what());
  }
}

void SaveJson(const Table& table, const std::string& path) {
  std::ofstream f = OpenOut(path);
  f << TableToJson(table) << '\n';
  if (!f) throw Error(ErrorCode::kIoError, "write failed for '" + path + "'");
}

void WriteJsonLines(const Table& table, std::ostream& out) {
  for (const auto& row : table.rows()) {
    json o = json::object();
    for (std::size_t k = 0; k < row.size(); ++k) o[table.columns()[k]] = CellToJson(row[k]);
    out << o.dump() << '\n';
  }
}

void SaveJsonLines(const Table& table, const std::string& path) {
  std::ofstream f = OpenOut(path);
  WriteJsonLines(table, f);
  if (!f) throw Error(ErrorCode::kIoError, "write failed for '" + path + "'");
}

void EnsureDirectory(const std::string& path) {
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create '" + path + "': " + ec.message());
}

}  // namespace ddopt
