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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <gtest/gtest.h>

#include "ddopt/error.hpp"

namespace ddopt {
namespace {

Table Sample() {
  Table t({"name", "n", "value"});
  t.AddRow({std::string("plain"), std::int64_t{3}, 0.1});
  t.AddRow({std::string("a,b \"q\""), std::int64_t{-7}, 1e-300});
  t.AddRow({std::string(""), std::int64_t{0}, 2.5});
  return t;
}

TEST(TableTest, ShapeAndLookup) {
  Table t = Sample();
  EXPECT_EQ(t.size(), 3u);
  EXPECT_EQ(t.ColumnIndex("value"), 2);
  EXPECT_THROW(t.ColumnIndex("missing"), Error);
  EXPECT_DOUBLE_EQ(t.Number(1, "n"), -7.0);
  EXPECT_DOUBLE_EQ(t.Number(0, "value"), 0.1);
  try {
    t.AddRow({1.0});
    FAIL() << "expected ShapeError";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kShapeError);
  }
}

TEST(FormatCellTest, ShortestRoundTrip) {
  EXPECT_EQ(FormatCell(0.1), "0.1");
  EXPECT_EQ(FormatCell(std::int64_t{42}), "42");
  EXPECT_EQ(FormatCell(std::numeric_limits<double>::quiet_NaN()), "nan");
  EXPECT_EQ(FormatCell(-std::numeric_limits<double>::infinity()), "-inf");
  const double x = 1.0 / 3.0;
  EXPECT_EQ(std::stod(FormatCell(x)), x);
}

TEST(CsvTest, QuotesAndIsDeterministic) {
  std::ostringstream a, b;
  WriteCsv(Sample(), a);
  WriteCsv(Sample(), b);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(a.str(),
            "name,n,value\n"
            "plain,3,0.1\n"
            "\"a,b \"\"q\"\"\",-7,1e-300\n"
            ",0,2.5\n");
}

TEST(CsvTest, EmptyTableWritesHeaderOnly) {
  std::ostringstream out;
  WriteCsv(Table({"t", "x"}), out);
  EXPECT_EQ(out.str(), "t,x\n");
}

TEST(JsonTest, RoundTrip) {
  const Table t = Sample();
  EXPECT_EQ(TableFromJson(TableToJson(t)), t);
  const Table empty({"a", "b"});
  EXPECT_EQ(TableFromJson(TableToJson(empty)), empty);
}

TEST(JsonTest, NonFiniteBecomesNull) {
  Table t({"x"});
  t.AddRow({std::numeric_limits<double>::quiet_NaN()});
  const std::string text = TableToJson(t, -1);
  EXPECT_NE(text.find("null"), std::string::npos);
  const Table back = TableFromJson(text);
  EXPECT_TRUE(std::isnan(back.Number(0, "x")));
  EXPECT_THROW(TableFromJson("{\"columns\": 3}"), Error);
  EXPECT_THROW(TableFromJson("not json"), Error);
}

TEST(JsonLinesTest, OneObjectPerRow) {
  std::ostringstream out;
  WriteJsonLines(Sample(), out);
  std::istringstream in(out.str());
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    EXPECT_EQ(line.front(), '{');
    ++n;
  }
  EXPECT_EQ(n, 3);
}

TEST(FilesTest, SaveCreatesParents) {
  const auto dir = std::filesystem::temp_directory_path() / "ddopt_report_io_test" / "nested";
  std::filesystem::remove_all(dir.parent_path());
  EnsureDirectory(dir.string());
  SaveCsv(Sample(), (dir / "t.csv").string());
  SaveJson(Sample(), (dir / "t.json").string());
  std::ifstream f(dir / "t.json");
  std::stringstream ss;
  ss << f.rdbuf();
  EXPECT_EQ(TableFromJson(ss.str()), Sample());
  std::filesystem::remove_all(dir.parent_path());
  EXPECT_THROW(SaveCsv(Sample(), "/proc/ddopt/nope.csv"), Error);
}

}  // namespace
}  // namespace ddopt
