#include <charconv>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "teamscope/io.hpp"

using namespace teamscope;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const char* tag) {
  fs::path p = fs::temp_directory_path() / (std::string("teamscope_io_") + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

double parse_double(const std::string& s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  REQUIRE(ec == std::errc{});
  REQUIRE(ptr == s.data() + s.size());
  return v;
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("format_double round-trips exactly") {
  for (double v : {0.1, 1.0 / 3.0, -0.0, 0.0, 1.0, -2.5, 1e300, 5e-324,
                   0.30000000000000004, 123456789.123456789}) {
    CHECK(parse_double(format_double(v)) == v);
  }
}

TEST_CASE("format_double prefers short forms") {
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(-3.0) == "-3");
  CHECK(format_double(0.1) == "0.1");
}

TEST_CASE("csv_escape quotes only when needed") {
  CHECK(csv_escape("plain") == "plain");
  CHECK(csv_escape("") == "");
  CHECK(csv_escape("a,b") == "\"a,b\"");
  CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(csv_escape("line\nbreak") == "\"line\nbreak\"");
}

TEST_CASE("csv_row joins with commas and ends with a newline") {
  CHECK(csv_row({"a", "b", "c"}) == "a,b,c\n");
  CHECK(csv_row({"x"}) == "x\n");
  CHECK(csv_row({"", ""}) == ",\n");
  CHECK(csv_row({"a,b", "c"}) == "\"a,b\",c\n");
}

TEST_CASE("csv_split inverts csv_row for single-line fields") {
  std::vector<std::string> fields{"plain", "with,comma", "with \"quotes\"", "", "end"};
  std::string row = csv_row(fields);
  row.pop_back();  // strip the newline before splitting
  CHECK(csv_split(row) == fields);
}

TEST_CASE("csv_split handles empty fields and lone values") {
  CHECK(csv_split("a,,c") == std::vector<std::string>{"a", "", "c"});
  CHECK(csv_split("solo") == std::vector<std::string>{"solo"});
  CHECK(csv_split("") == std::vector<std::string>{""});
}

TEST_CASE("read_csv returns header and rows") {
  fs::path dir = temp_dir("csv");
  atomic_write_file(dir / "t.csv", "id,name\n1,alpha\n2,\"b,eta\"\n");
  CsvFile f = read_csv(dir / "t.csv");
  CHECK(f.header == std::vector<std::string>{"id", "name"});
  REQUIRE(f.rows.size() == 2);
  CHECK(f.rows[0] == std::vector<std::string>{"1", "alpha"});
  CHECK(f.rows[1] == std::vector<std::string>{"2", "b,eta"});
  fs::remove_all(dir);
}

TEST_CASE("atomic_write_file leaves no temp files and overwrites") {
  fs::path dir = temp_dir("atomic");
  fs::path p = dir / "out.txt";
  atomic_write_file(p, "first");
  CHECK(read_text_file(p) == "first");
  atomic_write_file(p, "second");
  CHECK(read_text_file(p) == "second");
  std::size_t entries = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++entries;
  CHECK(entries == 1);
  fs::remove_all(dir);
}

TEST_CASE("read_text_file fails on a missing path") {
  CHECK_THROWS_AS(read_text_file("/nonexistent/teamscope/file.txt"), std::exception);
}

TEST_CASE("for_each_jsonl visits non-empty lines with 1-based numbers") {
  fs::path dir = temp_dir("jsonl");
  atomic_write_file(dir / "d.jsonl", "{\"a\":1}\n\n{\"a\":2}\n");
  std::vector<std::size_t> lines;
  std::vector<int> values;
  for_each_jsonl(dir / "d.jsonl", [&](const nlohmann::json& j, std::size_t line) {
    lines.push_back(line);
    values.push_back(j.at("a").get<int>());
  });
  CHECK(lines == std::vector<std::size_t>{1, 3});
  CHECK(values == std::vector<int>{1, 2});
  fs::remove_all(dir);
}

TEST_CASE("for_each_jsonl names the path and line on bad JSON") {
  fs::path dir = temp_dir("jsonl_bad");
  atomic_write_file(dir / "bad.jsonl", "{\"ok\":1}\nnot json\n");
  try {
    for_each_jsonl(dir / "bad.jsonl", [](const nlohmann::json&, std::size_t) {});
    FAIL("expected a parse failure");
  } catch (const std::runtime_error& e) {
    std::string msg = e.what();
    CHECK(msg.find("bad.jsonl") != std::string::npos);
    CHECK(msg.find("2") != std::string::npos);
  }
  fs::remove_all(dir);
}

}  // TEST_SUITE
