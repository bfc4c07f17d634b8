#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace teamscope {

// shortest decimal string that round-trips the double (to_chars)
std::string format_double(double v);

// CSV with RFC-style quoting; missing optionals become empty fields
std::string csv_escape(const std::string& field);
std::string csv_row(const std::vector<std::string>& fields);
std::vector<std::string> csv_split(const std::string& line);

struct CsvFile {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};
CsvFile read_csv(const std::filesystem::path& path);

// Calls fn(parsed object, 1-based line number) per non-empty line.
// Throws std::runtime_error naming path and line on malformed JSON.
void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(const nlohmann::json&, std::size_t)>& fn);

std::string read_text_file(const std::filesystem::path& path);

// write to <path>.tmp then rename, so readers never see partial content
void atomic_write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace teamscope
