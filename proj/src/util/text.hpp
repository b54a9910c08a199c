#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace nevo {

// Shortest decimal string that round-trips the double exactly.
std::string format_double(double value);

std::string trim(std::string_view s);
std::vector<std::string> split_ws(std::string_view s);

double parse_double(std::string_view s, const std::string& what, int line = 0);
std::int64_t parse_int(std::string_view s, const std::string& what, int line = 0);

// One "key: value" line. Lines without a colon parse as {line, "", ""}.
struct KvLine {
  int lineno = 0;
  std::string key;
  std::string value;
};

// Splits a key-value document into lines, dropping blanks and '#' comments.
// The first line is expected to be a "<name> v<version>" header; callers
// check it themselves via expect_header.
std::vector<KvLine> read_kv_lines(const std::string& text);
void expect_header(const std::vector<KvLine>& lines, const std::string& name);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace nevo
