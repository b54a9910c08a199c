#include "util/text.hpp"

#include <cctype>
#include <charconv>
#include <limits>
#include <fstream>
#include <sstream>

#include "util/error.hpp"

namespace nevo {

std::string format_double(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

namespace {

[[noreturn]] void bad_number(std::string_view s, const std::string& what, int line) {
  std::ostringstream msg;
  msg << "cannot parse " << what << " from '" << s << "'";
  if (line > 0) msg << " (line " << line << ")";
  raise(ErrorCode::parse_error, msg.str());
}

}  // namespace

double parse_double(std::string_view s, const std::string& what, int line) {
  const std::string t = trim(s);
  // to_chars spells non-finite values as inf/-inf/nan; from_chars does not
  // read them back.
  if (t == "inf") return std::numeric_limits<double>::infinity();
  if (t == "-inf") return -std::numeric_limits<double>::infinity();
  if (t == "nan" || t == "-nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size()) bad_number(s, what, line);
  return v;
}

std::int64_t parse_int(std::string_view s, const std::string& what, int line) {
  const std::string t = trim(s);
  std::int64_t v = 0;
  auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size()) bad_number(s, what, line);
  return v;
}

std::vector<KvLine> read_kv_lines(const std::string& text) {
  std::vector<KvLine> out;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    KvLine kv;
    kv.lineno = lineno;
    const auto colon = line.find(':');
    if (colon == std::string::npos) {
      kv.key = "";
      kv.value = line;
    } else {
      kv.key = trim(line.substr(0, colon));
      kv.value = trim(line.substr(colon + 1));
    }
    out.push_back(std::move(kv));
  }
  return out;
}

void expect_header(const std::vector<KvLine>& lines, const std::string& name) {
  if (lines.empty())
    raise(ErrorCode::parse_error, "empty document, expected '" + name + " v1' header");
  const std::string& head = lines.front().key.empty() ? lines.front().value : lines.front().key;
  if (head.rfind(name, 0) != 0)
    raise(ErrorCode::parse_error,
          "bad header '" + head + "', expected '" + name + " v1' (line " +
              std::to_string(lines.front().lineno) + ")");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::io_error, "cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(ErrorCode::io_error, "cannot write file: " + path);
  out << content;
  if (!out) raise(ErrorCode::io_error, "write failed: " + path);
}

}  // namespace nevo
