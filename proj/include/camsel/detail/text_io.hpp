#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "camsel/errors.hpp"

namespace camsel::detail {

// Shortest decimal form that parses back to the identical double.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

inline bool parse_double(std::string_view s, double& out) {
  if (s == "inf") {
    out = std::numeric_limits<double>::infinity();
    return true;
  }
  if (s == "-inf") {
    out = -std::numeric_limits<double>::infinity();
    return true;
  }
  if (s == "nan") {
    out = std::numeric_limits<double>::quiet_NaN();
    return true;
  }
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc{} && res.ptr == s.data() + s.size();
}

template <typename Int>
bool parse_int(std::string_view s, Int& out) {
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc{} && res.ptr == s.data() + s.size();
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

// Line-oriented reader that tracks line numbers for diagnostics.
class LineReader {
 public:
  LineReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  // Next non-empty, non-comment line split into tokens; false at EOF.
  bool next(std::vector<std::string_view>& tokens) {
    while (std::getline(in_, line_)) {
      ++line_no_;
      if (line_.empty() || line_[0] == '#') continue;
      tokens = split_ws(line_);
      if (!tokens.empty()) return true;
    }
    return false;
  }

  std::vector<std::string_view> expect(std::string_view what) {
    std::vector<std::string_view> tokens;
    if (!next(tokens)) fail("unexpected end of file, expected " + std::string(what));
    return tokens;
  }

  [[noreturn]] void fail(const std::string& what) const { throw FormatError(source_, line_no_, what); }

  double number(std::string_view tok) const {
    double v = 0.0;
    if (!parse_double(tok, v)) fail("bad number '" + std::string(tok) + "'");
    return v;
  }

  template <typename Int = long long>
  Int integer(std::string_view tok) const {
    Int v{};
    if (!parse_int(tok, v)) fail("bad integer '" + std::string(tok) + "'");
    return v;
  }

  void expect_keyword(const std::vector<std::string_view>& tokens, std::string_view kw,
                      std::size_t count) const {
    if (tokens.empty() || tokens[0] != kw)
      fail("expected '" + std::string(kw) + "'");
    if (tokens.size() != count)
      fail("'" + std::string(kw) + "' expects " + std::to_string(count - 1) + " values, got " +
           std::to_string(tokens.size() - 1));
  }

  std::size_t line_number() const noexcept { return line_no_; }

 private:
  std::istream& in_;
  std::string source_;
  std::string line_;
  std::size_t line_no_ = 0;
};

}  // namespace camsel::detail
