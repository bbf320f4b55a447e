#pragma once

#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace citegap::csv {

/// Splits one CSV line (RFC 4180 quoting, no embedded newlines).
/// Throws ParseError on an unterminated quote.
std::vector<std::string> split_line(std::string_view line, std::size_t line_no = 0);

/// Quotes a field when it contains a comma, quote or leading/trailing space.
std::string escape(std::string_view field);

/// Line-oriented reader that skips blank lines and `#` comment lines.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  /// Next row, or nullopt at end of input.
  std::optional<std::vector<std::string>> next();

  /// 1-based number of the line returned by the last next().
  std::size_t line() const { return line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
  std::string buf_;
};

}  // namespace citegap::csv
