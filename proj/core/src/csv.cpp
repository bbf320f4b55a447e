#include "citegap/csv.hpp"

#include "citegap/error.hpp"

namespace citegap::csv {

std::vector<std::string> split_line(std::string_view line, std::size_t line_no) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  bool field_started_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(ch);
      }
    } else if (ch == '"' && cur.empty() && !field_started_quoted) {
      quoted = true;
      field_started_quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
      field_started_quoted = false;
    } else {
      cur.push_back(ch);
    }
  }
  if (quoted) throw ParseError("unterminated quoted field", line_no);
  fields.push_back(std::move(cur));
  return fields;
}

std::string escape(std::string_view field) {
  const bool needs = field.find_first_of(",\"\n") != std::string_view::npos ||
                     (!field.empty() && (field.front() == ' ' || field.back() == ' '));
  if (!needs) return std::string(field);
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

std::optional<std::vector<std::string>> Reader::next() {
  while (std::getline(in_, buf_)) {
    ++line_;
    std::string_view view = buf_;
    if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
    if (view.empty() || view.front() == '#') continue;
    return split_line(view, line_);
  }
  return std::nullopt;
}

}  // namespace citegap::csv
