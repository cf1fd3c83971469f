#include "metalens/csv.hpp"

#include <charconv>
#include <cmath>

namespace metalens::csv {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::vector<Row> parse(std::string_view text) {
  std::vector<Row> rows;
  int line = 1;
  std::size_t pos = 0;
  while (pos < text.size()) {
    Row row;
    row.line = line;
    std::string field;
    bool quoted_field = false;
    bool in_quotes = false;
    bool row_done = false;
    while (pos < text.size() && !row_done) {
      const char c = text[pos++];
      if (in_quotes) {
        if (c == '"') {
          if (pos < text.size() && text[pos] == '"') {
            field.push_back('"');
            ++pos;
          } else {
            in_quotes = false;
          }
        } else {
          if (c == '\n') ++line;
          field.push_back(c);
        }
        continue;
      }
      switch (c) {
        case '"':
          in_quotes = true;
          quoted_field = true;
          break;
        case ',':
          row.fields.push_back(quoted_field ? field : std::string(trim(field)));
          field.clear();
          quoted_field = false;
          break;
        case '\r':
          break;
        case '\n':
          row_done = true;
          break;
        default:
          field.push_back(c);
      }
    }
    row.fields.push_back(quoted_field ? field : std::string(trim(field)));
    ++line;
    const bool blank = row.fields.size() == 1 && row.fields.front().empty() && !quoted_field;
    if (!blank) rows.push_back(std::move(row));
  }
  return rows;
}

std::optional<double> to_double(std::string_view field) {
  field = trim(field);
  if (field.empty()) return std::nullopt;
  if (field.front() == '+') field.remove_prefix(1);
  double value = 0.0;
  auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || end != field.data() + field.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

std::optional<long long> to_integer(std::string_view field) {
  field = trim(field);
  if (field.empty()) return std::nullopt;
  if (field.front() == '+') field.remove_prefix(1);
  long long value = 0;
  auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || end != field.data() + field.size()) return std::nullopt;
  return value;
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace metalens::csv
