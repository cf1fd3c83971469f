#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace metalens::csv {

struct Row {
  int line = 0;  // 1-based line number in the source text
  std::vector<std::string> fields;
};

/// Splits comma-separated text into rows. LF and CRLF are accepted, blank
/// lines skipped, and double-quoted fields may contain commas and doubled
/// quotes. Surrounding whitespace of unquoted fields is trimmed.
std::vector<Row> parse(std::string_view text);

std::optional<double> to_double(std::string_view field);
std::optional<long long> to_integer(std::string_view field);

/// Quotes a field when it contains a comma, quote or newline.
std::string escape(std::string_view field);

}  // namespace metalens::csv
