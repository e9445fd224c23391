#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace adq::csv {

/// Splits one CSV line. Double-quoted fields may contain commas and "" escapes.
/// Throws ParseError(line_number, column) on an unterminated quote.
std::vector<std::string> split_line(std::string_view line, std::size_t line_number);

/// Quotes a field only when it contains a comma, quote or newline.
std::string escape(std::string_view field);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

/// Strict full-field parse; throws ParseError(line, column) on failure.
double parse_double(std::string_view text, std::size_t line, std::size_t column);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

/// Reads lines, stripping a trailing '\r'. Returns false at end of input.
bool read_line(std::istream& in, std::string& line);

}  // namespace adq::csv
