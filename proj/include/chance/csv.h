#pragma once

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace chance::csv {

// Splits one record. Handles double-quoted fields with "" escapes; does not
// support newlines inside quotes.
std::vector<std::string> split_line(std::string_view line, char delimiter = ',');

// Reads the next non-empty line; strips a trailing '\r'. Returns nullopt at EOF.
std::optional<std::string> next_line(std::istream& in, std::size_t& line_number);

// Quotes the field if it contains the delimiter, a quote or a newline.
std::string escape(std::string_view field, char delimiter = ',');

void write_row(std::ostream& out, const std::vector<std::string>& fields, char delimiter = ',');

// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

// Strict parse: the whole (trimmed) cell must be a finite number.
std::optional<double> parse_double(std::string_view cell);
std::optional<long long> parse_integer(std::string_view cell);

std::string_view trim(std::string_view s);

}  // namespace chance::csv
