#pragma once

// Text helpers shared by the CSV readers and writers.

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace trendpu {

/// Shortest decimal text that reads back to the same double.
std::string format_real(double value);

/// Splits on commas; no quoting (none of the formats here need it).
std::vector<std::string> split_csv_line(std::string_view line);

/// Strict parsers; failures raise ErrorKind::Parse naming `line_no`.
double parse_real(std::string_view text, std::size_t line_no);
std::int64_t parse_int(std::string_view text, std::size_t line_no);
std::size_t parse_size(std::string_view text, std::size_t line_no);

}  // namespace trendpu
