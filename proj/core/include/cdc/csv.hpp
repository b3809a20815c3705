#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cdc {

/// Nine significant digits; "inf" / "-inf" / "nan" for non-finite values.
std::string format_real(double value);

/// Joins values with ';' for list-valued CSV cells.
std::string join_reals(std::span<const double> values);
std::string join_strings(std::span<const std::string> values, std::string_view sep = ";");

/// Splits one CSV line on commas (no quoting; the formats here never need it).
std::vector<std::string> split_csv_line(std::string_view line);

}  // namespace cdc
