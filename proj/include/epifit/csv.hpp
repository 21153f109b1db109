#pragma once

#include <string>
#include <vector>

namespace epifit {

/// Formats a double with 17 significant digits so that values survive a
/// write/parse round trip bit-exactly.
std::string fmt_double(double v);

/// Splits one CSV line on commas. No quoting; fields are trimmed of
/// surrounding whitespace and a trailing '\r' is dropped.
std::vector<std::string> split_csv_line(const std::string& line);

/// Reads a whole CSV file into rows of fields. Blank lines are skipped.
/// Throws std::runtime_error when the file cannot be opened.
std::vector<std::vector<std::string>> read_csv_rows(const std::string& path);

double parse_double(const std::string& field, const std::string& context);
long long parse_int(const std::string& field, const std::string& context);

} // namespace epifit
