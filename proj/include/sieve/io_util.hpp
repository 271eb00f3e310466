#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace sieve {

// Shortest representation that parses back to the same double.
std::string format_double(double v);

// Quotes a CSV field when it contains a delimiter, quote, or newline.
std::string csv_field(std::string_view s);

// Splits one CSV record; understands RFC-4180 style quoting. `line_no` is
// used in error messages only.
std::vector<std::string> parse_csv_record(std::string_view line, std::size_t line_no);

std::string read_file(const std::filesystem::path& path);

// Write-temp-then-rename so readers never observe a partial file.
void atomic_write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace sieve
