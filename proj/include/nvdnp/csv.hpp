// Minimal numeric CSV: optional "# key=value" metadata lines, one header
// line, then rows of numbers.  Output uses 6 significant digits.
#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace nvdnp::csv {

struct Table {
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const;  // throws if absent
  std::vector<double> column_values(std::size_t j) const;
};

/// "%.6g" in the C locale.
std::string format_number(double v);

std::string render(const Table& t);
Table parse(const std::string& text);
Table read_file(const std::filesystem::path& p);

/// Writes to a sibling temporary file, then renames over `p`.
void write_file_atomic(const std::filesystem::path& p, const std::string& content);
inline void write_table(const std::filesystem::path& p, const Table& t) { write_file_atomic(p, render(t)); }

}  // namespace nvdnp::csv
