#pragma once

// Structured text tables used for every intermediate artifact:
//
//   # brdfnqm-<kind> v<version>
//   # key: value            (zero or more metadata lines)
//   col_a<TAB>col_b ...     (column header)
//   row values, tab separated
//
// Doubles are written with 17 significant digits so they read back exactly.

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace brdfnqm {

struct TextTable {
  std::string kind;
  int version = 1;
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void set_meta(std::string key, std::string value);
  const std::string& meta_value(std::string_view key) const;
  bool has_meta(std::string_view key) const;
  std::size_t column(std::string_view name) const;
  bool has_column(std::string_view name) const;
  const std::string& cell(std::size_t row, std::string_view col) const { return rows[row][column(col)]; }
};

void write_table(const TextTable& table, const std::filesystem::path& path);
std::string format_table(const TextTable& table);
TextTable read_table(const std::filesystem::path& path, std::string_view expected_kind);

std::string fmt_double(double v);
double parse_double(std::string_view s);
long long parse_int(std::string_view s);
unsigned long long parse_uint(std::string_view s);

}  // namespace brdfnqm
