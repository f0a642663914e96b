#include "brdfnqm/table.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "brdfnqm/errors.hpp"

namespace brdfnqm {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find('\t', start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

void TextTable::set_meta(std::string key, std::string value) {
  for (auto& [k, v] : meta) {
    if (k == key) {
      v = std::move(value);
      return;
    }
  }
  meta.emplace_back(std::move(key), std::move(value));
}

const std::string& TextTable::meta_value(std::string_view key) const {
  for (const auto& [k, v] : meta) {
    if (k == key) return v;
  }
  throw FormatError("table '" + kind + "' has no metadata key '" + std::string(key) + "'");
}

bool TextTable::has_meta(std::string_view key) const {
  for (const auto& kv : meta) {
    if (kv.first == key) return true;
  }
  return false;
}

std::size_t TextTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  throw FormatError("table '" + kind + "' has no column '" + std::string(name) + "'");
}

bool TextTable::has_column(std::string_view name) const {
  for (const auto& c : columns) {
    if (c == name) return true;
  }
  return false;
}

std::string format_table(const TextTable& table) {
  std::ostringstream os;
  os << "# brdfnqm-" << table.kind << " v" << table.version << '\n';
  for (const auto& [k, v] : table.meta) os << "# " << k << ": " << v << '\n';
  for (std::size_t i = 0; i < table.columns.size(); ++i) os << (i ? "\t" : "") << table.columns[i];
  os << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "\t" : "") << row[i];
    os << '\n';
  }
  return os.str();
}

void write_table(const TextTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << format_table(table);
  if (!out) throw IoError("failed writing " + path.string());
}

TextTable read_table(const std::filesystem::path& path, std::string_view expected_kind) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  TextTable t;
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path.string() + ": empty file");
  const std::string prefix = "# brdfnqm-";
  const auto vpos = line.rfind(" v");
  if (line.rfind(prefix, 0) != 0 || vpos == std::string::npos || vpos < prefix.size()) {
    throw FormatError(path.string() + ": missing brdfnqm table header");
  }
  t.kind = line.substr(prefix.size(), vpos - prefix.size());
  t.version = static_cast<int>(parse_int(line.substr(vpos + 2)));
  if (t.kind != expected_kind) {
    throw FormatError(path.string() + ": expected a '" + std::string(expected_kind) + "' table, found '" + t.kind +
                      "'");
  }
  bool have_columns = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!have_columns && line.rfind("# ", 0) == 0) {
      const auto colon = line.find(": ", 2);
      if (colon == std::string::npos) throw FormatError(path.string() + ": malformed metadata line");
      t.meta.emplace_back(line.substr(2, colon - 2), line.substr(colon + 2));
      continue;
    }
    if (!have_columns) {
      t.columns = split_tabs(line);
      have_columns = true;
      continue;
    }
    if (line.empty()) continue;
    auto row = split_tabs(line);
    if (row.size() != t.columns.size()) {
      throw FormatError(path.string() + ": row has " + std::to_string(row.size()) + " fields, expected " +
                        std::to_string(t.columns.size()));
    }
    t.rows.push_back(std::move(row));
  }
  if (!have_columns) throw FormatError(path.string() + ": missing column header");
  return t;
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(std::string_view s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, v);
  if (res.ec != std::errc{} || res.ptr != end) throw FormatError("not a number: '" + std::string(s) + "'");
  return v;
}

long long parse_int(std::string_view s) {
  long long v = 0;
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, v);
  if (res.ec != std::errc{} || res.ptr != end) throw FormatError("not an integer: '" + std::string(s) + "'");
  return v;
}

unsigned long long parse_uint(std::string_view s) {
  unsigned long long v = 0;
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, v);
  if (res.ec != std::errc{} || res.ptr != end) {
    throw FormatError("not an unsigned integer: '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace brdfnqm
