#include "hsdm/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "hsdm/errors.hpp"

namespace hsdm::csv {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// Splits one logical record. `in` may be advanced over embedded newlines.
bool read_record(std::istream& in, std::vector<std::string>& fields) {
  fields.clear();
  std::string line;
  if (!std::getline(in, line)) return false;
  std::string field;
  bool quoted = false;
  bool was_quoted = false;
  std::size_t i = 0;
  while (true) {
    if (i == line.size()) {
      if (quoted) {
        std::string more;
        if (!std::getline(in, more)) break;
        field.push_back('\n');
        line = std::move(more);
        i = 0;
        continue;
      }
      break;
    }
    const char c = line[i++];
    if (quoted) {
      if (c == '"') {
        if (i < line.size() && line[i] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
      was_quoted = true;
    } else if (c == ',') {
      fields.push_back(was_quoted ? field : std::string(trim(field)));
      field.clear();
      was_quoted = false;
    } else {
      field.push_back(c);
    }
  }
  fields.push_back(was_quoted ? field : std::string(trim(field)));
  return true;
}

}  // namespace

std::optional<std::size_t> Table::find_column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  return std::nullopt;
}

std::size_t Table::column(std::string_view name) const {
  if (auto idx = find_column(name)) return *idx;
  throw MissingColumnError(fmt::format("{}: missing column '{}'", source.string(), name));
}

Table read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open {}", path.string()));
  Table table;
  table.source = path;
  if (!read_record(in, table.header)) {
    throw MissingColumnError(fmt::format("{}: empty file (no header row)", path.string()));
  }
  if (!table.header.empty() && table.header[0].starts_with("\xEF\xBB\xBF")) {
    table.header[0].erase(0, 3);
  }
  std::vector<std::string> fields;
  std::size_t line_no = 1;
  while (read_record(in, fields)) {
    ++line_no;
    if (fields.size() == 1 && fields[0].empty()) continue;
    if (fields.size() != table.header.size()) {
      throw InconsistentWidthError(fmt::format("{}:{}: {} fields, header has {}", path.string(), line_no,
                                               fields.size(), table.header.size()));
    }
    table.rows.push_back(fields);
  }
  return table;
}

double parse_double(std::string_view cell, const Table& table, std::size_t row, std::size_t col) {
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  if (!cell.empty() && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (cell.empty() || ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw NonNumericFeatureError(fmt::format("{}: row {} column '{}': '{}' is not a finite number",
                                             table.source.string(), row + 2, table.header[col], cell));
  }
  return value;
}

}  // namespace hsdm::csv
