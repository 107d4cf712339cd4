#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hsdm::csv {

/// Header plus string cells. Quoted fields ("a,b", "" escapes) are supported.
struct Table {
  std::filesystem::path source;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::optional<std::size_t> find_column(std::string_view name) const;
  /// Throws MissingColumnError naming the file.
  std::size_t column(std::string_view name) const;
};

/// Throws IoError when the file cannot be opened, InconsistentWidthError when
/// a row's width differs from the header.
Table read(const std::filesystem::path& path);

/// Throws NonNumericFeatureError with file/row/column context.
double parse_double(std::string_view cell, const Table& table, std::size_t row, std::size_t col);

}  // namespace hsdm::csv
