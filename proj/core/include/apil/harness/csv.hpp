#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace apil::harness {

/// Header plus string cells. Fields never contain commas or quotes in the
/// files this project writes, so no quoting is supported.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index; throws std::runtime_error naming the missing column.
  std::size_t column(std::string_view name) const;
  bool has_column(std::string_view name) const noexcept;
};

CsvTable read_csv(const std::filesystem::path& path);
CsvTable parse_csv(std::string_view text);

/// Files matching a shell glob, sorted. An existing plain path matches itself.
std::vector<std::filesystem::path> expand_glob(const std::string& pattern);

double parse_real(const std::string& cell);

}  // namespace apil::harness
