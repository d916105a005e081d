#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace affect {

using CsvRow = std::vector<std::string>;

// Header plus rows. Fields containing a comma, quote or newline are
// quoted on output; quoted fields are accepted on input.
struct CsvTable {
  CsvRow header;
  std::vector<CsvRow> rows;

  // Column index by name; throws FormatError naming `origin` if absent.
  std::size_t column(std::string_view name, std::string_view origin = "csv") const;
};

CsvTable parse_csv(std::string_view text, std::string_view origin = "csv");
CsvTable read_csv(const std::filesystem::path& path);
std::string format_csv(const CsvTable& table);
void write_csv(const std::filesystem::path& path, const CsvTable& table);

// Fixed-point with `digits` decimals, the form used in every CSV and report
// so that output bytes do not depend on locale or stream state.
std::string format_fixed(double v, int digits = 6);

}  // namespace affect
