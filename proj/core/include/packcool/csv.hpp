#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace packcool {

/// Shortest exact decimal form of v ("%.17g", then trimmed to the fewest
/// significant digits that still round-trip). Locale-independent, '.' radix.
std::string format_double(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t cols() const { return header.size(); }
};

/// Writes one header line and numeric rows, comma-separated, LF-terminated.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

/// Parses a file written by write_csv. Throws std::runtime_error on missing
/// file, ragged rows, or unparseable cells.
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace packcool
