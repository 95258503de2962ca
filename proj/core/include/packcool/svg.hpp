#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace packcool {

struct SvgAxes {
  std::string title;
  std::string x_label;
  std::string y_label;
};

struct SvgSeries {
  std::string label;
  std::string color = "#2166ac";
  std::vector<double> x;
  std::vector<double> y;
  // Optional shaded band around the line; either both empty or both sized
  // like y.
  std::vector<double> band_low;
  std::vector<double> band_high;
};

/// Line chart with axes, ticks, optional shaded bands, and a legend when
/// more than one series is present. Output is deterministic byte-for-byte.
void write_line_svg(const std::filesystem::path& path, const std::vector<SvgSeries>& series,
                    const SvgAxes& axes);

/// Heatmap of a row-major matrix (rows[i][j]), one rectangle per cell, row 0
/// at the bottom. Colors follow a fixed blue-white-red ramp that is linear in
/// value between the matrix minimum and maximum; a constant matrix renders as
/// the midpoint color. A vertical color bar with min/max labels is included.
void write_heatmap_svg(const std::filesystem::path& path,
                       const std::vector<std::vector<double>>& rows, const SvgAxes& axes);

}  // namespace packcool
