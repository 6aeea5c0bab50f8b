#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace hit {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Renders line series on shared axes into a PPM image (white background,
/// axis frame, one colour per series). Labels are not drawn; the caller
/// keeps them in the companion CSV.
void write_line_plot(const std::filesystem::path& path, const std::vector<PlotSeries>& series, int width = 480,
                     int height = 320);

}  // namespace hit
