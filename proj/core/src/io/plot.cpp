#include "hit/io/plot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hit/error.hpp"
#include "hit/io/image.hpp"

namespace hit {

namespace {

constexpr float kPalette[][3] = {{0.85f, 0.10f, 0.10f}, {0.10f, 0.35f, 0.85f}, {0.10f, 0.60f, 0.20f},
                                 {0.90f, 0.55f, 0.05f}, {0.55f, 0.15f, 0.70f}, {0.20f, 0.20f, 0.20f}};

void dot(Image& img, int x, int y, const float* rgb) {
  for (int dy = -1; dy <= 1; ++dy)
    for (int dx = -1; dx <= 1; ++dx) {
      const int px = x + dx, py = y + dy;
      if (px < 0 || py < 0 || px >= img.width || py >= img.height) continue;
      for (int c = 0; c < 3; ++c) img.at(py, px, c) = rgb[c];
    }
}

}  // namespace

void write_line_plot(const std::filesystem::path& path, const std::vector<PlotSeries>& series, int width,
                     int height) {
  if (width < 64 || height < 64) throw RangeError("plot must be at least 64x64 pixels");
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size()) throw DimensionError("plot series '" + s.label + "' has mismatched x and y");
    for (double v : s.x) xmin = std::min(xmin, v), xmax = std::max(xmax, v);
    for (double v : s.y) ymin = std::min(ymin, v), ymax = std::max(ymax, v);
  }
  if (!std::isfinite(xmin)) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  if (xmax - xmin < 1e-12) xmax = xmin + 1;
  if (ymax - ymin < 1e-12) ymax = ymin + 1;

  Image img(height, width, 1.0f);
  const int left = 24, right = width - 12, top = 12, bottom = height - 24;
  const float axis[3] = {0.0f, 0.0f, 0.0f};
  for (int x = left; x <= right; ++x) {
    for (int c = 0; c < 3; ++c) img.at(bottom, x, c) = axis[c];
    for (int c = 0; c < 3; ++c) img.at(top, x, c) = 0.8f;
  }
  for (int y = top; y <= bottom; ++y) {
    for (int c = 0; c < 3; ++c) img.at(y, left, c) = axis[c];
    for (int c = 0; c < 3; ++c) img.at(y, right, c) = 0.8f;
  }
  auto to_px = [&](double x, double y) {
    return std::pair{left + static_cast<int>(std::lround((x - xmin) / (xmax - xmin) * (right - left))),
                     bottom - static_cast<int>(std::lround((y - ymin) / (ymax - ymin) * (bottom - top)))};
  };
  for (std::size_t s = 0; s < series.size(); ++s) {
    const float* rgb = kPalette[s % std::size(kPalette)];
    const auto& xs = series[s].x;
    const auto& ys = series[s].y;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
      auto [x0, y0] = to_px(xs[i], ys[i]);
      auto [x1, y1] = to_px(xs[i + 1], ys[i + 1]);
      const int steps = std::max({std::abs(x1 - x0), std::abs(y1 - y0), 1});
      for (int k = 0; k <= steps; ++k)
        dot(img, x0 + (x1 - x0) * k / steps, y0 + (y1 - y0) * k / steps, rgb);
    }
    if (xs.size() == 1) {
      auto [x0, y0] = to_px(xs[0], ys[0]);
      dot(img, x0, y0, rgb);
    }
  }
  write_ppm(path, img);
}

}  // namespace hit
