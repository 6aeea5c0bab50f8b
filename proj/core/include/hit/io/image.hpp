#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace hit {

/// RGB image, channel-interleaved (HWC), values nominally in [0, 1].
struct Image {
  int height = 0;
  int width = 0;
  std::vector<float> pixels;

  Image() = default;
  Image(int h, int w, float fill = 0.0f)
      : height(h), width(w), pixels(static_cast<std::size_t>(h) * static_cast<std::size_t>(w) * 3, fill) {}

  float& at(int y, int x, int c) { return pixels[index(y, x, c)]; }
  float at(int y, int x, int c) const { return pixels[index(y, x, c)]; }
  bool operator==(const Image&) const = default;

 private:
  std::size_t index(int y, int x, int c) const {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)) * 3 +
           static_cast<std::size_t>(c);
  }
};

/// Binary PPM (P6, maxval 255). Pixels are quantized to 8 bits on write.
Image read_ppm(const std::filesystem::path& path);
void write_ppm(const std::filesystem::path& path, const Image& image);
/// 8-bit PNG; gray and alpha channels are converted to RGB.
Image read_png(const std::filesystem::path& path);
/// Dispatches on extension (.ppm or .png).
Image read_image(const std::filesystem::path& path);

/// Binary PGM (P5, maxval 255), written atomically.
void write_pgm(const std::filesystem::path& path, int width, int height, const std::vector<std::uint8_t>& gray);

}  // namespace hit
