#include "hit/io/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <string>

#include "hit/error.hpp"
#include "hit/io/text_output.hpp"

namespace hit {

namespace {

// Reads the next whitespace-delimited header token, skipping '#' comments.
std::string next_token(const std::string& buf, std::size_t& pos) {
  for (;;) {
    while (pos < buf.size() && std::isspace(static_cast<unsigned char>(buf[pos]))) ++pos;
    if (pos < buf.size() && buf[pos] == '#') {
      while (pos < buf.size() && buf[pos] != '\n') ++pos;
      continue;
    }
    break;
  }
  const std::size_t start = pos;
  while (pos < buf.size() && !std::isspace(static_cast<unsigned char>(buf[pos]))) ++pos;
  return buf.substr(start, pos - start);
}

int header_int(const std::string& buf, std::size_t& pos, const std::filesystem::path& path) {
  const std::string tok = next_token(buf, pos);
  try {
    return std::stoi(tok);
  } catch (const std::exception&) {
    throw IoError(path.string() + ": malformed PPM header");
  }
}

std::uint8_t quantize(float v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
}

}  // namespace

Image read_ppm(const std::filesystem::path& path) {
  const std::string buf = read_file(path);
  std::size_t pos = 0;
  if (next_token(buf, pos) != "P6") throw IoError(path.string() + ": not a binary PPM (P6)");
  const int w = header_int(buf, pos, path);
  const int h = header_int(buf, pos, path);
  const int maxval = header_int(buf, pos, path);
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 255) throw IoError(path.string() + ": unsupported PPM header");
  ++pos;  // single whitespace byte before raster
  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3;
  if (buf.size() < pos + n) throw IoError(path.string() + ": truncated PPM raster");
  Image img(h, w);
  for (std::size_t i = 0; i < n; ++i)
    img.pixels[i] = static_cast<float>(static_cast<unsigned char>(buf[pos + i])) / static_cast<float>(maxval);
  return img;
}

void write_ppm(const std::filesystem::path& path, const Image& image) {
  std::string out = "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  out.reserve(out.size() + image.pixels.size());
  for (float v : image.pixels) out.push_back(static_cast<char>(quantize(v)));
  write_binary_atomic(path, out);
}

Image read_png(const std::filesystem::path& path) {
  std::unique_ptr<std::FILE, int (*)(std::FILE*)> fp(std::fopen(path.string().c_str(), "rb"), &std::fclose);
  if (!fp) throw IoError("cannot open " + path.string());
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("libpng initialisation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError(path.string() + ": unreadable PNG");
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);
  png_set_strip_16(png);
  png_set_palette_to_rgb(png);
  png_set_expand_gray_1_2_4_to_8(png);
  png_set_gray_to_rgb(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);
  const int w = static_cast<int>(png_get_image_width(png, info));
  const int h = static_cast<int>(png_get_image_height(png, info));
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  std::vector<png_byte> raster(rowbytes * static_cast<std::size_t>(h));
  std::vector<png_bytep> rows(static_cast<std::size_t>(h));
  for (int y = 0; y < h; ++y) rows[static_cast<std::size_t>(y)] = raster.data() + rowbytes * static_cast<std::size_t>(y);
  png_read_image(png, rows.data());
  png_destroy_read_struct(&png, &info, nullptr);
  Image img(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c)
        img.at(y, x, c) = static_cast<float>(rows[static_cast<std::size_t>(y)][x * 3 + c]) / 255.0f;
  return img;
}

Image read_image(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
  if (ext == ".ppm") return read_ppm(path);
  if (ext == ".png") return read_png(path);
  throw IoError(path.string() + ": unsupported image extension '" + ext + "'");
}

void write_pgm(const std::filesystem::path& path, int width, int height, const std::vector<std::uint8_t>& gray) {
  if (gray.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
    throw DimensionError("write_pgm: pixel count does not match " + std::to_string(width) + "x" + std::to_string(height));
  std::string out = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(gray.data()), gray.size());
  write_binary_atomic(path, out);
}

}  // namespace hit
