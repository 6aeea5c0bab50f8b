#include "hit/eval/corruption.hpp"

#include <cmath>
#include <string>

#include "hit/error.hpp"

namespace hit::eval {

std::string to_string(Corruption corruption) { return corruption == Corruption::kBlur ? "blur" : "zero"; }

Corruption parse_corruption(const std::string& text) {
  if (text == "zero") return Corruption::kZero;
  if (text == "blur") return Corruption::kBlur;
  throw ConfigError("unknown corruption '" + text + "' (expected zero or blur)");
}

Image corrupt_zero(const Image& image) { return Image(image.height, image.width, 0.0f); }

std::vector<double> gaussian_kernel(double sigma, int size) {
  if (!(sigma > 0.0)) throw ConfigError("blur sigma must be positive");
  if (size < 1 || size % 2 == 0) throw ConfigError("blur kernel size must be a positive odd integer");
  const int r = size / 2;
  std::vector<double> k(static_cast<std::size_t>(size));
  double total = 0.0;
  for (int i = -r; i <= r; ++i) total += k[static_cast<std::size_t>(i + r)] = std::exp(-0.5 * i * i / (sigma * sigma));
  for (auto& v : k) v /= total;
  return k;
}

namespace {

int reflect(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

}  // namespace

Image corrupt_blur(const Image& image, double sigma, int kernel) {
  const auto k = gaussian_kernel(sigma, kernel);
  const int r = kernel / 2;
  const int h = image.height, w = image.width;
  std::vector<double> tmp(static_cast<std::size_t>(h) * static_cast<std::size_t>(w) * 3);
  auto idx = [w](int y, int x, int c) {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x)) * 3 +
           static_cast<std::size_t>(c);
  };
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (int t = -r; t <= r; ++t) acc += k[static_cast<std::size_t>(t + r)] * image.at(y, reflect(x + t, w), c);
        tmp[idx(y, x, c)] = acc;
      }
  Image out(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (int t = -r; t <= r; ++t) acc += k[static_cast<std::size_t>(t + r)] * tmp[idx(reflect(y + t, h), x, c)];
        out.at(y, x, c) = static_cast<float>(acc);
      }
  return out;
}

Image corrupt(const Image& image, Corruption corruption, double sigma, int kernel) {
  return corruption == Corruption::kBlur ? corrupt_blur(image, sigma, kernel) : corrupt_zero(image);
}

}  // namespace hit::eval
