#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "hit/error.hpp"
#include "hit/train/dataset.hpp"

namespace hit::train {

namespace {

struct Blob {
  double cy, cx, radius, angle, frequency, phase;
  float tint[3];
};

// Striped disc with a one-pixel soft edge, blended over the background.
void paint(Image& img, const Blob& b) {
  const int y0 = std::max(0, static_cast<int>(b.cy - b.radius - 1));
  const int y1 = std::min(img.height, static_cast<int>(b.cy + b.radius + 2));
  const int x0 = std::max(0, static_cast<int>(b.cx - b.radius - 1));
  const int x1 = std::min(img.width, static_cast<int>(b.cx + b.radius + 2));
  const double ca = std::cos(b.angle), sa = std::sin(b.angle);
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) {
      const double dy = y + 0.5 - b.cy, dx = x + 0.5 - b.cx;
      const double alpha = std::clamp(b.radius - std::hypot(dy, dx) + 0.5, 0.0, 1.0);
      if (alpha <= 0.0) continue;
      const double stripe = 0.5 + 0.5 * std::sin(b.frequency * (dx * ca + dy * sa) + b.phase);
      const double level = 0.6 + 0.35 * stripe;
      for (int c = 0; c < 3; ++c) {
        float& px = img.at(y, x, c);
        px = static_cast<float>((1.0 - alpha) * px + alpha * level * b.tint[c]);
      }
    }
}

}  // namespace

Dataset synth_quadrant(int per_class, int image_size, std::uint64_t seed) {
  if (per_class < 0) throw ConfigError("per-class count must be non-negative");
  if (image_size < 16 || image_size % 2 != 0) throw ConfigError("synthetic images need an even size of at least 16");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double half = image_size / 2.0;
  const double min_r = image_size * 0.09, max_r = image_size * 0.16;

  Dataset out;
  out.num_classes = 4;
  out.class_names = {"top-left", "top-right", "bottom-left", "bottom-right"};
  const int total = per_class * 4;
  out.samples.reserve(static_cast<std::size_t>(total));
  for (int i = 0; i < total; ++i) {
    const int label = i % 4;
    Image img(image_size, image_size);
    for (auto& px : img.pixels) px = static_cast<float>(0.45 * u(rng));

    const int qy = label / 2, qx = label % 2;
    Blob b{};
    b.radius = min_r + (max_r - min_r) * u(rng);
    b.cy = qy * half + b.radius + (half - 2 * b.radius) * u(rng);
    b.cx = qx * half + b.radius + (half - 2 * b.radius) * u(rng);
    b.angle = std::numbers::pi * u(rng);
    b.frequency = 0.8 + 0.8 * u(rng);
    b.phase = 2 * std::numbers::pi * u(rng);
    for (float& t : b.tint) t = static_cast<float>(0.8 + 0.2 * u(rng));
    paint(img, b);

    Sample s;
    s.image = std::move(img);
    s.label = label;
    const int h = image_size / 2;
    s.region = Region{qy * h, qx * h, (qy + 1) * h, (qx + 1) * h};
    out.samples.push_back(std::move(s));
  }
  return out;
}

}  // namespace hit::train
