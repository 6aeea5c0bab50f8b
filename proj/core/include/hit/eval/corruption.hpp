#pragma once

#include <vector>

#include "hit/io/image.hpp"

namespace hit::eval {

enum class Corruption { kZero, kBlur };
std::string to_string(Corruption corruption);
Corruption parse_corruption(const std::string& text);

Image corrupt_zero(const Image& image);

/// Normalized 1-D Gaussian taps; `size` must be odd and `sigma` positive.
std::vector<double> gaussian_kernel(double sigma, int size);

/// Separable Gaussian blur with mirror padding that does not repeat the
/// edge pixel (d c b | a b c d | c b a).
Image corrupt_blur(const Image& image, double sigma = 5.0, int kernel = 11);

/// Fully corrupted counterpart of `image`.
Image corrupt(const Image& image, Corruption corruption, double sigma = 5.0, int kernel = 11);

}  // namespace hit::eval
