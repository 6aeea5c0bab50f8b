#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hit/attribution/localization.hpp"
#include "hit/io/image.hpp"

namespace hit::train {

using attribution::Region;

struct Sample {
  Image image;
  int label = 0;
  std::optional<Region> region;  // informative area, synthetic data only
};

struct Dataset {
  std::vector<Sample> samples;
  int num_classes = 0;
  std::vector<std::string> class_names;

  std::size_t size() const noexcept { return samples.size(); }
  std::vector<Image> images() const;
  std::vector<int> labels() const;
  /// First `n` samples (all when n is 0 or exceeds the size).
  Dataset head(std::size_t n) const;
};

enum class DataSource { kSyntheticQuadrant, kImageDir };
std::string to_string(DataSource source);
DataSource parse_data_source(const std::string& text);

struct DatasetSpec {
  DataSource source = DataSource::kSyntheticQuadrant;
  std::string train_dir;
  std::string test_dir;
  int train_per_class = 128;
  int test_per_class = 64;
  std::uint64_t seed = 1;

  bool operator==(const DatasetSpec&) const = default;
};

/// Four classes: a bright textured blob sits in one image quadrant over a
/// noise background; the label is the quadrant (0 top-left, 1 top-right,
/// 2 bottom-left, 3 bottom-right) and the region is that quadrant. Labels
/// cycle 0,1,2,3,... so every prefix of 4k samples is balanced.
Dataset synth_quadrant(int per_class, int image_size, std::uint64_t seed);

/// <root>/<class-name>/<file>.{ppm,png}; classes and files in byte order.
Dataset load_image_dir(const std::filesystem::path& root);

struct Split {
  Dataset train;
  Dataset test;
};
/// Builds train and test sets; synthetic splits use independent streams.
Split load_split(const DatasetSpec& spec, int image_size);
/// The test half of load_split() without building the training set.
Dataset load_test_set(const DatasetSpec& spec, int image_size);

Image hflip(const Image& image);

}  // namespace hit::train
