#include "hit/train/dataset.hpp"

#include <algorithm>

#include "hit/error.hpp"

namespace hit::train {

std::vector<Image> Dataset::images() const {
  std::vector<Image> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.image);
  return out;
}

std::vector<int> Dataset::labels() const {
  std::vector<int> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.label);
  return out;
}

Dataset Dataset::head(std::size_t n) const {
  Dataset out = *this;
  if (n != 0 && n < out.samples.size()) out.samples.resize(n);
  return out;
}

std::string to_string(DataSource source) {
  return source == DataSource::kImageDir ? "image-dir" : "synthetic-quadrant";
}

DataSource parse_data_source(const std::string& text) {
  if (text == "synthetic-quadrant") return DataSource::kSyntheticQuadrant;
  if (text == "image-dir") return DataSource::kImageDir;
  throw ConfigError("unknown data source '" + text + "' (expected synthetic-quadrant or image-dir)");
}

Dataset load_image_dir(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root)) throw IoError(root.string() + ": not a directory");
  std::vector<fs::path> class_dirs;
  for (const auto& entry : fs::directory_iterator(root))
    if (entry.is_directory()) class_dirs.push_back(entry.path());
  std::sort(class_dirs.begin(), class_dirs.end());
  if (class_dirs.empty()) throw IoError(root.string() + ": no class directories");

  Dataset out;
  out.num_classes = static_cast<int>(class_dirs.size());
  for (std::size_t label = 0; label < class_dirs.size(); ++label) {
    out.class_names.push_back(class_dirs[label].filename().string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(class_dirs[label])) {
      const auto ext = entry.path().extension().string();
      if (entry.is_regular_file() && (ext == ".ppm" || ext == ".png")) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw IoError(class_dirs[label].string() + ": class has no .ppm or .png images");
    for (const auto& f : files) {
      Sample s;
      s.image = read_image(f);
      s.label = static_cast<int>(label);
      if (!out.samples.empty()) {
        const Image& first = out.samples.front().image;
        if (s.image.height != first.height || s.image.width != first.width)
          throw IoError(f.string() + ": size " + std::to_string(s.image.height) + "x" +
                        std::to_string(s.image.width) + " differs from " + std::to_string(first.height) + "x" +
                        std::to_string(first.width));
      }
      out.samples.push_back(std::move(s));
    }
  }
  return out;
}

namespace {

std::uint64_t test_seed(const DatasetSpec& spec) { return spec.seed * 2 + 1; }

void check_image_size(const Dataset& d, int image_size) {
  if (d.size() == 0) return;
  const Image& img = d.samples.front().image;
  if (img.height != image_size || img.width != image_size)
    throw ConfigError("images are " + std::to_string(img.height) + "x" + std::to_string(img.width) +
                      " but image_size is " + std::to_string(image_size));
}

}  // namespace

Split load_split(const DatasetSpec& spec, int image_size) {
  Split split;
  if (spec.source == DataSource::kSyntheticQuadrant) {
    // Distinct seeds keep the test images out of the training stream.
    split.train = synth_quadrant(spec.train_per_class, image_size, spec.seed * 2);
    split.test = synth_quadrant(spec.test_per_class, image_size, test_seed(spec));
    return split;
  }
  if (spec.train_dir.empty() || spec.test_dir.empty())
    throw ConfigError("image-dir data needs both train_dir and test_dir");
  split.train = load_image_dir(spec.train_dir);
  split.test = load_image_dir(spec.test_dir);
  if (split.train.class_names != split.test.class_names)
    throw ConfigError("train and test directories have different class folders");
  check_image_size(split.train, image_size);
  check_image_size(split.test, image_size);
  return split;
}

Dataset load_test_set(const DatasetSpec& spec, int image_size) {
  if (spec.source == DataSource::kSyntheticQuadrant) return synth_quadrant(spec.test_per_class, image_size, test_seed(spec));
  if (spec.test_dir.empty()) throw ConfigError("image-dir data needs test_dir");
  Dataset d = load_image_dir(spec.test_dir);
  check_image_size(d, image_size);
  return d;
}

Image hflip(const Image& image) {
  Image out(image.height, image.width);
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x)
      for (int c = 0; c < 3; ++c) out.at(y, x, c) = image.at(y, image.width - 1 - x, c);
  return out;
}

}  // namespace hit::train
