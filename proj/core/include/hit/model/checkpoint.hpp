#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "hit/model/hit_model.hpp"

namespace hit::model {

/// File layout (all integers little-endian u32):
///   "HITCKPT1"
///   byte count, then UTF-8 "key=value\n" lines (architecture and metadata)
///   tensor count, then per tensor: name length, name, rank, dims, float32 values
struct Checkpoint {
  HitConfig config;
  std::vector<std::pair<std::string, std::string>> metadata;  // seed, epoch, training settings
  HitModel<float> model{HitConfig{}};

  /// Metadata value or `fallback` when absent.
  std::string meta(const std::string& key, const std::string& fallback = "") const;
};

void save_checkpoint(const std::filesystem::path& path, const HitModel<float>& model,
                     const std::vector<std::pair<std::string, std::string>>& metadata = {});
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace hit::model
