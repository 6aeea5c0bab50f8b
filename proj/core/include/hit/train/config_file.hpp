#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "hit/model/config.hpp"
#include "hit/train/dataset.hpp"
#include "hit/train/trainer.hpp"

namespace hit::train {

/// Settings of the explanation and faithfulness commands.
struct EvalConfig {
  double blur_sigma = 5.0;
  int blur_kernel = 11;
  int gradcam_layer = -1;  // -1: the last block
  std::uint64_t seed = 0;  // random maps and randomization stages
  int max_images = 0;      // 0: the whole test set

  void validate() const;
  bool operator==(const EvalConfig&) const = default;
};

struct RunConfig {
  model::HitConfig model;
  TrainConfig train;
  DatasetSpec data;
  EvalConfig eval;

  bool operator==(const RunConfig&) const = default;
};

/// "key = value" lines grouped under [model], [train], [data] and [eval];
/// '#' starts a comment. Keys before any header are looked up in that
/// section order. Absent keys keep their defaults. Errors are ConfigError
/// messages of the form "<source>:<line>: ...".
RunConfig parse_config(const std::string& text, const std::string& source = "<config>");
RunConfig load_config(const std::filesystem::path& path);

/// Every setting as "section.key" = value, in dump order.
std::vector<std::pair<std::string, std::string>> config_echo(const RunConfig& config);
/// Complete config file text that parses back to `config`.
std::string dump_config(const RunConfig& config);

}  // namespace hit::train
