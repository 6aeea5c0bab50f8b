#pragma once

#include <optional>
#include <string>

namespace hit::cli {

/// Options shared by every subcommand; unset optionals keep config values.
struct Common {
  std::string config;
  std::string checkpoint;
  std::string data_dir;  // image-dir test set overriding the config
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> max_images;
  bool plot = false;
};

struct TrainArgs {
  Common common;
  std::optional<int> epochs;
};

struct ExplainArgs {
  Common common;
  std::string image;
  std::optional<int> index;  // test-set sample instead of --image
  std::optional<int> class_index;
  std::string method = "ledger";
  bool upscale = false;
};

struct FaithfulnessArgs {
  Common common;
  std::string method = "all";
  std::string mode = "both";
  std::string corruption = "both";
};

struct SanityArgs {
  Common common;
  std::string method = "ledger";
};

struct LayersArgs {
  Common common;
  std::string mode = "all";
};

// Each returns the process exit code; errors propagate as exceptions.
int run_train(const TrainArgs& args);
int run_eval(const Common& args);
int run_explain(const ExplainArgs& args);
int run_faithfulness(const FaithfulnessArgs& args);
int run_sanity(const SanityArgs& args);
int run_layers(const LayersArgs& args);

}  // namespace hit::cli
