#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace hit::model {

enum class FinalLnMode { kFold, kDisable };

std::string to_string(FinalLnMode mode);
FinalLnMode parse_final_ln_mode(const std::string& text);

/// Architecture of a Hindered Transformer. Defaults are the desk-scale
/// reference model (4 blocks of width 64 on 64x64 images, 8x8 patches,
/// one 2x2 pooling before block 2).
struct HitConfig {
  int depth = 4;
  int d_model = 64;
  int heads = 4;
  int mlp_ratio = 4;
  int image_size = 64;
  int patch_size = 8;
  std::vector<int> pool_layers{2};  // blocks preceded by a 2x2 average pool
  int num_classes = 4;
  double attn_dropout = 0.2;
  FinalLnMode final_ln_mode = FinalLnMode::kFold;
  bool last_mlp_removed = true;
  double ln_eps = 1e-6;

  int grid_side() const { return image_size / patch_size; }
  int head_dim() const { return d_model / heads; }
  int patch_dim() const { return 3 * patch_size * patch_size; }
  int mlp_hidden() const { return d_model * mlp_ratio; }
  /// Number of pooling stages applied before block `layer` runs.
  int pools_before(int layer) const;
  /// Token-grid side seen by block `layer`.
  int side_at(int layer) const;
  bool has_mlp(int layer) const { return !(last_mlp_removed && layer == depth - 1); }

  /// Throws ConfigError describing the first violated constraint.
  void validate() const;

  bool operator==(const HitConfig&) const = default;

  /// 12 blocks, width 768, 12 heads, pools before blocks 4 and 8, 224px input.
  static HitConfig base(int num_classes = 1000);
  /// 12 blocks, width 384, 6 heads, pools before blocks 4 and 8, 224px input.
  static HitConfig small(int num_classes = 1000);
};

/// Assigns one textual key; throws ConfigError on unknown keys or bad values.
void set_config_value(HitConfig& config, const std::string& key, const std::string& value);
/// Every key in canonical order with a value that parses back exactly.
std::vector<std::pair<std::string, std::string>> config_entries(const HitConfig& config);

/// Learnable scalars of a model built from `config`.
std::size_t count_parameters(const HitConfig& config);

}  // namespace hit::model
