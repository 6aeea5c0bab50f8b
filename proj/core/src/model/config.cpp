#include "hit/model/config.hpp"

#include <algorithm>

#include "hit/error.hpp"
#include "hit/parse.hpp"

namespace hit::model {

std::string to_string(FinalLnMode mode) {
  return mode == FinalLnMode::kFold ? "fold" : "disable";
}

FinalLnMode parse_final_ln_mode(const std::string& text) {
  const std::string t = trim(text);
  if (t == "fold") return FinalLnMode::kFold;
  if (t == "disable") return FinalLnMode::kDisable;
  throw ConfigError("final_ln_mode: expected 'fold' or 'disable', got '" + t + "'");
}

int HitConfig::pools_before(int layer) const {
  return static_cast<int>(std::count_if(pool_layers.begin(), pool_layers.end(), [&](int p) { return p <= layer; }));
}

int HitConfig::side_at(int layer) const {
  return grid_side() >> pools_before(layer);
}

void HitConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError("invalid model config: " + msg); };
  if (depth < 1) fail("depth must be >= 1");
  if (d_model < 1) fail("d_model must be >= 1");
  if (heads < 1) fail("heads must be >= 1");
  if (d_model % heads != 0) fail("d_model " + std::to_string(d_model) + " not divisible by heads " + std::to_string(heads));
  if (mlp_ratio < 1) fail("mlp_ratio must be >= 1");
  if (patch_size < 1 || image_size < 1) fail("image_size and patch_size must be positive");
  if (image_size % patch_size != 0)
    fail("image_size " + std::to_string(image_size) + " not divisible by patch_size " + std::to_string(patch_size));
  if (num_classes < 1) fail("num_classes must be >= 1");
  if (!(attn_dropout >= 0.0 && attn_dropout < 1.0)) fail("attn_dropout must lie in [0, 1)");
  if (!(ln_eps > 0.0)) fail("ln_eps must be positive");
  int side = grid_side();
  int prev = -1;
  for (int p : pool_layers) {
    if (p <= prev) fail("pool_layers must be strictly increasing");
    if (p < 0 || p >= depth) fail("pool layer " + std::to_string(p) + " outside [0, depth)");
    if (side % 2 != 0) fail("grid side " + std::to_string(side) + " is odd at pool layer " + std::to_string(p));
    side /= 2;
    prev = p;
  }
}

HitConfig HitConfig::base(int num_classes) {
  HitConfig c;
  c.depth = 12;
  c.d_model = 768;
  c.heads = 12;
  c.image_size = 224;
  c.patch_size = 8;
  c.pool_layers = {4, 8};
  c.num_classes = num_classes;
  return c;
}

HitConfig HitConfig::small(int num_classes) {
  HitConfig c = base(num_classes);
  c.d_model = 384;
  c.heads = 6;
  return c;
}

void set_config_value(HitConfig& c, const std::string& key, const std::string& value) {
  const std::string k = trim(key);
  if (k == "depth") c.depth = parse_int(value, k);
  else if (k == "d_model") c.d_model = parse_int(value, k);
  else if (k == "heads") c.heads = parse_int(value, k);
  else if (k == "mlp_ratio") c.mlp_ratio = parse_int(value, k);
  else if (k == "image_size") c.image_size = parse_int(value, k);
  else if (k == "patch_size") c.patch_size = parse_int(value, k);
  else if (k == "pool_layers") c.pool_layers = parse_int_list(value, k);
  else if (k == "num_classes") c.num_classes = parse_int(value, k);
  else if (k == "attn_dropout") c.attn_dropout = parse_double(value, k);
  else if (k == "final_ln_mode") c.final_ln_mode = parse_final_ln_mode(value);
  else if (k == "last_mlp_removed") c.last_mlp_removed = parse_bool(value, k);
  else if (k == "ln_eps") c.ln_eps = parse_double(value, k);
  else throw ConfigError("unknown model key '" + k + "'");
}

std::vector<std::pair<std::string, std::string>> config_entries(const HitConfig& c) {
  return {
      {"depth", std::to_string(c.depth)},
      {"d_model", std::to_string(c.d_model)},
      {"heads", std::to_string(c.heads)},
      {"mlp_ratio", std::to_string(c.mlp_ratio)},
      {"image_size", std::to_string(c.image_size)},
      {"patch_size", std::to_string(c.patch_size)},
      {"pool_layers", format_int_list(c.pool_layers)},
      {"num_classes", std::to_string(c.num_classes)},
      {"attn_dropout", format_double(c.attn_dropout)},
      {"final_ln_mode", to_string(c.final_ln_mode)},
      {"last_mlp_removed", c.last_mlp_removed ? "true" : "false"},
      {"ln_eps", format_double(c.ln_eps)},
  };
}

std::size_t count_parameters(const HitConfig& c) {
  c.validate();
  const std::size_t d = static_cast<std::size_t>(c.d_model);
  const std::size_t hidden = static_cast<std::size_t>(c.mlp_hidden());
  const std::size_t n = static_cast<std::size_t>(c.grid_side());
  const std::size_t classes = static_cast<std::size_t>(c.num_classes);

  std::size_t total = 0;
  total += static_cast<std::size_t>(c.patch_dim()) * d + d;  // patch projection
  total += n * n * d;                                         // positional embedding
  total += d;                                                 // initial CLS
  for (int l = 0; l < c.depth; ++l) {
    total += 2 * d;                // norm1
    total += 4 * (d * d + d);      // q, k, v, output projection
    if (c.has_mlp(l)) {
      total += 2 * d;              // norm2
      total += d * hidden + hidden;
      total += hidden * d + d;
    }
  }
  if (c.final_ln_mode == FinalLnMode::kFold) total += 2 * d;
  total += d * classes + classes;
  return total;
}

}  // namespace hit::model
