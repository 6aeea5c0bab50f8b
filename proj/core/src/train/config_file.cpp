#include "hit/train/config_file.hpp"

#include <array>
#include <sstream>

#include "hit/error.hpp"
#include "hit/io/text_output.hpp"
#include "hit/parse.hpp"

namespace hit::train {

void EvalConfig::validate() const {
  if (!(blur_sigma > 0.0)) throw ConfigError("blur_sigma must be positive");
  if (blur_kernel < 1 || blur_kernel % 2 == 0) throw ConfigError("blur_kernel must be a positive odd integer");
  if (max_images < 0) throw ConfigError("max_images must be non-negative");
}

namespace {

using Entries = std::vector<std::pair<std::string, std::string>>;

std::uint64_t parse_seed(const std::string& text, const std::string& what) {
  const long long v = parse_int64(text, what);
  if (v < 0) throw ConfigError(what + " must be non-negative");
  return static_cast<std::uint64_t>(v);
}

bool set_train(TrainConfig& c, const std::string& k, const std::string& v) {
  if (k == "lr") c.lr = parse_double(v, k);
  else if (k == "weight_decay") c.weight_decay = parse_double(v, k);
  else if (k == "batch_size") c.batch_size = parse_int(v, k);
  else if (k == "epochs") c.epochs = parse_int(v, k);
  else if (k == "warmup_epochs") c.warmup_epochs = parse_int(v, k);
  else if (k == "schedule") c.schedule = trim(v);
  else if (k == "label_smoothing") c.label_smoothing = parse_double(v, k);
  else if (k == "seed") c.seed = parse_seed(v, k);
  else if (k == "hflip") c.hflip = parse_bool(v, k);
  else if (k == "eval_every") c.eval_every = parse_int(v, k);
  else return false;
  return true;
}

Entries train_entries(const TrainConfig& c) {
  return {{"lr", format_double(c.lr)},
          {"weight_decay", format_double(c.weight_decay)},
          {"batch_size", std::to_string(c.batch_size)},
          {"epochs", std::to_string(c.epochs)},
          {"warmup_epochs", std::to_string(c.warmup_epochs)},
          {"schedule", c.schedule},
          {"label_smoothing", format_double(c.label_smoothing)},
          {"seed", std::to_string(c.seed)},
          {"hflip", c.hflip ? "true" : "false"},
          {"eval_every", std::to_string(c.eval_every)}};
}

bool set_data(DatasetSpec& c, const std::string& k, const std::string& v) {
  if (k == "source") c.source = parse_data_source(trim(v));
  else if (k == "train_dir") c.train_dir = trim(v);
  else if (k == "test_dir") c.test_dir = trim(v);
  else if (k == "train_per_class") c.train_per_class = parse_int(v, k);
  else if (k == "test_per_class") c.test_per_class = parse_int(v, k);
  else if (k == "seed") c.seed = parse_seed(v, k);
  else return false;
  return true;
}

Entries data_entries(const DatasetSpec& c) {
  return {{"source", to_string(c.source)},
          {"train_dir", c.train_dir},
          {"test_dir", c.test_dir},
          {"train_per_class", std::to_string(c.train_per_class)},
          {"test_per_class", std::to_string(c.test_per_class)},
          {"seed", std::to_string(c.seed)}};
}

bool set_eval(EvalConfig& c, const std::string& k, const std::string& v) {
  if (k == "blur_sigma") c.blur_sigma = parse_double(v, k);
  else if (k == "blur_kernel") c.blur_kernel = parse_int(v, k);
  else if (k == "gradcam_layer") c.gradcam_layer = parse_int(v, k);
  else if (k == "seed") c.seed = parse_seed(v, k);
  else if (k == "max_images") c.max_images = parse_int(v, k);
  else return false;
  return true;
}

Entries eval_entries(const EvalConfig& c) {
  return {{"blur_sigma", format_double(c.blur_sigma)},
          {"blur_kernel", std::to_string(c.blur_kernel)},
          {"gradcam_layer", std::to_string(c.gradcam_layer)},
          {"seed", std::to_string(c.seed)},
          {"max_images", std::to_string(c.max_images)}};
}

bool set_model(model::HitConfig& c, const std::string& k, const std::string& v) {
  for (const auto& [key, unused] : model::config_entries(c))
    if (key == k) {
      model::set_config_value(c, k, v);
      return true;
    }
  return false;
}

const std::array<std::string, 4> kSections{"model", "train", "data", "eval"};

bool assign(RunConfig& c, const std::string& section, const std::string& k, const std::string& v) {
  if (section == "model") return set_model(c.model, k, v);
  if (section == "train") return set_train(c.train, k, v);
  if (section == "data") return set_data(c.data, k, v);
  return set_eval(c.eval, k, v);
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& source) {
  RunConfig c;
  std::istringstream in(text);
  std::string raw, section;
  int line_no = 0;
  auto fail = [&](const std::string& msg) { throw ConfigError(source + ":" + std::to_string(line_no) + ": " + msg); };
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("malformed section header '" + line + "'");
      section = trim(line.substr(1, line.size() - 2));
      bool known = false;
      for (const auto& s : kSections) known = known || s == section;
      if (!known) fail("unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected 'key = value', got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail("missing key before '='");
    try {
      bool found = false;
      if (section.empty()) {
        for (const auto& s : kSections)
          if ((found = assign(c, s, key, value))) break;
      } else {
        found = assign(c, section, key, value);
      }
      if (!found) fail("unknown key '" + key + "'" + (section.empty() ? "" : " in [" + section + "]"));
    } catch (const ConfigError& e) {
      const std::string msg = e.what();
      if (msg.rfind(source + ":", 0) == 0) throw;
      fail(msg);
    }
  }
  try {
    c.model.validate();
    c.train.validate();
    c.eval.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) { return parse_config(read_file(path), path.string()); }

std::vector<std::pair<std::string, std::string>> config_echo(const RunConfig& c) {
  Entries out;
  auto add = [&](const std::string& section, const Entries& entries) {
    for (const auto& [k, v] : entries) out.emplace_back(section + "." + k, v);
  };
  add("model", model::config_entries(c.model));
  add("train", train_entries(c.train));
  add("data", data_entries(c.data));
  add("eval", eval_entries(c.eval));
  return out;
}

std::string dump_config(const RunConfig& c) {
  std::ostringstream os;
  auto section = [&](const std::string& name, const Entries& entries) {
    os << '[' << name << "]\n";
    for (const auto& [k, v] : entries) os << k << " = " << v << '\n';
  };
  section("model", model::config_entries(c.model));
  os << '\n';
  section("train", train_entries(c.train));
  os << '\n';
  section("data", data_entries(c.data));
  os << '\n';
  section("eval", eval_entries(c.eval));
  return os.str();
}

}  // namespace hit::train
