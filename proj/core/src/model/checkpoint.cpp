#include "hit/model/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <set>
#include <sstream>

#include "hit/error.hpp"
#include "hit/io/text_output.hpp"

namespace hit::model {

namespace {

constexpr char kMagic[] = "HITCKPT1";
constexpr std::size_t kMagicLen = 8;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

class Reader {
 public:
  Reader(const std::string& bytes, std::string source) : bytes_(bytes), source_(std::move(source)) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }

  std::string take(std::size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw IoError(source_ + ": checkpoint is truncated");
  }

  const std::string& bytes_;
  std::string source_;
  std::size_t pos_ = 0;
};

std::set<std::string> architecture_keys() {
  std::set<std::string> keys;
  for (const auto& [k, v] : config_entries(HitConfig{})) keys.insert(k);
  return keys;
}

}  // namespace

std::string Checkpoint::meta(const std::string& key, const std::string& fallback) const {
  for (const auto& [k, v] : metadata)
    if (k == key) return v;
  return fallback;
}

void save_checkpoint(const std::filesystem::path& path, const HitModel<float>& model,
                     const std::vector<std::pair<std::string, std::string>>& metadata) {
  std::string text;
  for (const auto& [k, v] : config_entries(model.config())) text += k + "=" + v + "\n";
  const auto arch = architecture_keys();
  for (const auto& [k, v] : metadata) {
    if (arch.count(k) != 0) throw ContractError("checkpoint metadata key '" + k + "' collides with the architecture");
    if (k.find('=') != std::string::npos || k.find('\n') != std::string::npos || v.find('\n') != std::string::npos)
      throw ContractError("checkpoint metadata '" + k + "' is not a single key=value line");
    text += k + "=" + v + "\n";
  }

  std::string out(kMagic, kMagicLen);
  put_u32(out, static_cast<std::uint32_t>(text.size()));
  out += text;
  const auto named = model.named_parameters();
  put_u32(out, static_cast<std::uint32_t>(named.size()));
  for (const auto& [name, t] : named) {
    put_u32(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    put_u32(out, static_cast<std::uint32_t>(t.rank()));
    for (auto dim : t.shape()) put_u32(out, static_cast<std::uint32_t>(dim));
    for (float v : t.data()) put_u32(out, std::bit_cast<std::uint32_t>(v));
  }
  write_binary_atomic(path, out);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  const std::string src = path.string();
  Reader r(bytes, src);
  if (r.take(kMagicLen) != std::string(kMagic, kMagicLen)) throw IoError(src + ": not a HiT checkpoint");

  Checkpoint ck;
  const auto arch = architecture_keys();
  std::istringstream lines(r.take(r.u32()));
  std::string line;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw IoError(src + ": malformed config line '" + line + "'");
    std::string key = line.substr(0, eq), value = line.substr(eq + 1);
    if (arch.count(key) != 0) {
      try {
        set_config_value(ck.config, key, value);
      } catch (const ConfigError& e) {
        throw IoError(src + ": " + e.what());
      }
    } else {
      ck.metadata.emplace_back(std::move(key), std::move(value));
    }
  }
  try {
    ck.config.validate();
  } catch (const ConfigError& e) {
    throw IoError(src + ": " + e.what());
  }

  ck.model = HitModel<float>(ck.config);
  const auto expected = ck.model.named_parameters();
  const std::uint32_t count = r.u32();
  if (count != expected.size())
    throw IoError(src + ": holds " + std::to_string(count) + " tensors, architecture needs " +
                  std::to_string(expected.size()));
  for (const auto& [name, target] : expected) {
    const std::string got = r.take(r.u32());
    if (got != name) throw IoError(src + ": expected tensor '" + name + "', found '" + got + "'");
    ad::Shape shape(r.u32());
    for (auto& dim : shape) dim = r.u32();
    if (shape != target.shape())
      throw IoError(src + ": tensor '" + name + "' has shape " + ad::shape_str(shape) + ", expected " +
                    ad::shape_str(target.shape()));
    Tensor<float> t = target;  // shares storage with the model
    for (float& v : t.data()) v = std::bit_cast<float>(r.u32());
  }
  if (!r.done()) throw IoError(src + ": trailing bytes after the last tensor");
  return ck;
}

}  // namespace hit::model
