#include "synthts/checkpoint.hpp"

#include <openssl/evp.h>

#include <memory>

#include "synthts/dataset_io.hpp"
#include "synthts/error.hpp"
#include "synthts/format.hpp"

namespace synthts::io {

namespace {

constexpr std::string_view kMagic = "synthts-checkpoint";

std::string body_of(const dae::DaeModel& m) {
  std::string b;
  b += "arch=" + m.arch.descriptor() + '\n';
  b += "seed=" + std::to_string(m.seed) + '\n';
  b += "epochs_trained=" + std::to_string(m.epochs_trained) + '\n';
  const auto& t = m.train_config;
  b += "train.epochs=" + std::to_string(t.epochs) + '\n';
  b += "train.lr=" + format_double(t.lr) + '\n';
  b += "train.batch_size=" + std::to_string(t.batch_size) + '\n';
  b += "train.sigma_scale=" + format_double(t.corruption.sigma_scale) + '\n';
  b += "train.corruption_seed=" + std::to_string(t.corruption.seed) + '\n';
  b += "train.seed=" + std::to_string(t.seed) + '\n';
  b += "train.holdout_fraction=" + format_double(t.holdout_fraction) + '\n';
  const auto params = m.parameters();
  const auto names = m.parameter_names();
  for (std::size_t i = 0; i < params.size(); ++i) {
    b += "param " + names[i] + ' ' + std::to_string(params[i].size()) + '\n';
    for (double v : params[i]) {
      b += format_double(v);
      b += '\n';
    }
  }
  return b;
}

std::string_view next_line(std::string_view text, std::size_t& pos) {
  if (pos >= text.size()) throw FormatError("checkpoint: unexpected end of file");
  const auto nl = text.find('\n', pos);
  if (nl == std::string_view::npos) throw FormatError("checkpoint: unexpected end of file");
  const auto line = text.substr(pos, nl - pos);
  pos = nl + 1;
  return line;
}

std::string value_of(std::string_view line, std::string_view key) {
  if (line.substr(0, key.size()) != key || line.size() <= key.size() || line[key.size()] != '=')
    throw FormatError("checkpoint: expected '" + std::string(key) + "=' but got '" + std::string(line) + "'");
  return std::string(line.substr(key.size() + 1));
}

std::uint64_t parse_u64(const std::string& s) {
  try {
    std::size_t used = 0;
    const auto v = std::stoull(s, &used);
    if (used != s.size()) throw FormatError("checkpoint: bad integer '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    throw FormatError("checkpoint: bad integer '" + s + "'");
  }
}

}  // namespace

std::string sha256_hex(std::string_view data) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1)
    throw Error("sha256 failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xF];
  }
  return out;
}

std::string serialize_checkpoint(const dae::DaeModel& model) {
  const std::string body = body_of(model);
  return std::string(kMagic) + "\nversion=" + std::to_string(kCheckpointVersion) +
         "\nsha256=" + sha256_hex(body) + '\n' + body;
}

dae::DaeModel parse_checkpoint(std::string_view text, const std::optional<dae::DaeArchitecture>& expected) {
  std::size_t pos = 0;
  if (next_line(text, pos) != kMagic) throw FormatError("checkpoint: not a synthts checkpoint");
  const std::string version = value_of(next_line(text, pos), "version");
  if (version != std::to_string(kCheckpointVersion))
    throw FormatError("checkpoint: unknown version " + version);
  const std::string digest = value_of(next_line(text, pos), "sha256");
  const std::string_view body = text.substr(pos);
  if (sha256_hex(body) != digest) throw FormatError("checkpoint: hash mismatch (file corrupted or truncated)");

  dae::DaeArchitecture arch = dae::DaeArchitecture::parse(value_of(next_line(text, pos), "arch"));
  if (expected && !(*expected == arch))
    throw ShapeError("checkpoint architecture '" + arch.descriptor() + "' does not match expected '" +
                     expected->descriptor() + "'");
  dae::DaeModel model = dae::build_model(arch, 0);
  model.seed = parse_u64(value_of(next_line(text, pos), "seed"));
  model.epochs_trained = parse_u64(value_of(next_line(text, pos), "epochs_trained"));
  auto& t = model.train_config;
  t.epochs = parse_u64(value_of(next_line(text, pos), "train.epochs"));
  t.lr = parse_double(value_of(next_line(text, pos), "train.lr"));
  t.batch_size = parse_u64(value_of(next_line(text, pos), "train.batch_size"));
  t.corruption.sigma_scale = parse_double(value_of(next_line(text, pos), "train.sigma_scale"));
  t.corruption.seed = parse_u64(value_of(next_line(text, pos), "train.corruption_seed"));
  t.seed = parse_u64(value_of(next_line(text, pos), "train.seed"));
  t.holdout_fraction = parse_double(value_of(next_line(text, pos), "train.holdout_fraction"));

  auto params = model.parameters();
  const auto names = model.parameter_names();
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto header = split(next_line(text, pos), ' ');
    if (header.size() != 3 || header[0] != "param")
      throw FormatError("checkpoint: expected parameter block for " + names[i]);
    if (header[1] != names[i])
      throw ShapeError("checkpoint: parameter block '" + std::string(header[1]) + "' where '" + names[i] +
                       "' was expected");
    const auto count = static_cast<std::size_t>(parse_int(header[2]));
    if (count != params[i].size())
      throw ShapeError("checkpoint: " + names[i] + " has " + std::to_string(count) + " values, architecture needs " +
                       std::to_string(params[i].size()));
    for (double& v : params[i]) v = parse_double(next_line(text, pos));
  }
  if (pos != text.size()) throw FormatError("checkpoint: trailing data after last parameter block");
  return model;
}

void save_checkpoint(const dae::DaeModel& model, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_checkpoint(model));
}

dae::DaeModel load_checkpoint(const std::filesystem::path& path,
                              const std::optional<dae::DaeArchitecture>& expected) {
  return parse_checkpoint(read_file(path), expected);
}

std::string checkpoint_hash(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  std::size_t pos = 0;
  next_line(text, pos);
  next_line(text, pos);
  return value_of(next_line(text, pos), "sha256");
}

}  // namespace synthts::io
