#include "synthts/dae.hpp"

#include <cmath>
#include <numeric>

#include "synthts/descriptive.hpp"
#include "synthts/error.hpp"
#include "synthts/format.hpp"
#include "synthts/parallel.hpp"
#include "synthts/rng.hpp"

namespace synthts::dae {

DaeArchitecture DaeArchitecture::default_for(std::size_t n) { return make(n, {1, 8, 16, 32}); }

DaeArchitecture DaeArchitecture::make(std::size_t n, std::vector<std::size_t> channels,
                                      std::size_t kernel, std::size_t stride) {
  DaeArchitecture a;
  a.input_length = n;
  for (std::size_t l = 0; l + 1 < channels.size(); ++l)
    a.encoder.push_back({channels[l], channels[l + 1], kernel, stride});
  return a;
}

std::vector<std::size_t> DaeArchitecture::encoder_lengths() const {
  std::vector<std::size_t> out;
  std::size_t n = input_length;
  for (std::size_t l = 0; l < encoder.size(); ++l) {
    const auto& s = encoder[l];
    if (s.kernel < 1 || s.stride < 1) throw ShapeError("layer " + std::to_string(l) + ": K and S must be >= 1");
    if (n < s.kernel || (n - s.kernel) % s.stride != 0)
      throw ShapeError("encoder layer " + std::to_string(l) + ": input length " + std::to_string(n) +
                       " is not compatible with K=" + std::to_string(s.kernel) +
                       ", S=" + std::to_string(s.stride) + " ((n-K)/S must be integral)");
    n = (n - s.kernel) / s.stride + 1;
    out.push_back(n);
  }
  return out;
}

void DaeArchitecture::validate() const {
  if (encoder.size() < 3) throw ShapeError("architecture needs at least 3 encoder layers");
  if (encoder.front().in_channels != 1) throw ShapeError("first encoder layer must take 1 channel");
  for (std::size_t l = 1; l < encoder.size(); ++l)
    if (encoder[l].in_channels != encoder[l - 1].out_channels)
      throw ShapeError("encoder layer " + std::to_string(l) + ": channel count does not chain");
  encoder_lengths();
}

std::vector<LayerSpec> DaeArchitecture::decoder() const {
  std::vector<LayerSpec> out;
  for (auto it = encoder.rbegin(); it != encoder.rend(); ++it)
    out.push_back({it->out_channels, it->in_channels, it->kernel, it->stride});
  return out;
}

std::string DaeArchitecture::descriptor() const {
  std::string s = "n=" + std::to_string(input_length) + ";enc=";
  for (std::size_t l = 0; l < encoder.size(); ++l) {
    const auto& e = encoder[l];
    if (l) s += ',';
    s += std::to_string(e.in_channels) + ':' + std::to_string(e.out_channels) + ':' +
         std::to_string(e.kernel) + ':' + std::to_string(e.stride);
  }
  return s;
}

DaeArchitecture DaeArchitecture::parse(std::string_view text) {
  DaeArchitecture a;
  a.encoder.clear();
  const auto parts = split(text, ';');
  if (parts.size() != 2 || parts[0].substr(0, 2) != "n=" || parts[1].substr(0, 4) != "enc=")
    throw FormatError("bad architecture descriptor '" + std::string(text) + "'");
  a.input_length = static_cast<std::size_t>(parse_int(parts[0].substr(2)));
  for (auto layer : split(parts[1].substr(4), ',')) {
    const auto f = split(layer, ':');
    if (f.size() != 4) throw FormatError("bad layer descriptor '" + std::string(layer) + "'");
    a.encoder.push_back({static_cast<std::size_t>(parse_int(f[0])), static_cast<std::size_t>(parse_int(f[1])),
                         static_cast<std::size_t>(parse_int(f[2])), static_cast<std::size_t>(parse_int(f[3]))});
  }
  return a;
}

void TrainConfig::validate() const {
  if (epochs < 1) throw InvalidArgument("train: epochs must be >= 1");
  if (!(lr >= 0.0)) throw InvalidArgument("train: learning rate must be >= 0");
  if (!(corruption.sigma_scale >= 0.0)) throw InvalidArgument("train: sigma_scale must be >= 0");
  if (!(holdout_fraction >= 0.0 && holdout_fraction < 1.0))
    throw InvalidArgument("train: holdout fraction must be in [0, 1)");
}

std::vector<std::span<double>> DaeModel::parameters() {
  std::vector<std::span<double>> out;
  for (auto& l : encoder) {
    out.emplace_back(l.weight);
    out.emplace_back(l.bias);
  }
  for (auto& l : decoder) {
    out.emplace_back(l.weight);
    out.emplace_back(l.bias);
  }
  return out;
}

std::vector<std::span<const double>> DaeModel::parameters() const {
  std::vector<std::span<const double>> out;
  for (const auto& l : encoder) {
    out.emplace_back(l.weight);
    out.emplace_back(l.bias);
  }
  for (const auto& l : decoder) {
    out.emplace_back(l.weight);
    out.emplace_back(l.bias);
  }
  return out;
}

std::vector<std::string> DaeModel::parameter_names() const {
  std::vector<std::string> out;
  for (std::size_t l = 0; l < encoder.size(); ++l) {
    out.push_back("enc" + std::to_string(l) + ".weight");
    out.push_back("enc" + std::to_string(l) + ".bias");
  }
  for (std::size_t l = 0; l < decoder.size(); ++l) {
    out.push_back("dec" + std::to_string(l) + ".weight");
    out.push_back("dec" + std::to_string(l) + ".bias");
  }
  return out;
}

std::size_t DaeModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : encoder) n += l.weight.size() + l.bias.size();
  for (const auto& l : decoder) n += l.weight.size() + l.bias.size();
  return n;
}

namespace {

void init_uniform(std::span<double> w, std::size_t fan_in, std::size_t fan_out, std::uint64_t seed) {
  const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Rng rng(seed);
  for (double& v : w) v = (2.0 * rng.uniform() - 1.0) * a;
}

}  // namespace

DaeModel build_model(const DaeArchitecture& arch, std::uint64_t seed) {
  arch.validate();
  DaeModel m;
  m.arch = arch;
  m.seed = seed;
  std::size_t layer_index = 0;
  for (const auto& s : arch.encoder) {
    nn::Conv1dLayer l(s.in_channels, s.out_channels, s.kernel, s.stride);
    init_uniform(l.weight, s.in_channels * s.kernel, s.out_channels * s.kernel,
                 derive_seed(seed, layer_index++));
    m.encoder.push_back(std::move(l));
  }
  for (const auto& s : arch.decoder()) {
    nn::ConvTranspose1dLayer l(s.in_channels, s.out_channels, s.kernel, s.stride);
    init_uniform(l.weight, s.in_channels * s.kernel, s.out_channels * s.kernel,
                 derive_seed(seed, layer_index++));
    m.decoder.push_back(std::move(l));
  }
  return m;
}

nn::Tensor to_tensor(const ReturnMatrix& m) {
  const auto d = m.data();
  return nn::Tensor(m.rows(), 1, m.cols(), std::vector<double>(d.begin(), d.end()));
}

ReturnMatrix from_tensor(const nn::Tensor& t) {
  if (t.channels() != 1) throw ShapeError("from_tensor: expected a single channel");
  const auto d = t.data();
  return ReturnMatrix(t.batch(), t.length(), std::vector<double>(d.begin(), d.end()));
}

EncoderTrace encode(const DaeModel& model, const nn::Tensor& x) {
  if (x.channels() != 1 || x.length() != model.arch.input_length)
    throw ShapeError("encode: input " + x.shape_string() + " but model expects length " +
                     std::to_string(model.arch.input_length));
  EncoderTrace tr;
  tr.input = x;
  const nn::Tensor* cur = &tr.input;
  for (const auto& layer : model.encoder) {
    tr.pre.push_back(nn::conv1d_forward(*cur, layer));
    tr.features.push_back(nn::activation_forward(tr.pre.back()));
    cur = &tr.features.back();
  }
  return tr;
}

DecoderTrace decode(const DaeModel& model, const nn::Tensor& z) {
  const auto lengths = model.arch.encoder_lengths();
  if (z.channels() != model.arch.encoder.back().out_channels || z.length() != lengths.back())
    throw ShapeError("decode: latent " + z.shape_string() + " does not match encoder output (" +
                     std::to_string(model.arch.encoder.back().out_channels) + ", " +
                     std::to_string(lengths.back()) + ")");
  DecoderTrace tr;
  tr.input = z;
  const nn::Tensor* cur = &tr.input;
  for (std::size_t l = 0; l < model.decoder.size(); ++l) {
    tr.pre.push_back(nn::conv1d_transpose_forward(*cur, model.decoder[l]));
    if (l + 1 < model.decoder.size())
      tr.outputs.push_back(nn::activation_forward(tr.pre.back()));
    else
      tr.outputs.push_back(tr.pre.back());
    cur = &tr.outputs.back();
  }
  return tr;
}

nn::Tensor reconstruct(const DaeModel& model, const nn::Tensor& x) {
  return decode(model, encode(model, x).latent()).reconstruction();
}

std::vector<std::span<const double>> ParamGrads::views() const {
  return {groups.begin(), groups.end()};
}

nn::Tensor encoder_backward(const DaeModel& model, const EncoderTrace& trace,
                            const std::vector<nn::Tensor>& feature_grads,
                            std::vector<std::vector<double>>* param_grads) {
  const std::size_t L = model.encoder.size();
  if (feature_grads.size() != L) throw ShapeError("encoder_backward: need one gradient slot per layer");
  if (param_grads) param_grads->assign(2 * L, {});
  nn::Tensor g;
  bool have = false;
  for (std::size_t l = L; l-- > 0;) {
    if (!feature_grads[l].data().empty()) {
      if (!feature_grads[l].same_shape(trace.features[l]))
        throw ShapeError("encoder_backward: gradient shape mismatch at layer " + std::to_string(l));
      if (have) {
        auto gd = g.data();
        const auto add = feature_grads[l].data();
        for (std::size_t i = 0; i < gd.size(); ++i) gd[i] += add[i];
      } else {
        g = feature_grads[l];
        have = true;
      }
    }
    if (!have) {
      if (param_grads) {
        (*param_grads)[2 * l].assign(model.encoder[l].weight.size(), 0.0);
        (*param_grads)[2 * l + 1].assign(model.encoder[l].bias.size(), 0.0);
      }
      continue;
    }
    const nn::Tensor g_pre = nn::activation_backward(trace.pre[l], g);
    const nn::Tensor& input = l == 0 ? trace.input : trace.features[l - 1];
    auto lg = nn::conv1d_backward(g_pre, input, model.encoder[l], param_grads != nullptr);
    if (param_grads) {
      (*param_grads)[2 * l] = std::move(lg.grad_weight);
      (*param_grads)[2 * l + 1] = std::move(lg.grad_bias);
    }
    g = std::move(lg.grad_input);
  }
  if (!have) return nn::Tensor(trace.input.batch(), trace.input.channels(), trace.input.length());
  return g;
}

DaeLoss dae_loss(const DaeModel& model, const nn::Tensor& corrupted, const nn::Tensor& clean) {
  if (!corrupted.same_shape(clean)) throw ShapeError("dae_loss: corrupted/clean shape mismatch");
  const EncoderTrace enc = encode(model, corrupted);
  const DecoderTrace dec = decode(model, enc.latent());
  nn::LossGrad lg = nn::mse_loss(dec.reconstruction(), clean);

  DaeLoss out;
  out.loss = lg.loss;
  const std::size_t Le = model.encoder.size();
  const std::size_t Ld = model.decoder.size();
  std::vector<std::vector<double>> dec_grads(2 * Ld);
  nn::Tensor g = std::move(lg.grad);
  for (std::size_t l = Ld; l-- > 0;) {
    if (l + 1 < Ld) g = nn::activation_backward(dec.pre[l], g);
    const nn::Tensor& input = l == 0 ? dec.input : dec.outputs[l - 1];
    auto lgr = nn::conv1d_transpose_backward(g, input, model.decoder[l]);
    dec_grads[2 * l] = std::move(lgr.grad_weight);
    dec_grads[2 * l + 1] = std::move(lgr.grad_bias);
    g = std::move(lgr.grad_input);
  }
  std::vector<nn::Tensor> feature_grads(Le);
  feature_grads.back() = std::move(g);
  std::vector<std::vector<double>> enc_grads;
  encoder_backward(model, enc, feature_grads, &enc_grads);

  out.grads.groups = std::move(enc_grads);
  for (auto& d : dec_grads) out.grads.groups.push_back(std::move(d));
  return out;
}

namespace {

nn::Tensor rows_tensor(const ReturnMatrix& m, std::span<const std::size_t> idx) {
  nn::Tensor t(idx.size(), 1, m.cols());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const auto src = m.row(idx[r]);
    std::copy(src.begin(), src.end(), t.channel(r, 0).begin());
  }
  return t;
}

}  // namespace

TrainHistory train(DaeModel& model, const ReturnMatrix& data, const TrainConfig& cfg) {
  cfg.validate();
  if (data.cols() != model.arch.input_length)
    throw ShapeError("train: dataset length " + std::to_string(data.cols()) +
                     " != model input length " + std::to_string(model.arch.input_length));
  if (data.rows() == 0) throw InvalidArgument("train: empty dataset");
  data.check_finite();

  const auto holdout = static_cast<std::size_t>(std::floor(cfg.holdout_fraction * static_cast<double>(data.rows())));
  const std::size_t n_train = data.rows() - holdout;
  if (n_train == 0) throw InvalidArgument("train: holdout leaves no training rows");
  std::vector<std::size_t> train_idx(n_train);
  std::iota(train_idx.begin(), train_idx.end(), 0);
  std::vector<std::size_t> eval_idx(holdout ? holdout : n_train);
  std::iota(eval_idx.begin(), eval_idx.end(), holdout ? n_train : 0);

  const ReturnMatrix train_rows = data.select(train_idx);
  const ReturnMatrix eval_rows = data.select(eval_idx);
  const nn::Tensor eval_clean = to_tensor(eval_rows);
  const nn::Tensor eval_noisy = to_tensor(
      corrupt(eval_rows, {cfg.corruption.sigma_scale, derive_seed(cfg.corruption.seed, ~0ULL, 2)}));

  auto params = model.parameters();
  std::vector<std::size_t> sizes;
  for (const auto& p : params) sizes.push_back(p.size());
  nn::AdamState adam({.lr = cfg.lr}, sizes);

  const std::size_t batch = cfg.batch_size == 0 ? n_train : std::min(cfg.batch_size, n_train);
  TrainHistory hist;
  hist.initial_loss = nn::mse_loss(reconstruct(model, eval_noisy), eval_clean).loss;
  std::vector<std::size_t> order(n_train);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const ReturnMatrix noisy =
        corrupt(train_rows, {cfg.corruption.sigma_scale, derive_seed(cfg.corruption.seed, epoch)});
    std::iota(order.begin(), order.end(), 0);
    if (batch < n_train) {
      Rng rng(derive_seed(cfg.seed, epoch, 1));
      for (std::size_t i = n_train - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
    }
    double weighted = 0.0;
    for (std::size_t start = 0; start < n_train; start += batch) {
      const std::size_t count = std::min(batch, n_train - start);
      const std::span<const std::size_t> idx(order.data() + start, count);
      const DaeLoss dl = dae_loss(model, rows_tensor(noisy, idx), rows_tensor(train_rows, idx));
      if (!std::isfinite(dl.loss)) throw NumericalError("train: non-finite loss at epoch " + std::to_string(epoch), epoch);
      weighted += dl.loss * static_cast<double>(count);
      try {
        adam.step(params, dl.grads.views());
      } catch (const NumericalError&) {
        throw NumericalError("train: non-finite gradient at epoch " + std::to_string(epoch), epoch);
      }
    }
    hist.train_loss.push_back(weighted / static_cast<double>(n_train));
    const double eval = nn::mse_loss(reconstruct(model, eval_noisy), eval_clean).loss;
    if (!std::isfinite(eval)) throw NumericalError("train: non-finite eval loss at epoch " + std::to_string(epoch), epoch);
    hist.eval_loss.push_back(eval);
  }
  model.epochs_trained += cfg.epochs;
  model.train_config = cfg;
  return hist;
}

Generated generate(const DaeModel& model, const ReturnMatrix& data, const CorruptionSpec& spec,
                   std::size_t m_out, unsigned threads) {
  if (m_out < 1) throw InvalidArgument("generate: m_out must be >= 1");
  if (data.rows() == 0) throw InvalidArgument("generate: empty source dataset");
  if (data.cols() != model.arch.input_length)
    throw ShapeError("generate: dataset length " + std::to_string(data.cols()) +
                     " != model input length " + std::to_string(model.arch.input_length));
  Generated out;
  Rng pick(derive_seed(spec.seed, 0, 0x73656c));
  for (std::size_t r = 0; r < m_out; ++r) out.source_rows.push_back(pick.below(data.rows()));
  const ReturnMatrix noisy = corrupt(data.select(out.source_rows), spec);

  ReturnMatrix paths(m_out, data.cols());
  parallel_for(m_out, threads, [&](std::size_t r) {
    nn::Tensor x(1, 1, data.cols());
    const auto src = noisy.row(r);
    std::copy(src.begin(), src.end(), x.data().begin());
    const nn::Tensor y = reconstruct(model, x);
    const double mu = sample_mean(y.data());
    const double sd = sample_std(y.data());
    if (!(sd > 0.0)) throw InvalidArgument("generate: reconstruction of row " + std::to_string(r) + " is constant");
    auto dst = paths.row(r);
    const auto yd = y.data();
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] = (yd[j] - mu) / sd;
  });
  if (data.norm_stats()) {
    std::vector<NormStats> stats;
    for (std::size_t s : out.source_rows) stats.push_back((*data.norm_stats())[s]);
    paths.set_norm_stats(std::move(stats));
  }
  out.paths = std::move(paths);
  return out;
}

}  // namespace synthts::dae
