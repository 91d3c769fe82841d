#pragma once

// Randomized finite-difference sweep over every backward operation. Shared by
// the unit tests and the acceptance binary.

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "synthts/dae.hpp"
#include "synthts/nn.hpp"
#include "synthts/rng.hpp"
#include "synthts/style_transfer.hpp"

namespace gcsuite {

using synthts::Rng;
using synthts::nn::GradCheckTarget;
using synthts::nn::Tensor;

struct OpStats {
  std::string op;
  std::size_t configs = 0;
  std::size_t redraws = 0;  // draws rejected for sitting on a rectifier kink
  double worst = 0.0;
};

// Pre-activations closer than this to zero are avoided: a 1e-5 step must not
// cross the kink, where the one-sided slopes differ.
inline constexpr double kKinkMargin = 1e-3;

inline Tensor rand_tensor(Rng& rng, std::size_t b, std::size_t c, std::size_t n, double sd = 1.0) {
  Tensor t(b, c, n);
  for (double& v : t.data()) v = sd * rng.normal();
  return t;
}

inline void fill(Rng& rng, std::span<double> v, double sd = 1.0) {
  for (double& x : v) x = sd * rng.normal();
}

inline bool clear_of_kinks(const std::vector<Tensor>& pre, std::size_t count) {
  for (std::size_t l = 0; l < count; ++l)
    for (double v : pre[l].data())
      if (std::abs(v) < kKinkMargin) return false;
  return true;
}

// Loss sum(c * y) + 0.5 sum(y^2) for an output y; gradient c + y.
struct Probe {
  Tensor c;
  double loss(const Tensor& y) const {
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += c.data()[i] * y.data()[i] + 0.5 * y.data()[i] * y.data()[i];
    return s;
  }
  Tensor grad(const Tensor& y) const {
    Tensor g = y;
    for (std::size_t i = 0; i < y.size(); ++i) g.data()[i] += c.data()[i];
    return g;
  }
};

inline void record(OpStats& s, const synthts::nn::GradCheckReport& rep) {
  ++s.configs;
  s.worst = std::max(s.worst, rep.worst);
}

inline OpStats check_conv(std::uint64_t seed, std::size_t configs) {
  namespace nn = synthts::nn;
  OpStats st{"conv1d"};
  Rng rng(seed);
  while (st.configs < configs) {
    nn::Conv1dLayer layer(1 + rng.below(3), 1 + rng.below(3), 1 + rng.below(4), 1 + rng.below(3));
    fill(rng, layer.weight);
    fill(rng, layer.bias);
    const std::size_t L = 1 + rng.below(4);
    Tensor x = rand_tensor(rng, 1 + rng.below(2), layer.in_channels, (L - 1) * layer.stride + layer.kernel);
    const Probe p{rand_tensor(rng, x.batch(), layer.out_channels, L)};
    const Tensor y = nn::conv1d_forward(x, layer);
    const auto g = nn::conv1d_backward(p.grad(y), x, layer);
    const std::vector<GradCheckTarget> t{{"x", x.data(), g.grad_input.data()},
                                         {"weight", layer.weight, g.grad_weight},
                                         {"bias", layer.bias, g.grad_bias}};
    record(st, nn::grad_check([&] { return p.loss(nn::conv1d_forward(x, layer)); }, t, 1e-4));
  }
  return st;
}

inline OpStats check_conv_transpose(std::uint64_t seed, std::size_t configs) {
  namespace nn = synthts::nn;
  OpStats st{"conv1d_transpose"};
  Rng rng(seed);
  while (st.configs < configs) {
    nn::ConvTranspose1dLayer layer(1 + rng.below(3), 1 + rng.below(3), 1 + rng.below(4), 1 + rng.below(3));
    fill(rng, layer.weight);
    fill(rng, layer.bias);
    Tensor x = rand_tensor(rng, 1 + rng.below(2), layer.in_channels, 1 + rng.below(4));
    const Probe p{rand_tensor(rng, x.batch(), layer.out_channels, layer.output_length(x.length()))};
    const Tensor y = nn::conv1d_transpose_forward(x, layer);
    const auto g = nn::conv1d_transpose_backward(p.grad(y), x, layer);
    const std::vector<GradCheckTarget> t{{"x", x.data(), g.grad_input.data()},
                                         {"weight", layer.weight, g.grad_weight},
                                         {"bias", layer.bias, g.grad_bias}};
    record(st, nn::grad_check([&] { return p.loss(nn::conv1d_transpose_forward(x, layer)); }, t, 1e-4));
  }
  return st;
}

inline OpStats check_activation(std::uint64_t seed, std::size_t configs) {
  namespace nn = synthts::nn;
  OpStats st{"activation"};
  Rng rng(seed);
  while (st.configs < configs) {
    Tensor x = rand_tensor(rng, 1 + rng.below(2), 1 + rng.below(3), 1 + rng.below(8));
    if (!clear_of_kinks({x}, 1)) {
      ++st.redraws;
      continue;
    }
    const Probe p{rand_tensor(rng, x.batch(), x.channels(), x.length())};
    const Tensor gx = nn::activation_backward(x, p.grad(nn::activation_forward(x)));
    const std::vector<GradCheckTarget> t{{"x", x.data(), gx.data()}};
    record(st, nn::grad_check([&] { return p.loss(nn::activation_forward(x)); }, t, 1e-4));
  }
  return st;
}

inline OpStats check_mse(std::uint64_t seed, std::size_t configs) {
  namespace nn = synthts::nn;
  OpStats st{"mse"};
  Rng rng(seed);
  while (st.configs < configs) {
    const std::size_t b = 1 + rng.below(3), c = 1 + rng.below(2), n = 1 + rng.below(9);
    Tensor pred = rand_tensor(rng, b, c, n), target = rand_tensor(rng, b, c, n);
    const auto lg = nn::mse_loss(pred, target);
    std::vector<double> neg(lg.grad.data().begin(), lg.grad.data().end());
    for (double& v : neg) v = -v;
    const std::vector<GradCheckTarget> t{{"pred", pred.data(), lg.grad.data()}, {"target", target.data(), neg}};
    record(st, nn::grad_check([&] { return nn::mse_loss(pred, target).loss; }, t, 1e-4));
  }
  return st;
}

inline OpStats check_content_loss(std::uint64_t seed, std::size_t configs) {
  namespace nn = synthts::nn;
  OpStats st{"content_loss"};
  Rng rng(seed);
  while (st.configs < configs) {
    const std::size_t c = 1 + rng.below(4), n = 1 + rng.below(9);
    Tensor f = rand_tensor(rng, 1, c, n), p = rand_tensor(rng, 1, c, n);
    const auto lg = synthts::style::content_loss(f, p);
    const std::vector<GradCheckTarget> t{{"F", f.data(), lg.grad.data()}};
    record(st, nn::grad_check([&] { return synthts::style::content_loss(f, p).loss; }, t, 1e-4));
  }
  return st;
}

inline OpStats check_style_loss(std::uint64_t seed, std::size_t configs) {
  namespace nn = synthts::nn;
  namespace sty = synthts::style;
  OpStats st{"style_loss"};
  Rng rng(seed);
  while (st.configs < configs) {
    std::vector<Tensor> f;
    std::vector<sty::GramMatrix> a;
    for (int l = 0; l < 2; ++l) {
      const std::size_t c = 1 + rng.below(4), n = 1 + rng.below(7);
      f.push_back(rand_tensor(rng, 1, c, n));
      a.push_back(sty::gram(rand_tensor(rng, 1, c, n)));
    }
    const double w0 = rng.uniform();
    const std::vector<double> w{w0, 1.0 - w0};
    const auto res = sty::style_loss(f, a, w);
    const std::vector<GradCheckTarget> t{{"F1", f[0].data(), res.grads[0].data()},
                                         {"F2", f[1].data(), res.grads[1].data()}};
    record(st, nn::grad_check([&] { return sty::style_loss(f, a, w).loss; }, t, 1e-4));
  }
  return st;
}

// Tiny n = 27 model with random weights and biases.
inline synthts::dae::DaeModel tiny_model(Rng& rng) {
  namespace dae = synthts::dae;
  const std::vector<std::size_t> ch{1, 1 + rng.below(3), 2 + rng.below(3), 2 + rng.below(4)};
  auto model = dae::build_model(dae::DaeArchitecture::make(27, ch), rng.next_u64());
  for (auto& l : model.encoder) fill(rng, l.bias, 0.2);
  for (auto& l : model.decoder) fill(rng, l.bias, 0.2);
  return model;
}

inline OpStats check_dae_loss(std::uint64_t seed, std::size_t configs) {
  namespace nn = synthts::nn;
  namespace dae = synthts::dae;
  OpStats st{"dae_loss"};
  Rng rng(seed);
  while (st.configs < configs) {
    auto model = tiny_model(rng);
    const std::size_t b = 1 + rng.below(3);
    const Tensor clean = rand_tensor(rng, b, 1, 27);
    const Tensor noisy = rand_tensor(rng, b, 1, 27);
    const auto enc = dae::encode(model, noisy);
    const auto dec = dae::decode(model, enc.latent());
    if (!clear_of_kinks(enc.pre, enc.pre.size()) || !clear_of_kinks(dec.pre, dec.pre.size() - 1)) {
      ++st.redraws;
      continue;
    }
    const auto dl = dae::dae_loss(model, noisy, clean);
    const auto params = model.parameters();
    const auto names = model.parameter_names();
    std::vector<GradCheckTarget> t;
    for (std::size_t i = 0; i < params.size(); ++i) t.push_back({names[i], params[i], dl.grads.groups[i]});
    record(st, nn::grad_check([&] { return dae::dae_loss(model, noisy, clean).loss; }, t, 1e-4));
  }
  return st;
}

inline OpStats check_transfer_objective(std::uint64_t seed, std::size_t configs) {
  namespace nn = synthts::nn;
  namespace dae = synthts::dae;
  namespace sty = synthts::style;
  OpStats st{"transfer_objective"};
  Rng rng(seed);
  while (st.configs < configs) {
    auto model = tiny_model(rng);
    const Tensor content = rand_tensor(rng, 1, 1, 27);
    const Tensor style = rand_tensor(rng, 1, 1, 27);
    std::vector<double> path(27);
    fill(rng, path);
    const auto enc = dae::encode(model, Tensor(1, 1, 27, path));
    if (!clear_of_kinks(enc.pre, enc.pre.size())) {
      ++st.redraws;
      continue;
    }
    const auto ct = dae::encode(model, content);
    const auto sf = dae::encode(model, style);
    const std::array<sty::GramMatrix, 2> grams{sty::gram(sf.features[0]), sty::gram(sf.features[1])};
    sty::StyleTransferConfig cfg;
    cfg.alpha = 0.1 + rng.uniform();
    cfg.beta = 10.0 * rng.uniform();
    cfg.layer_weights[0] = rng.uniform();
    cfg.layer_weights[1] = 1.0 - cfg.layer_weights[0];
    const nn::Tensor& target = ct.features[sty::content_layer(model)];
    const auto obj = sty::transfer_objective(model, path, target, grams, cfg);
    const std::vector<GradCheckTarget> t{{"path", path, obj.grad}};
    record(st, nn::grad_check([&] { return sty::transfer_objective(model, path, target, grams, cfg).total; }, t,
                              1e-4));
  }
  return st;
}

inline std::vector<OpStats> run_all(std::uint64_t seed, std::size_t configs_per_op) {
  return {check_conv(seed + 1, configs_per_op),         check_conv_transpose(seed + 2, configs_per_op),
          check_activation(seed + 3, configs_per_op),   check_mse(seed + 4, configs_per_op),
          check_content_loss(seed + 5, configs_per_op), check_style_loss(seed + 6, configs_per_op),
          check_dae_loss(seed + 7, configs_per_op),     check_transfer_objective(seed + 8, configs_per_op)};
}

}  // namespace gcsuite
