#include "synthts/style_transfer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "synthts/error.hpp"
#include "synthts/parallel.hpp"
#include "synthts/rng.hpp"
#include "synthts/simd/kernels.hpp"

namespace synthts::style {

GramMatrix gram(const nn::Tensor& f) {
  if (f.batch() != 1) throw ShapeError("gram: expected a single-path feature map");
  GramMatrix g;
  g.channels = f.channels();
  g.length = f.length();
  g.values.assign(g.channels * g.channels, 0.0);
  const auto& kt = simd::active();
  for (std::size_t i = 0; i < g.channels; ++i)
    for (std::size_t j = i; j < g.channels; ++j) {
      const double v = kt.dot(f.channel(0, i).data(), f.channel(0, j).data(), f.length());
      g.values[i * g.channels + j] = v;
      g.values[j * g.channels + i] = v;
    }
  return g;
}

nn::LossGrad content_loss(const nn::Tensor& f, const nn::Tensor& p) {
  if (!f.same_shape(p))
    throw ShapeError("content_loss: " + f.shape_string() + " vs " + p.shape_string());
  nn::LossGrad out;
  out.loss = 0.5 * simd::sum_sq_diff(f.data(), p.data());
  out.grad = nn::Tensor(f.batch(), f.channels(), f.length());
  auto g = out.grad.data();
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = f.data()[i] - p.data()[i];
  return out;
}

StyleLossResult style_loss(std::span<const nn::Tensor> features, std::span<const GramMatrix> targets,
                           std::span<const double> weights) {
  if (features.size() != targets.size() || features.size() != weights.size())
    throw ShapeError("style_loss: layer count mismatch (" + std::to_string(features.size()) + " maps, " +
                     std::to_string(targets.size()) + " grams, " + std::to_string(weights.size()) +
                     " weights)");
  StyleLossResult out;
  const auto& kt = simd::active();
  for (std::size_t l = 0; l < features.size(); ++l) {
    const nn::Tensor& f = features[l];
    const GramMatrix& a = targets[l];
    if (f.batch() != 1 || f.channels() != a.channels)
      throw ShapeError("style_loss: layer " + std::to_string(l) + " shape mismatch");
    const GramMatrix g = gram(f);
    const double N = static_cast<double>(f.channels());
    const double M = static_cast<double>(f.length());
    const double norm = weights[l] / (4.0 * N * N * M * M);
    out.loss += norm * kt.sum_sq_diff(g.values.data(), a.values.data(), g.values.size());

    nn::Tensor grad(1, f.channels(), f.length());
    for (std::size_t i = 0; i < g.channels; ++i) {
      auto gi = grad.channel(0, i);
      for (std::size_t j = 0; j < g.channels; ++j) {
        const double coeff = 4.0 * norm * (g.at(i, j) - a.at(i, j));
        if (coeff != 0.0) kt.axpy(coeff, f.channel(0, j).data(), gi.data(), f.length());
      }
    }
    out.grads.push_back(std::move(grad));
  }
  return out;
}

std::size_t content_layer(const dae::DaeModel& model) { return model.encoder.size() - 1; }

namespace {

nn::Tensor path_tensor(std::span<const double> path) {
  return nn::Tensor(1, 1, path.size(), std::vector<double>(path.begin(), path.end()));
}

}  // namespace

StylePool build_style_pool(const dae::DaeModel& model, const ReturnMatrix& style_paths,
                           unsigned threads) {
  if (style_paths.rows() == 0) throw InvalidArgument("style pool is empty");
  if (style_paths.cols() != model.arch.input_length)
    throw ShapeError("style pool: path length " + std::to_string(style_paths.cols()) +
                     " != model input length " + std::to_string(model.arch.input_length));
  StylePool pool;
  pool.paths = style_paths;
  pool.content.resize(style_paths.rows());
  pool.grams.resize(style_paths.rows());
  const std::size_t deep = content_layer(model);
  parallel_for(style_paths.rows(), threads, [&](std::size_t r) {
    const auto tr = dae::encode(model, path_tensor(style_paths.row(r)));
    pool.content[r] = tr.features[deep];
    pool.grams[r] = {gram(tr.features[kStyleLayers[0]]), gram(tr.features[kStyleLayers[1]])};
  });
  return pool;
}

MatchResult content_match(const nn::Tensor& content_features, const StylePool& pool) {
  if (pool.size() == 0) throw InvalidArgument("content_match: empty style pool");
  MatchResult res;
  res.losses.reserve(pool.size());
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < pool.size(); ++c) {
    if (!pool.content[c].same_shape(content_features))
      throw ShapeError("content_match: candidate " + std::to_string(c) + " feature shape mismatch");
    const double loss = 0.5 * simd::sum_sq_diff(pool.content[c].data(), content_features.data());
    res.losses.push_back(loss);
    if (loss < best) {
      best = loss;
      res.index = c;
    }
  }
  return res;
}

MatchResult content_match(std::span<const double> content_path, const StylePool& pool,
                          const dae::DaeModel& model) {
  if (pool.size() == 0) throw InvalidArgument("content_match: empty style pool");
  const auto tr = dae::encode(model, path_tensor(content_path));
  return content_match(tr.features[content_layer(model)], pool);
}

double dtw_distance(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw InvalidArgument("dtw_distance: empty input");
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> prev(b.size() + 1, inf), cur(b.size() + 1, inf);
  prev[0] = 0.0;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = inf;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const double cost = std::abs(a[i - 1] - b[j - 1]);
      cur[j] = cost + std::min({prev[j], cur[j - 1], prev[j - 1]});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

void StyleTransferConfig::validate() const {
  if (!(alpha >= 0.0) || !(beta >= 0.0) || !(alpha + beta > 0.0))
    throw InvalidArgument("style transfer: alpha, beta must be >= 0 with alpha + beta > 0");
  if (!(layer_weights[0] >= 0.0) || !(layer_weights[1] >= 0.0) ||
      std::abs(layer_weights[0] + layer_weights[1] - 1.0) > 1e-12)
    throw InvalidArgument("style transfer: layer weights must be >= 0 and sum to 1");
  if (epochs < 1) throw InvalidArgument("style transfer: epochs must be >= 1");
  if (!(lr >= 0.0)) throw InvalidArgument("style transfer: learning rate must be >= 0");
  if (!(init_sigma >= 0.0)) throw InvalidArgument("style transfer: init sigma must be >= 0");
}

Objective transfer_objective(const dae::DaeModel& model, std::span<const double> path,
                             const nn::Tensor& content_target,
                             const std::array<GramMatrix, 2>& style_targets,
                             const StyleTransferConfig& cfg) {
  const auto tr = dae::encode(model, path_tensor(path));
  const std::size_t deep = content_layer(model);
  std::vector<nn::Tensor> fgrads(model.encoder.size());

  Objective obj;
  auto accumulate = [&](std::size_t layer, const nn::Tensor& g, double scale) {
    if (fgrads[layer].data().empty()) fgrads[layer] = nn::Tensor(g.batch(), g.channels(), g.length());
    simd::axpy(scale, g.data(), fgrads[layer].data());
  };

  const nn::LossGrad c = content_loss(tr.features[deep], content_target);
  obj.content = c.loss;
  if (cfg.alpha != 0.0) accumulate(deep, c.grad, cfg.alpha);

  const std::array<nn::Tensor, 2> style_maps{tr.features[kStyleLayers[0]], tr.features[kStyleLayers[1]]};
  const StyleLossResult s = style_loss(style_maps, style_targets, cfg.layer_weights);
  obj.style = s.loss;
  if (cfg.beta != 0.0)
    for (std::size_t k = 0; k < kStyleLayers.size(); ++k) accumulate(kStyleLayers[k], s.grads[k], cfg.beta);

  obj.total = cfg.alpha * obj.content + cfg.beta * obj.style;
  const nn::Tensor gx = dae::encoder_backward(model, tr, fgrads, nullptr);
  obj.grad.assign(gx.data().begin(), gx.data().end());
  return obj;
}

TransferResult transfer(const dae::DaeModel& model, const ReturnMatrix& content_batch,
                        const StylePool& pool, const StyleTransferConfig& cfg, unsigned threads) {
  cfg.validate();
  if (pool.size() == 0) throw InvalidArgument("transfer: empty style pool");
  const std::size_t n = model.arch.input_length;
  if (content_batch.cols() != n)
    throw ShapeError("transfer: content length " + std::to_string(content_batch.cols()) +
                     " != model input length " + std::to_string(n));
  if (cfg.denormalize && !pool.paths.norm_stats())
    throw InvalidArgument("transfer: style pool has no normalization stats to denormalize with");

  const std::size_t rows = content_batch.rows();
  TransferResult res;
  res.paths = ReturnMatrix(rows, n);
  res.style_index.resize(rows);
  res.match_loss.resize(rows);
  res.initial_loss.resize(rows);
  res.final_loss.resize(rows);
  res.final_content.resize(rows);
  res.final_style.resize(rows);

  parallel_for(rows, threads, [&](std::size_t r) {
    const auto content = content_batch.row(r);
    const auto ctr = dae::encode(model, path_tensor(content));
    const nn::Tensor& target = ctr.features[content_layer(model)];
    const MatchResult match = content_match(target, pool);
    res.style_index[r] = match.index;
    res.match_loss[r] = match.losses[match.index];

    std::vector<double> x(n);
    if (cfg.init_from_content) {
      std::copy(content.begin(), content.end(), x.begin());
    } else {
      Rng rng(derive_seed(cfg.seed, r));
      for (double& v : x) v = cfg.init_sigma * rng.normal();
    }

    const std::array<std::size_t, 1> sizes{n};
    nn::AdamState adam({.lr = cfg.lr}, sizes);
    const std::array<std::span<double>, 1> params{std::span<double>(x)};
    Objective obj;
    for (std::size_t step = 0; step < cfg.epochs; ++step) {
      obj = transfer_objective(model, x, target, pool.grams[match.index], cfg);
      if (!std::isfinite(obj.total)) throw NumericalError("transfer: non-finite objective on row " + std::to_string(r), step);
      if (step == 0) res.initial_loss[r] = obj.total;
      const std::array<std::span<const double>, 1> grads{std::span<const double>(obj.grad)};
      try {
        adam.step(params, grads);
      } catch (const NumericalError&) {
        throw NumericalError("transfer: non-finite gradient on row " + std::to_string(r), step);
      }
    }
    obj = transfer_objective(model, x, target, pool.grams[match.index], cfg);
    if (!std::isfinite(obj.total)) throw NumericalError("transfer: non-finite objective on row " + std::to_string(r), cfg.epochs);
    res.final_loss[r] = obj.total;
    res.final_content[r] = obj.content;
    res.final_style[r] = obj.style;

    auto dst = res.paths.row(r);
    if (cfg.denormalize) {
      const NormStats s = (*pool.paths.norm_stats())[match.index];
      for (std::size_t j = 0; j < n; ++j) dst[j] = x[j] * s.std + s.mean;
    } else {
      std::copy(x.begin(), x.end(), dst.begin());
    }
  });
  return res;
}

}  // namespace synthts::style
