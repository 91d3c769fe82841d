#include "synthts/nn.hpp"

#include <algorithm>
#include <cmath>

#include "synthts/error.hpp"
#include "synthts/simd/kernels.hpp"

namespace synthts::nn {

Tensor::Tensor(std::size_t batch, std::size_t channels, std::size_t length, double fill)
    : batch_(batch), channels_(channels), length_(length), data_(batch * channels * length, fill) {}

Tensor::Tensor(std::size_t batch, std::size_t channels, std::size_t length, std::vector<double> data)
    : batch_(batch), channels_(channels), length_(length), data_(std::move(data)) {
  if (data_.size() != batch * channels * length)
    throw ShapeError("tensor data size " + std::to_string(data_.size()) + " does not match " +
                     shape_string());
}

std::string Tensor::shape_string() const {
  return "(" + std::to_string(batch_) + ", " + std::to_string(channels_) + ", " +
         std::to_string(length_) + ")";
}

Tensor Tensor::slice(std::size_t m) const {
  const auto s = sample(m);
  return Tensor(1, channels_, length_, std::vector<double>(s.begin(), s.end()));
}

Conv1dLayer::Conv1dLayer(std::size_t in, std::size_t out, std::size_t k, std::size_t s)
    : in_channels(in), out_channels(out), kernel(k), stride(s), weight(out * in * k, 0.0),
      bias(out, 0.0) {
  validate();
}

void Conv1dLayer::validate() const {
  if (kernel < 1 || stride < 1 || in_channels < 1 || out_channels < 1)
    throw ShapeError("conv1d: kernel, stride and channel counts must be >= 1");
  if (weight.size() != out_channels * in_channels * kernel || bias.size() != out_channels)
    throw ShapeError("conv1d: parameter sizes do not match layer shape");
}

std::size_t Conv1dLayer::output_length(std::size_t n) const {
  if (n < kernel || (n - kernel) % stride != 0)
    throw ShapeError("conv1d: input length " + std::to_string(n) + " incompatible with K=" +
                     std::to_string(kernel) + ", S=" + std::to_string(stride));
  return (n - kernel) / stride + 1;
}

ConvTranspose1dLayer::ConvTranspose1dLayer(std::size_t in, std::size_t out, std::size_t k,
                                           std::size_t s)
    : in_channels(in), out_channels(out), kernel(k), stride(s), weight(in * out * k, 0.0),
      bias(out, 0.0) {
  validate();
}

void ConvTranspose1dLayer::validate() const {
  if (kernel < 1 || stride < 1 || in_channels < 1 || out_channels < 1)
    throw ShapeError("conv1d_transpose: kernel, stride and channel counts must be >= 1");
  if (weight.size() != out_channels * in_channels * kernel || bias.size() != out_channels)
    throw ShapeError("conv1d_transpose: parameter sizes do not match layer shape");
}

std::size_t ConvTranspose1dLayer::output_length(std::size_t n) const {
  if (n < 1) throw ShapeError("conv1d_transpose: empty input");
  return (n - 1) * stride + kernel;
}

namespace {

// cols[(i*K + k) * L + j] = x[m, i, j*S + k]
void im2col(const Tensor& x, std::size_t m, std::size_t K, std::size_t S, std::size_t L,
            std::vector<double>& cols) {
  const std::size_t C = x.channels();
  cols.resize(C * K * L);
  for (std::size_t i = 0; i < C; ++i) {
    const auto xi = x.channel(m, i);
    for (std::size_t k = 0; k < K; ++k) {
      double* dst = cols.data() + (i * K + k) * L;
      for (std::size_t j = 0; j < L; ++j) dst[j] = xi[j * S + k];
    }
  }
}

// out[m, i, j*S + k] += cols[(i*K + k) * L + j]
void col2im_add(const std::vector<double>& cols, std::size_t m, std::size_t K, std::size_t S,
                std::size_t L, Tensor& out) {
  for (std::size_t i = 0; i < out.channels(); ++i) {
    auto oi = out.channel(m, i);
    for (std::size_t k = 0; k < K; ++k) {
      const double* src = cols.data() + (i * K + k) * L;
      for (std::size_t j = 0; j < L; ++j) oi[j * S + k] += src[j];
    }
  }
}

double sum(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

}  // namespace

Tensor conv1d_forward(const Tensor& x, const Conv1dLayer& layer) {
  layer.validate();
  if (x.channels() != layer.in_channels)
    throw ShapeError("conv1d: input " + x.shape_string() + " has " + std::to_string(x.channels()) +
                     " channels, layer expects " + std::to_string(layer.in_channels));
  const std::size_t L = layer.output_length(x.length());
  const std::size_t R = layer.in_channels * layer.kernel;
  const auto& kt = simd::active();
  Tensor out(x.batch(), layer.out_channels, L);
  std::vector<double> cols;
  for (std::size_t m = 0; m < x.batch(); ++m) {
    im2col(x, m, layer.kernel, layer.stride, L, cols);
    for (std::size_t o = 0; o < layer.out_channels; ++o) {
      auto dst = out.channel(m, o);
      std::fill(dst.begin(), dst.end(), layer.bias[o]);
      const double* w = layer.weight.data() + o * R;
      for (std::size_t r = 0; r < R; ++r) kt.axpy(w[r], cols.data() + r * L, dst.data(), L);
    }
  }
  return out;
}

LayerGrads conv1d_backward(const Tensor& grad_out, const Tensor& x, const Conv1dLayer& layer,
                           bool param_grads) {
  layer.validate();
  if (x.channels() != layer.in_channels) throw ShapeError("conv1d_backward: input channel mismatch");
  const std::size_t L = layer.output_length(x.length());
  if (grad_out.batch() != x.batch() || grad_out.channels() != layer.out_channels ||
      grad_out.length() != L)
    throw ShapeError("conv1d_backward: grad_out " + grad_out.shape_string() +
                     " does not match forward output");
  const std::size_t R = layer.in_channels * layer.kernel;
  const auto& kt = simd::active();
  LayerGrads g;
  g.grad_input = Tensor(x.batch(), x.channels(), x.length());
  if (param_grads) {
    g.grad_weight.assign(layer.weight.size(), 0.0);
    g.grad_bias.assign(layer.bias.size(), 0.0);
  }
  std::vector<double> cols;
  std::vector<double> gcols(R * L);
  for (std::size_t m = 0; m < x.batch(); ++m) {
    if (param_grads) im2col(x, m, layer.kernel, layer.stride, L, cols);
    std::fill(gcols.begin(), gcols.end(), 0.0);
    for (std::size_t o = 0; o < layer.out_channels; ++o) {
      const auto go = grad_out.channel(m, o);
      const double* w = layer.weight.data() + o * R;
      if (param_grads) {
        g.grad_bias[o] += sum(go);
        double* gw = g.grad_weight.data() + o * R;
        for (std::size_t r = 0; r < R; ++r) gw[r] += kt.dot(go.data(), cols.data() + r * L, L);
      }
      for (std::size_t r = 0; r < R; ++r) kt.axpy(w[r], go.data(), gcols.data() + r * L, L);
    }
    col2im_add(gcols, m, layer.kernel, layer.stride, L, g.grad_input);
  }
  return g;
}

Tensor conv1d_transpose_forward(const Tensor& x, const ConvTranspose1dLayer& layer) {
  layer.validate();
  if (x.channels() != layer.in_channels)
    throw ShapeError("conv1d_transpose: input " + x.shape_string() + " has " +
                     std::to_string(x.channels()) + " channels, layer expects " +
                     std::to_string(layer.in_channels));
  const std::size_t L = x.length();
  const std::size_t R = layer.out_channels * layer.kernel;
  const auto& kt = simd::active();
  Tensor out(x.batch(), layer.out_channels, layer.output_length(L));
  std::vector<double> cols(R * L);
  for (std::size_t m = 0; m < x.batch(); ++m) {
    std::fill(cols.begin(), cols.end(), 0.0);
    for (std::size_t i = 0; i < layer.in_channels; ++i) {
      const auto xi = x.channel(m, i);
      const double* w = layer.weight.data() + i * R;
      for (std::size_t r = 0; r < R; ++r) kt.axpy(w[r], xi.data(), cols.data() + r * L, L);
    }
    for (std::size_t o = 0; o < layer.out_channels; ++o) {
      auto dst = out.channel(m, o);
      std::fill(dst.begin(), dst.end(), layer.bias[o]);
    }
    col2im_add(cols, m, layer.kernel, layer.stride, L, out);
  }
  return out;
}

LayerGrads conv1d_transpose_backward(const Tensor& grad_out, const Tensor& x,
                                     const ConvTranspose1dLayer& layer, bool param_grads) {
  layer.validate();
  if (x.channels() != layer.in_channels)
    throw ShapeError("conv1d_transpose_backward: input channel mismatch");
  const std::size_t L = x.length();
  if (grad_out.batch() != x.batch() || grad_out.channels() != layer.out_channels ||
      grad_out.length() != layer.output_length(L))
    throw ShapeError("conv1d_transpose_backward: grad_out " + grad_out.shape_string() +
                     " does not match forward output");
  const std::size_t R = layer.out_channels * layer.kernel;
  const auto& kt = simd::active();
  LayerGrads g;
  g.grad_input = Tensor(x.batch(), x.channels(), L);
  if (param_grads) {
    g.grad_weight.assign(layer.weight.size(), 0.0);
    g.grad_bias.assign(layer.bias.size(), 0.0);
  }
  std::vector<double> gcols;
  for (std::size_t m = 0; m < x.batch(); ++m) {
    im2col(grad_out, m, layer.kernel, layer.stride, L, gcols);
    for (std::size_t i = 0; i < layer.in_channels; ++i) {
      const auto xi = x.channel(m, i);
      auto gi = g.grad_input.channel(m, i);
      const double* w = layer.weight.data() + i * R;
      double* gw = param_grads ? g.grad_weight.data() + i * R : nullptr;
      for (std::size_t r = 0; r < R; ++r) {
        if (gw) gw[r] += kt.dot(xi.data(), gcols.data() + r * L, L);
        kt.axpy(w[r], gcols.data() + r * L, gi.data(), L);
      }
    }
    if (param_grads)
      for (std::size_t o = 0; o < layer.out_channels; ++o) g.grad_bias[o] += sum(grad_out.channel(m, o));
  }
  return g;
}

Tensor activation_forward(const Tensor& x) {
  Tensor y(x.batch(), x.channels(), x.length());
  simd::leaky_relu(x.data(), y.data(), kLeakySlope);
  return y;
}

Tensor activation_backward(const Tensor& x, const Tensor& grad_out) {
  if (!x.same_shape(grad_out)) throw ShapeError("activation_backward: shape mismatch");
  Tensor g(x.batch(), x.channels(), x.length());
  simd::leaky_relu_backward(x.data(), grad_out.data(), g.data(), kLeakySlope);
  return g;
}

LossGrad mse_loss(const Tensor& pred, const Tensor& target) {
  if (!pred.same_shape(target))
    throw ShapeError("mse_loss: " + pred.shape_string() + " vs " + target.shape_string());
  if (pred.size() == 0) throw ShapeError("mse_loss: empty tensors");
  const double count = static_cast<double>(pred.size());
  LossGrad out;
  out.loss = simd::sum_sq_diff(pred.data(), target.data()) / count;
  out.grad = Tensor(pred.batch(), pred.channels(), pred.length());
  const auto p = pred.data();
  const auto t = target.data();
  auto g = out.grad.data();
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = 2.0 * (p[i] - t[i]) / count;
  return out;
}

AdamState::AdamState(AdamConfig cfg, std::span<const std::size_t> group_sizes) : cfg_(cfg) {
  if (!(cfg.lr >= 0.0)) throw InvalidArgument("adam: learning rate must be >= 0");
  for (std::size_t n : group_sizes) {
    m_.emplace_back(n, 0.0);
    v_.emplace_back(n, 0.0);
  }
}

void AdamState::step(std::span<const std::span<double>> params,
                     std::span<const std::span<const double>> grads) {
  if (params.size() != m_.size() || grads.size() != m_.size())
    throw ShapeError("adam: parameter group count mismatch");
  for (std::size_t g = 0; g < m_.size(); ++g) {
    if (params[g].size() != m_[g].size() || grads[g].size() != m_[g].size())
      throw ShapeError("adam: group " + std::to_string(g) + " size mismatch");
    for (double v : grads[g])
      if (!std::isfinite(v)) throw NumericalError("adam: non-finite gradient", t_ + 1);
  }
  ++t_;
  const double b1t = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double b2t = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t g = 0; g < m_.size(); ++g) {
    auto& m = m_[g];
    auto& v = v_[g];
    const auto grad = grads[g];
    auto p = params[g];
    for (std::size_t i = 0; i < m.size(); ++i) {
      m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * grad[i];
      v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * grad[i] * grad[i];
      const double m_hat = m[i] / b1t;
      const double v_hat = v[i] / b2t;
      p[i] -= cfg_.lr * m_hat / (std::sqrt(v_hat) + cfg_.eps);
    }
  }
}

GradCheckReport grad_check(const std::function<double()>& loss_fn,
                           std::span<const GradCheckTarget> targets, double tolerance, double h) {
  const double base = loss_fn();
  if (loss_fn() != base) throw InvalidArgument("grad_check: loss function is not deterministic");
  GradCheckReport rep;
  rep.passed = true;
  for (const auto& t : targets) {
    if (t.values.size() != t.analytic.size())
      throw ShapeError("grad_check: '" + t.name + "' value/gradient size mismatch");
    double max_diff = 0.0, max_a = 0.0, max_n = 0.0;
    for (std::size_t i = 0; i < t.values.size(); ++i) {
      const double saved = t.values[i];
      t.values[i] = saved + h;
      const double up = loss_fn();
      t.values[i] = saved - h;
      const double down = loss_fn();
      t.values[i] = saved;
      const double numeric = (up - down) / (2.0 * h);
      max_diff = std::max(max_diff, std::abs(numeric - t.analytic[i]));
      max_a = std::max(max_a, std::abs(t.analytic[i]));
      max_n = std::max(max_n, std::abs(numeric));
    }
    if (loss_fn() != base) throw InvalidArgument("grad_check: loss function is not deterministic");
    const double rel = max_diff / std::max({max_a, max_n, 1e-10});
    rep.names.push_back(t.name);
    rep.max_rel_error.push_back(rel);
    rep.worst = std::max(rep.worst, rel);
    if (!(rel < tolerance)) rep.passed = false;
  }
  return rep;
}

}  // namespace synthts::nn
