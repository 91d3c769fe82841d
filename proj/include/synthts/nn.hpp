#pragma once

// Minimal 1D convolutional network core: valid (unpadded) strided convolution
// and its transpose, leaky rectifier, mean squared error, Adam, and a central
// finite-difference gradient checker. Every op has an explicit backward
// function; models compose them in reverse order.

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace synthts::nn {

/// Dense (batch, channels, length) array of doubles, row-major.
class Tensor {
 public:
  Tensor() = default;
  Tensor(std::size_t batch, std::size_t channels, std::size_t length, double fill = 0.0);
  Tensor(std::size_t batch, std::size_t channels, std::size_t length, std::vector<double> data);

  std::size_t batch() const noexcept { return batch_; }
  std::size_t channels() const noexcept { return channels_; }
  std::size_t length() const noexcept { return length_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool same_shape(const Tensor& o) const noexcept {
    return batch_ == o.batch_ && channels_ == o.channels_ && length_ == o.length_;
  }
  std::string shape_string() const;

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  std::span<double> channel(std::size_t m, std::size_t c) noexcept {
    return std::span<double>(data_).subspan((m * channels_ + c) * length_, length_);
  }
  std::span<const double> channel(std::size_t m, std::size_t c) const noexcept {
    return std::span<const double>(data_).subspan((m * channels_ + c) * length_, length_);
  }
  std::span<const double> sample(std::size_t m) const noexcept {
    return std::span<const double>(data_).subspan(m * channels_ * length_, channels_ * length_);
  }
  std::span<double> sample(std::size_t m) noexcept {
    return std::span<double>(data_).subspan(m * channels_ * length_, channels_ * length_);
  }
  double& at(std::size_t m, std::size_t c, std::size_t j) noexcept {
    return data_[(m * channels_ + c) * length_ + j];
  }
  double at(std::size_t m, std::size_t c, std::size_t j) const noexcept {
    return data_[(m * channels_ + c) * length_ + j];
  }
  /// Single-sample tensor holding sample m.
  Tensor slice(std::size_t m) const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::size_t batch_ = 0;
  std::size_t channels_ = 0;
  std::size_t length_ = 0;
  std::vector<double> data_;
};

/// out[m,o,j] = bias[o] + sum_{i,k} x[m,i,j*S+k] * weight[o,i,k]
struct Conv1dLayer {
  std::size_t in_channels = 1;
  std::size_t out_channels = 1;
  std::size_t kernel = 1;
  std::size_t stride = 1;
  std::vector<double> weight;  // out x in x kernel
  std::vector<double> bias;    // out

  Conv1dLayer() = default;
  Conv1dLayer(std::size_t in, std::size_t out, std::size_t kernel, std::size_t stride);
  /// (n - K) / S + 1; throws ShapeError when n < K or S does not divide n - K.
  std::size_t output_length(std::size_t n) const;
  void validate() const;
};

/// Adjoint of Conv1dLayer as a linear map, plus bias. The weight array has
/// the layout of the mirrored forward convolution (in x out x kernel), so a
/// Conv1dLayer{A -> B} and a ConvTranspose1dLayer{B -> A} sharing one weight
/// array are exact transposes of each other.
struct ConvTranspose1dLayer {
  std::size_t in_channels = 1;
  std::size_t out_channels = 1;
  std::size_t kernel = 1;
  std::size_t stride = 1;
  std::vector<double> weight;  // in x out x kernel
  std::vector<double> bias;    // out

  ConvTranspose1dLayer() = default;
  ConvTranspose1dLayer(std::size_t in, std::size_t out, std::size_t kernel, std::size_t stride);
  /// (n - 1) * S + K
  std::size_t output_length(std::size_t n) const;
  void validate() const;
};

struct LayerGrads {
  Tensor grad_input;
  std::vector<double> grad_weight;
  std::vector<double> grad_bias;
};

Tensor conv1d_forward(const Tensor& x, const Conv1dLayer& layer);
/// With `param_grads` false only grad_input is filled.
LayerGrads conv1d_backward(const Tensor& grad_out, const Tensor& x, const Conv1dLayer& layer,
                           bool param_grads = true);

Tensor conv1d_transpose_forward(const Tensor& x, const ConvTranspose1dLayer& layer);
LayerGrads conv1d_transpose_backward(const Tensor& grad_out, const Tensor& x,
                                     const ConvTranspose1dLayer& layer, bool param_grads = true);

inline constexpr double kLeakySlope = 0.2;

Tensor activation_forward(const Tensor& x);
/// x is the forward input (pre-activation).
Tensor activation_backward(const Tensor& x, const Tensor& grad_out);

struct LossGrad {
  double loss = 0.0;
  Tensor grad;
};

/// Mean over all elements of (pred - target)^2; gradient 2 (pred - target) / count.
LossGrad mse_loss(const Tensor& pred, const Tensor& target);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Moments for a fixed list of parameter groups. One instance per
/// optimization run; not shared.
class AdamState {
 public:
  AdamState(AdamConfig cfg, std::span<const std::size_t> group_sizes);

  const AdamConfig& config() const noexcept { return cfg_; }
  std::size_t step_count() const noexcept { return t_; }
  std::span<const double> first_moment(std::size_t g) const { return m_.at(g); }
  std::span<const double> second_moment(std::size_t g) const { return v_.at(g); }

  /// One bias-corrected Adam update of every group. Throws NumericalError
  /// (with the step index) on a non-finite gradient, leaving params untouched.
  void step(std::span<const std::span<double>> params, std::span<const std::span<const double>> grads);

 private:
  AdamConfig cfg_;
  std::size_t t_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

struct GradCheckTarget {
  std::string name;
  std::span<double> values;          // perturbed in place, restored afterwards
  std::span<const double> analytic;  // gradient to verify
};

struct GradCheckReport {
  std::vector<std::string> names;
  /// Per target: max_i |analytic_i - numeric_i| / max(|analytic|_inf, |numeric|_inf, 1e-10).
  std::vector<double> max_rel_error;
  double worst = 0.0;
  bool passed = false;
};

/// Central differences with step h. Throws InvalidArgument if two evaluations
/// at the same point disagree (non-deterministic loss).
GradCheckReport grad_check(const std::function<double()>& loss_fn,
                           std::span<const GradCheckTarget> targets, double tolerance,
                           double h = 1e-5);

}  // namespace synthts::nn
