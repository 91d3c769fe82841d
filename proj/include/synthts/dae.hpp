#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "synthts/market_data.hpp"
#include "synthts/nn.hpp"

namespace synthts::dae {

struct LayerSpec {
  std::size_t in_channels = 1;
  std::size_t out_channels = 1;
  std::size_t kernel = 3;
  std::size_t stride = 3;

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

/// Encoder convolutions; the decoder mirrors them with transposed
/// convolutions in reverse order. A leaky rectifier follows every layer
/// except the final decoder layer.
struct DaeArchitecture {
  std::size_t input_length = 243;
  std::vector<LayerSpec> encoder;

  /// n = 243 (3^5), channels 1 -> 8 -> 16 -> 32, K = S = 3.
  static DaeArchitecture default_for(std::size_t n = 243);
  /// Same channel plan with explicit depth; used for small test instances.
  static DaeArchitecture make(std::size_t n, std::vector<std::size_t> channels,
                              std::size_t kernel = 3, std::size_t stride = 3);

  /// Throws ShapeError naming the first layer whose length does not divide.
  void validate() const;
  /// Output lengths of each encoder layer.
  std::vector<std::size_t> encoder_lengths() const;
  std::vector<LayerSpec> decoder() const;

  /// `n=243;enc=1:8:3:3,8:16:3:3,16:32:3:3`
  std::string descriptor() const;
  static DaeArchitecture parse(std::string_view descriptor);

  friend bool operator==(const DaeArchitecture&, const DaeArchitecture&) = default;
};

struct TrainConfig {
  std::size_t epochs = 50;
  double lr = 3e-3;
  std::size_t batch_size = 0;  // 0: full batch
  CorruptionSpec corruption{};
  std::uint64_t seed = 1;
  /// Trailing fraction of rows held out from updates and used for eval_loss.
  double holdout_fraction = 0.0;

  void validate() const;
};

struct DaeModel {
  DaeArchitecture arch;
  std::vector<nn::Conv1dLayer> encoder;
  std::vector<nn::ConvTranspose1dLayer> decoder;
  std::uint64_t seed = 0;
  std::size_t epochs_trained = 0;
  TrainConfig train_config{};

  /// Parameter views in a fixed order: enc0.w, enc0.b, ..., dec0.w, dec0.b, ...
  std::vector<std::span<double>> parameters();
  std::vector<std::span<const double>> parameters() const;
  std::vector<std::string> parameter_names() const;
  std::size_t parameter_count() const;
};

/// Weights ~ U(-a, a), a = sqrt(6 / (fan_in + fan_out)), fan = channels x K;
/// biases zero. Layer l draws from derive_seed(seed, l).
DaeModel build_model(const DaeArchitecture& arch, std::uint64_t seed);

/// Rows of a ReturnMatrix as a (rows, 1, n) tensor.
nn::Tensor to_tensor(const ReturnMatrix& m);
ReturnMatrix from_tensor(const nn::Tensor& t);

/// Forward activations of the encoder, kept for backpropagation.
struct EncoderTrace {
  nn::Tensor input;
  std::vector<nn::Tensor> pre;       // conv outputs
  std::vector<nn::Tensor> features;  // post-activation feature maps F_l
  const nn::Tensor& latent() const { return features.back(); }
};

struct DecoderTrace {
  nn::Tensor input;
  std::vector<nn::Tensor> pre;
  std::vector<nn::Tensor> outputs;  // post-activation, last one is the reconstruction
  const nn::Tensor& reconstruction() const { return outputs.back(); }
};

EncoderTrace encode(const DaeModel& model, const nn::Tensor& x);
DecoderTrace decode(const DaeModel& model, const nn::Tensor& z);
nn::Tensor reconstruct(const DaeModel& model, const nn::Tensor& x);

/// Gradient of the model parameters, in parameters() order.
struct ParamGrads {
  std::vector<std::vector<double>> groups;
  std::vector<std::span<const double>> views() const;
};

/// Backpropagate through the encoder. `feature_grads[l]` (possibly empty) is
/// dLoss/dF_l injected at layer l's output. Returns dLoss/dinput; encoder
/// parameter gradients are written to `param_grads` when non-null.
nn::Tensor encoder_backward(const DaeModel& model, const EncoderTrace& trace,
                            const std::vector<nn::Tensor>& feature_grads,
                            std::vector<std::vector<double>>* param_grads);

/// Denoising loss mean((Dec(Enc(corrupted)) - clean)^2) and its gradient.
struct DaeLoss {
  double loss = 0.0;
  ParamGrads grads;
};
DaeLoss dae_loss(const DaeModel& model, const nn::Tensor& corrupted, const nn::Tensor& clean);

struct TrainHistory {
  /// Mean denoising loss over the epoch's batches, fresh corruption each epoch.
  std::vector<double> train_loss;
  /// Denoising loss after the epoch on a fixed corruption of the held-out rows
  /// (or of the training rows when nothing is held out).
  std::vector<double> eval_loss;
  /// eval_loss measured before the first update.
  double initial_loss = 0.0;
};

/// Epoch e corrupts the training rows with derive_seed(cfg.corruption.seed, e);
/// mini-batch order is shuffled from derive_seed(cfg.seed, e, 1). The MSE
/// target is always the uncorrupted input.
TrainHistory train(DaeModel& model, const ReturnMatrix& data, const TrainConfig& cfg);

struct Generated {
  ReturnMatrix paths;  // renormalized per row; norm stats are the source rows'
  std::vector<std::size_t> source_rows;
};

/// Draws m_out source rows with replacement, corrupts each independently and
/// reconstructs. Row r's noise comes from derive_seed(spec.seed, r).
Generated generate(const DaeModel& model, const ReturnMatrix& data, const CorruptionSpec& spec,
                   std::size_t m_out, unsigned threads = 1);

}  // namespace synthts::dae
