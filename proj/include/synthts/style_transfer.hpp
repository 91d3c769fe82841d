#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "synthts/dae.hpp"
#include "synthts/market_data.hpp"
#include "synthts/nn.hpp"

namespace synthts::style {

/// G[i][j] = sum_t F[i,t] F[j,t] for one path's (channels x length) feature map.
struct GramMatrix {
  std::size_t channels = 0;  // N_l
  std::size_t length = 0;    // M_l, kept for the loss normalization
  std::vector<double> values;

  double at(std::size_t i, std::size_t j) const { return values[i * channels + j]; }
};

/// `features` must hold a single sample.
GramMatrix gram(const nn::Tensor& features);

/// 0.5 * sum (F - P)^2 with gradient F - P.
nn::LossGrad content_loss(const nn::Tensor& features, const nn::Tensor& target);

struct StyleLossResult {
  double loss = 0.0;
  std::vector<nn::Tensor> grads;  // dLoss/dF_l, one per layer
};

/// sum_l w_l / (4 N_l^2 M_l^2) * sum (G_l - A_l)^2, with
/// dLoss/dF_l = w_l / (N_l^2 M_l^2) * (G_l - A_l) F_l.
StyleLossResult style_loss(std::span<const nn::Tensor> features, std::span<const GramMatrix> targets,
                           std::span<const double> weights);

/// Layer roles in the encoder: style = the first two, content = the deepest.
inline constexpr std::array<std::size_t, 2> kStyleLayers{0, 1};
std::size_t content_layer(const dae::DaeModel& model);

/// Candidate style paths with cached deep features and shallow Gram matrices.
struct StylePool {
  ReturnMatrix paths;                 // normalized rows, with stats for denormalization
  std::vector<nn::Tensor> content;    // deepest-layer features, one sample each
  std::vector<std::array<GramMatrix, 2>> grams;
  std::size_t size() const noexcept { return paths.rows(); }
};

StylePool build_style_pool(const dae::DaeModel& model, const ReturnMatrix& style_paths,
                           unsigned threads = 1);

struct MatchResult {
  std::size_t index = 0;
  std::vector<double> losses;  // content loss against every candidate
};

/// Lowest content loss between the candidates' and the content path's deepest
/// features; ties go to the lowest index.
MatchResult content_match(std::span<const double> content_path, const StylePool& pool,
                          const dae::DaeModel& model);
MatchResult content_match(const nn::Tensor& content_features, const StylePool& pool);

/// Exact dynamic-programming DTW with |a_i - b_j| local cost, no window.
double dtw_distance(std::span<const double> a, std::span<const double> b);

struct StyleTransferConfig {
  double alpha = 1.0;
  double beta = 10.0;
  std::array<double, 2> layer_weights{0.5, 0.5};
  std::size_t epochs = 300;  // K_ST
  double lr = 0.02;
  double init_sigma = 1.0;
  std::uint64_t seed = 1;
  bool denormalize = true;
  /// Start from the content path instead of noise (for checks only).
  bool init_from_content = false;

  void validate() const;
};

/// Combined objective alpha L_C + beta L_S for one candidate path and its
/// gradient with respect to that path.
struct Objective {
  double total = 0.0;
  double content = 0.0;
  double style = 0.0;
  std::vector<double> grad;
};

Objective transfer_objective(const dae::DaeModel& model, std::span<const double> path,
                             const nn::Tensor& content_target,
                             const std::array<GramMatrix, 2>& style_targets,
                             const StyleTransferConfig& cfg);

struct TransferResult {
  ReturnMatrix paths;  // denormalized to the matched style path unless disabled
  std::vector<std::size_t> style_index;
  std::vector<double> match_loss;      // content-matching loss of the chosen style
  std::vector<double> initial_loss;    // objective at the initialization
  std::vector<double> final_loss;      // objective after K_ST Adam steps
  std::vector<double> final_content;
  std::vector<double> final_style;
};

/// Row r initializes from derive_seed(cfg.seed, r). Rows are independent.
TransferResult transfer(const dae::DaeModel& model, const ReturnMatrix& content_batch,
                        const StylePool& pool, const StyleTransferConfig& cfg,
                        unsigned threads = 1);

}  // namespace synthts::style
