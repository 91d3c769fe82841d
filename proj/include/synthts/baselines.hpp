#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "synthts/market_data.hpp"

namespace synthts {

struct GbmParams {
  double mu = 0.0;
  double sigma = 0.01;
  double s0 = 1.0;
  std::size_t n = 2000;
  double dt = 1.0;

  void validate() const;
};

/// Exponential Ornstein-Uhlenbeck log-volatility:
///   log s_t = log s_{t-1} + kappa (theta - log s_{t-1}) dt + nu sqrt(dt) w_t
/// started at its long-run mean theta; step t's return uses s_t. base.sigma is
/// not used, so nu = 0 gives constant-sigma GBM with sigma = exp(theta).
struct StochVolParams {
  GbmParams base;
  double vol_reversion = 0.1;  // kappa
  double vol_of_vol = 0.2;     // nu
  double log_vol_mean = -4.6;  // theta

  void validate() const;
};

/// r_t = mu + sqrt(h_t) z_t,  h_{t+1} = omega + alpha (r_t - mu)^2 + beta h_t,
/// h_1 = h0, with `burn_in` leading steps discarded.
struct GarchParams {
  double omega = 0.1;
  double alpha = 0.1;
  double beta = 0.8;
  double mu = 0.0;
  std::size_t n = 2000;
  double h0 = 1.0;
  std::size_t burn_in = 500;

  void validate() const;
};

struct SimBatch {
  ReturnMatrix returns;
  std::string generator;
  std::uint64_t seed = 0;
  /// Full parameter record, written into the dataset sidecar.
  std::map<std::string, std::string> params;
};

// Path p draws its return noise from derive_seed(seed, p, 0); the stochastic
// volatility noise uses derive_seed(seed, p, 1). Rows are independent, so
// `threads` only changes wall time.
SimBatch simulate_gbm(const GbmParams& params, std::size_t paths, std::uint64_t seed,
                      unsigned threads = 1);
SimBatch simulate_gbm_stochvol(const StochVolParams& params, std::size_t paths, std::uint64_t seed,
                               unsigned threads = 1);
SimBatch simulate_garch(const GarchParams& params, std::size_t paths, std::uint64_t seed,
                        unsigned threads = 1);

}  // namespace synthts
