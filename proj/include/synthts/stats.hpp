#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "synthts/market_data.hpp"

namespace synthts {

struct VrTestResult {
  std::size_t q = 2;
  double vr = 1.0;
  double z_homo = 0.0;
  double z_robust = 0.0;
  double p_value = 1.0;  // two-sided, from z_robust
  bool reject_95 = false;
};

/// Lo-MacKinlay variance ratio on a sequence of one-period log returns.
///
/// With T returns, mean mu = sum(r) / T:
///   var_1 = sum (r_t - mu)^2 / (T - 1)
///   var_q = sum_{t=q..T} (X_t - X_{t-q} - q mu)^2 / m,  m = q (T - q + 1) (1 - q / T)
/// where X is the cumulative log price. var_q is already per period, so
/// vr = var_q / var_1 (the overlapping q-difference variance over q var_1).
/// z_robust uses the heteroscedasticity-consistent asymptotic variance
///   theta = sum_{j=1..q-1} [2 (q - j) / q]^2 delta_j,
///   delta_j = T sum_{t>j} e_t^2 e_{t-j}^2 / (sum e_t^2)^2.
VrTestResult variance_ratio_test(std::span<const double> returns, std::size_t q = 2);

struct KsTestResult {
  double d_stat = 0.0;
  double p_value = 1.0;
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  bool reject_95 = false;
};

/// Survival function of the Kolmogorov distribution, P(K > lambda), from the
/// asymptotic series truncated at 100 terms.
double kolmogorov_survival(double lambda);

KsTestResult ks_two_sample(std::span<const double> a, std::span<const double> b);
/// One-sample test against a continuous CDF.
KsTestResult ks_one_sample(std::span<const double> sample, const std::function<double(double)>& cdf);

double normal_cdf(double x);

struct AcfResult {
  std::vector<std::size_t> lags;
  std::vector<double> values;
};

/// Sample autocorrelation at lags 1..max_lag with global mean and variance.
AcfResult acf(std::span<const double> x, std::size_t max_lag);

struct AcfEnvelope {
  std::vector<double> min;
  std::vector<double> max;
  std::vector<double> mean;
};

/// Elementwise min / max / mean of per-row ACFs.
AcfEnvelope acf_envelope(const ReturnMatrix& batch, std::size_t max_lag);

struct MomentSummary {
  double mean = 0.0;
  double std = 0.0;       // n-1 divisor
  double skew = 0.0;      // adjusted Fisher-Pearson G1
  double kurtosis = 0.0;  // excess, bias-adjusted G2
};

MomentSummary moments(std::span<const double> x);

/// Batch-level verdict: mean p +/- sample std across paths, and the share of
/// paths rejected at 95%. The batch verdict is "Reject" when more than half
/// of the paths reject.
struct BatchSummary {
  std::string path_type;
  std::string statistic;
  double p_mean = 0.0;
  double p_std = 0.0;
  double reject_rate = 0.0;
  bool reject = false;

  std::string verdict() const { return reject ? "Reject" : "Fail to Reject"; }
};

BatchSummary summarize(std::string path_type, std::string statistic,
                       std::span<const double> p_values, const std::vector<bool>& rejected);

}  // namespace synthts
