#include "synthts/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "synthts/descriptive.hpp"
#include "synthts/error.hpp"
#include "synthts/simd/kernels.hpp"

namespace synthts {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

VrTestResult variance_ratio_test(std::span<const double> r, std::size_t q) {
  if (q < 2) throw InvalidArgument("variance ratio: q must be >= 2");
  const std::size_t T = r.size();
  if (T < 10 * q)
    throw InvalidArgument("variance ratio: need at least " + std::to_string(10 * q) +
                          " returns, got " + std::to_string(T));
  const double Td = static_cast<double>(T);
  const double qd = static_cast<double>(q);
  const double mu = sample_mean(r);

  std::vector<double> e(T);
  for (std::size_t t = 0; t < T; ++t) e[t] = r[t] - mu;
  const double sum_e2 = simd::dot(e, e);
  if (is_constant(r) || !(sum_e2 > 0.0)) throw InvalidArgument("variance ratio: zero variance of returns");
  const double var_1 = sum_e2 / (Td - 1.0);

  // Overlapping q-period sums of demeaned returns equal X_t - X_{t-q} - q mu.
  double window = 0.0;
  for (std::size_t t = 0; t < q; ++t) window += e[t];
  double sum_q2 = window * window;
  for (std::size_t t = q; t < T; ++t) {
    window += e[t] - e[t - q];
    sum_q2 += window * window;
  }
  const double m = qd * (Td - qd + 1.0) * (1.0 - qd / Td);
  const double var_q = sum_q2 / m;

  VrTestResult res;
  res.q = q;
  res.vr = var_q / var_1;
  const double excess = res.vr - 1.0;
  const double phi = 2.0 * (2.0 * qd - 1.0) * (qd - 1.0) / (3.0 * qd);
  res.z_homo = std::sqrt(Td) * excess / std::sqrt(phi);

  std::vector<double> e2(T);
  for (std::size_t t = 0; t < T; ++t) e2[t] = e[t] * e[t];
  double theta = 0.0;
  for (std::size_t j = 1; j < q; ++j) {
    const double cross = simd::dot(std::span<const double>(e2).subspan(j),
                                   std::span<const double>(e2).first(T - j));
    const double delta = Td * cross / (sum_e2 * sum_e2);
    const double w = 2.0 * (qd - static_cast<double>(j)) / qd;
    theta += w * w * delta;
  }
  res.z_robust = theta > 0.0 ? std::sqrt(Td) * excess / std::sqrt(theta) : 0.0;
  res.p_value = std::clamp(std::erfc(std::abs(res.z_robust) / std::numbers::sqrt2), 0.0, 1.0);
  res.reject_95 = res.p_value < 0.05;
  return res;
}

double kolmogorov_survival(double lambda) {
  constexpr int kTerms = 100;
  if (!(lambda > 0.0)) return 1.0;
  double p;
  if (lambda < 1.18) {
    // Jacobi-transformed series, fast for small lambda.
    const double pi2 = std::numbers::pi * std::numbers::pi;
    double cdf = 0.0;
    for (int k = 1; k <= kTerms; ++k) {
      const double odd = 2.0 * k - 1.0;
      cdf += std::exp(-odd * odd * pi2 / (8.0 * lambda * lambda));
    }
    cdf *= std::sqrt(2.0 * std::numbers::pi) / lambda;
    p = 1.0 - cdf;
  } else {
    p = 0.0;
    for (int k = 1; k <= kTerms; ++k) {
      const double term = std::exp(-2.0 * k * k * lambda * lambda);
      p += (k % 2 == 1 ? 2.0 : -2.0) * term;
    }
  }
  return std::clamp(p, 0.0, 1.0);
}

KsTestResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw InvalidArgument("ks_two_sample: empty sample");
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double n1 = static_cast<double>(x.size());
  const double n2 = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n1 - static_cast<double>(j) / n2));
  }
  KsTestResult res;
  res.d_stat = d;
  res.n1 = x.size();
  res.n2 = y.size();
  const double ne = n1 * n2 / (n1 + n2);
  res.p_value = kolmogorov_survival(std::sqrt(ne) * d);
  res.reject_95 = res.p_value < 0.05;
  return res;
}

KsTestResult ks_one_sample(std::span<const double> sample,
                           const std::function<double(double)>& cdf) {
  if (sample.empty()) throw InvalidArgument("ks_one_sample: empty sample");
  std::vector<double> x(sample.begin(), sample.end());
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  KsTestResult res;
  res.d_stat = d;
  res.n1 = x.size();
  res.p_value = kolmogorov_survival(std::sqrt(n) * d);
  res.reject_95 = res.p_value < 0.05;
  return res;
}

AcfResult acf(std::span<const double> x, std::size_t max_lag) {
  if (max_lag < 1) throw InvalidArgument("acf: max_lag must be >= 1");
  if (x.size() <= max_lag + 1)
    throw InvalidArgument("acf: sequence length " + std::to_string(x.size()) +
                          " too short for max_lag " + std::to_string(max_lag));
  const double mu = sample_mean(x);
  std::vector<double> c(x.size());
  for (std::size_t t = 0; t < x.size(); ++t) c[t] = x[t] - mu;
  const double denom = simd::dot(c, c);
  if (is_constant(x) || !(denom > 0.0)) throw InvalidArgument("acf: zero variance");
  AcfResult res;
  const std::span<const double> cs(c);
  for (std::size_t k = 1; k <= max_lag; ++k) {
    res.lags.push_back(k);
    res.values.push_back(simd::dot(cs.first(c.size() - k), cs.subspan(k)) / denom);
  }
  return res;
}

AcfEnvelope acf_envelope(const ReturnMatrix& batch, std::size_t max_lag) {
  if (batch.rows() < 2) throw InvalidArgument("acf_envelope: need at least 2 rows");
  AcfEnvelope env;
  env.min.assign(max_lag, 0.0);
  env.max.assign(max_lag, 0.0);
  env.mean.assign(max_lag, 0.0);
  for (std::size_t r = 0; r < batch.rows(); ++r) {
    AcfResult a;
    try {
      a = acf(batch.row(r), max_lag);
    } catch (const InvalidArgument& e) {
      throw InvalidArgument("acf_envelope: row " + std::to_string(r) + ": " + e.what());
    }
    for (std::size_t k = 0; k < max_lag; ++k) {
      const double v = a.values[k];
      env.min[k] = r == 0 ? v : std::min(env.min[k], v);
      env.max[k] = r == 0 ? v : std::max(env.max[k], v);
      env.mean[k] += v;
    }
  }
  for (double& v : env.mean) v /= static_cast<double>(batch.rows());
  // Summation rounding can push the mean a hair outside a degenerate band.
  for (std::size_t k = 0; k < max_lag; ++k) env.mean[k] = std::clamp(env.mean[k], env.min[k], env.max[k]);
  return env;
}

MomentSummary moments(std::span<const double> x) {
  if (x.size() < 4) throw InvalidArgument("moments: need at least 4 values");
  const double n = static_cast<double>(x.size());
  const double mu = sample_mean(x);
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double d = v - mu;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  if (is_constant(x) || !(m2 > 0.0)) throw InvalidArgument("moments: zero variance");
  MomentSummary s;
  s.mean = mu;
  s.std = std::sqrt(m2 * n / (n - 1.0));
  const double g1 = m3 / std::pow(m2, 1.5);
  const double g2 = m4 / (m2 * m2) - 3.0;
  s.skew = std::sqrt(n * (n - 1.0)) / (n - 2.0) * g1;
  s.kurtosis = ((n + 1.0) * g2 + 6.0) * (n - 1.0) / ((n - 2.0) * (n - 3.0));
  return s;
}

BatchSummary summarize(std::string path_type, std::string statistic,
                       std::span<const double> p_values, const std::vector<bool>& rejected) {
  if (p_values.empty() || p_values.size() != rejected.size())
    throw InvalidArgument("summarize: need matching, non-empty p-values and verdicts");
  BatchSummary s;
  s.path_type = std::move(path_type);
  s.statistic = std::move(statistic);
  s.p_mean = sample_mean(p_values);
  s.p_std = sample_std(p_values);
  const auto count = static_cast<double>(std::count(rejected.begin(), rejected.end(), true));
  s.reject_rate = count / static_cast<double>(rejected.size());
  s.reject = s.reject_rate > 0.5;
  return s;
}

}  // namespace synthts
