#include "synthts/baselines.hpp"

#include <cmath>

#include "synthts/error.hpp"
#include "synthts/format.hpp"
#include "synthts/parallel.hpp"
#include "synthts/rng.hpp"

namespace synthts {

void GbmParams::validate() const {
  if (!(sigma > 0.0)) throw InvalidArgument("gbm: sigma must be > 0");
  if (!(s0 > 0.0)) throw InvalidArgument("gbm: s0 must be > 0");
  if (n < 2) throw InvalidArgument("gbm: n must be >= 2");
  if (!(dt > 0.0)) throw InvalidArgument("gbm: dt must be > 0");
  if (!std::isfinite(mu)) throw InvalidArgument("gbm: mu must be finite");
}

void StochVolParams::validate() const {
  base.validate();
  if (!(vol_reversion > 0.0)) throw InvalidArgument("stochvol: kappa must be > 0");
  if (!(vol_of_vol >= 0.0)) throw InvalidArgument("stochvol: nu must be >= 0");
  if (!std::isfinite(log_vol_mean)) throw InvalidArgument("stochvol: theta must be finite");
}

void GarchParams::validate() const {
  if (!(omega > 0.0)) throw InvalidArgument("garch: omega must be > 0");
  if (!(alpha >= 0.0) || !(beta >= 0.0)) throw InvalidArgument("garch: alpha, beta must be >= 0");
  if (!(alpha + beta < 1.0))
    throw InvalidArgument("garch: alpha + beta must be < 1 (got " + format_double(alpha + beta) + ")");
  if (!(h0 > 0.0)) throw InvalidArgument("garch: h0 must be > 0");
  if (n < 2) throw InvalidArgument("garch: n must be >= 2");
}

namespace {

std::map<std::string, std::string> gbm_record(const GbmParams& p) {
  return {{"mu", format_double(p.mu)},
          {"sigma", format_double(p.sigma)},
          {"s0", format_double(p.s0)},
          {"n", std::to_string(p.n)},
          {"dt", format_double(p.dt)}};
}

}  // namespace

SimBatch simulate_gbm(const GbmParams& params, std::size_t paths, std::uint64_t seed,
                      unsigned threads) {
  params.validate();
  ReturnMatrix out(paths, params.n);
  const double drift = (params.mu - 0.5 * params.sigma * params.sigma) * params.dt;
  const double scale = params.sigma * std::sqrt(params.dt);
  parallel_for(paths, threads, [&](std::size_t p) {
    Rng rng(derive_seed(seed, p, 0));
    for (double& r : out.row(p)) r = drift + scale * rng.normal();
  });
  return {std::move(out), "gbm", seed, gbm_record(params)};
}

SimBatch simulate_gbm_stochvol(const StochVolParams& params, std::size_t paths, std::uint64_t seed,
                               unsigned threads) {
  params.validate();
  const GbmParams& b = params.base;
  ReturnMatrix out(paths, b.n);
  const double sqrt_dt = std::sqrt(b.dt);
  parallel_for(paths, threads, [&](std::size_t p) {
    Rng ret_rng(derive_seed(seed, p, 0));
    Rng vol_rng(derive_seed(seed, p, 1));
    double log_vol = params.log_vol_mean;
    for (double& r : out.row(p)) {
      log_vol = log_vol + params.vol_reversion * (params.log_vol_mean - log_vol) * b.dt +
                params.vol_of_vol * sqrt_dt * vol_rng.normal();
      const double sigma = std::exp(log_vol);
      r = (b.mu - 0.5 * sigma * sigma) * b.dt + sigma * sqrt_dt * ret_rng.normal();
    }
  });
  auto record = gbm_record(b);
  record["kappa"] = format_double(params.vol_reversion);
  record["nu"] = format_double(params.vol_of_vol);
  record["theta"] = format_double(params.log_vol_mean);
  return {std::move(out), "gbm-sv", seed, std::move(record)};
}

SimBatch simulate_garch(const GarchParams& params, std::size_t paths, std::uint64_t seed,
                        unsigned threads) {
  params.validate();
  ReturnMatrix out(paths, params.n);
  parallel_for(paths, threads, [&](std::size_t p) {
    Rng rng(derive_seed(seed, p, 0));
    auto row = out.row(p);
    double h = params.h0;
    for (std::size_t t = 0; t < params.burn_in + params.n; ++t) {
      const double eps = std::sqrt(h) * rng.normal();
      if (t >= params.burn_in) row[t - params.burn_in] = params.mu + eps;
      h = params.omega + params.alpha * eps * eps + params.beta * h;
    }
  });
  return {std::move(out),
          "garch",
          seed,
          {{"omega", format_double(params.omega)},
           {"alpha", format_double(params.alpha)},
           {"beta", format_double(params.beta)},
           {"mu", format_double(params.mu)},
           {"n", std::to_string(params.n)},
           {"h0", format_double(params.h0)},
           {"burn_in", std::to_string(params.burn_in)}}};
}

}  // namespace synthts
