#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "synthts/dae.hpp"
#include "synthts/market_data.hpp"
#include "synthts/style_transfer.hpp"

namespace synthts::pipeline {

/// Pseudo-historical returns: AR(1) mean with GARCH(1,1) innovations,
///   r_t = phi r_{t-1} + e_t,  e_t = sqrt(h_t) z_t,  h_{t+1} = omega + alpha e_t^2 + beta h_t,
/// with omega chosen so the stationary std of r is `target_std`.
struct CorpusParams {
  std::size_t windows = 2000;
  std::size_t length = 243;
  double phi = -0.3;
  double alpha = 0.2;
  double beta = 0.75;
  double target_std = 3e-4;
  std::size_t burn_in = 1000;
  std::uint64_t seed = 1;
  void validate() const;
};

/// Stand-ins for the high-frequency (heavy tails, strong mean reversion) and
/// daily (near-Gaussian, weak momentum) corpora.
CorpusParams hf_corpus_params(std::uint64_t seed);
CorpusParams daily_corpus_params(std::uint64_t seed);

/// One continuous series of windows * length returns.
std::vector<double> synthetic_series(const CorpusParams& p);
/// The series cut into consecutive non-overlapping windows, raw scale.
ReturnMatrix synthetic_corpus(const CorpusParams& p);

struct DemoConfig {
  std::uint64_t seed = 2024;
  CorpusParams hf = hf_corpus_params(11);
  CorpusParams daily = daily_corpus_params(12);
  dae::TrainConfig train{.epochs = 60, .lr = 3e-3, .batch_size = 100, .corruption = {0.5, 21}, .seed = 22};
  CorruptionSpec generate_corruption{0.5, 23};
  std::size_t generated = 1000;
  std::size_t generated_batches = 20;
  std::size_t transferred = 200;
  style::StyleTransferConfig transfer{};
  std::size_t baseline_paths = 1000;
  std::size_t acf_lags = 20;
  unsigned threads = 1;
};

/// Criterion-style outcome of one demo run.
struct DemoMetrics {
  double initial_loss = 0.0;
  double final_loss = 0.0;
  double corpus_lag1 = 0.0;
  std::size_t lag1_batches_matching = 0;
  std::size_t lag1_batches = 0;
  std::size_t rows_improved = 0;
  std::size_t rows_std_ok = 0;
  std::size_t rows_kurtosis_closer = 0;
  std::size_t rows_moments_ok = 0;  // both of the above
  std::size_t rows_ks_transfer_fail = 0;
  std::size_t rows_ks_raw_reject = 0;
  std::size_t rows = 0;

  bool loss_halved() const { return final_loss < 0.5 * initial_loss; }
  bool lag1_sign_ok() const { return lag1_batches > 0 && 5 * lag1_batches_matching >= 4 * lag1_batches; }
  bool transfer_improves() const { return rows > 0 && 100 * rows_improved >= 95 * rows; }
  bool moments_ok() const { return 2 * rows_moments_ok > rows; }
  bool ks_contrast_ok() const { return 2 * rows_ks_transfer_fail > rows && 2 * rows_ks_raw_reject > rows; }
};

/// Builds both corpora, trains, generates, transfers, runs every suite and
/// writes the run directory:
///   hf_corpus.csv, daily_corpus.csv, generated.csv, transferred.csv (+ .meta)
///   model.ckpt, loss_history.csv, table1_vr.csv, table2_moments.csv,
///   table3_ks.csv, metrics.csv, report/ (figures), timing.txt
/// Everything except timing.txt is a pure function of the config.
DemoMetrics run_demo(const DemoConfig& cfg, const std::filesystem::path& run_dir);

struct ReportOptions {
  std::vector<std::size_t> overlay_rows{0};  // generated rows drawn over the envelope
  std::size_t triptych_row = 0;              // transferred row shown in the triptych
  std::size_t max_lag = 20;
};

/// Figures from a run directory holding hf_corpus.csv, daily_corpus.csv,
/// generated.csv and transferred.csv:
///   acf_envelope.svg/.csv  HF envelope with generated overlays
///   acf_style.svg/.csv     daily envelope with transferred overlays
///   triptych.svg/.csv      content / style / transfer cumulative prices
/// Throws InvalidArgument naming the first missing input.
std::vector<std::filesystem::path> write_report(const std::filesystem::path& run_dir,
                                                const std::filesystem::path& out_dir,
                                                const ReportOptions& opts = {});

std::vector<std::size_t> parse_index_list(std::string_view text);
std::string format_index_list(std::span<const std::size_t> values);

}  // namespace synthts::pipeline
