#include "synthts/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

#include "synthts/baselines.hpp"
#include "synthts/checkpoint.hpp"
#include "synthts/dataset_io.hpp"
#include "synthts/descriptive.hpp"
#include "synthts/error.hpp"
#include "synthts/format.hpp"
#include "synthts/report.hpp"
#include "synthts/rng.hpp"
#include "synthts/stats.hpp"

namespace synthts::pipeline {

namespace fs = std::filesystem;

void CorpusParams::validate() const {
  if (windows < 1 || length < 2) throw InvalidArgument("corpus: need windows >= 1 and length >= 2");
  if (!(std::abs(phi) < 1.0)) throw InvalidArgument("corpus: |phi| must be < 1");
  if (!(alpha >= 0.0 && beta >= 0.0 && alpha + beta < 1.0))
    throw InvalidArgument("corpus: GARCH needs alpha, beta >= 0 and alpha + beta < 1");
  if (!(target_std > 0.0) || !std::isfinite(target_std)) throw InvalidArgument("corpus: target_std must be > 0");
}

CorpusParams hf_corpus_params(std::uint64_t seed) {
  return {.windows = 2000, .length = 243, .phi = -0.3, .alpha = 0.2, .beta = 0.75, .target_std = 3e-4,
          .burn_in = 1000, .seed = seed};
}

CorpusParams daily_corpus_params(std::uint64_t seed) {
  return {.windows = 400, .length = 243, .phi = 0.05, .alpha = 0.05, .beta = 0.85, .target_std = 5e-3,
          .burn_in = 1000, .seed = seed};
}

std::vector<double> synthetic_series(const CorpusParams& p) {
  p.validate();
  const double var_e = p.target_std * p.target_std * (1.0 - p.phi * p.phi);
  const double omega = var_e * (1.0 - p.alpha - p.beta);
  Rng rng(p.seed);
  const std::size_t total = p.windows * p.length;
  std::vector<double> out;
  out.reserve(total);
  double h = var_e, r = 0.0;
  for (std::size_t t = 0; t < p.burn_in + total; ++t) {
    const double e = std::sqrt(h) * rng.normal();
    r = p.phi * r + e;
    h = omega + p.alpha * e * e + p.beta * h;
    if (t >= p.burn_in) out.push_back(r);
  }
  return out;
}

ReturnMatrix synthetic_corpus(const CorpusParams& p) {
  return window(synthetic_series(p), p.length, p.length);
}

std::vector<std::size_t> parse_index_list(std::string_view text) {
  std::vector<std::size_t> out;
  if (trim(text).empty()) return out;
  for (auto tok : split(text, ',')) {
    const long long v = parse_int(trim(tok));
    if (v < 0) throw InvalidArgument("index list: negative entry '" + std::string(tok) + "'");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

std::string format_index_list(std::span<const std::size_t> values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(values[i]);
  }
  return out;
}

namespace {

ReturnMatrix raw_scale(const ReturnMatrix& m) { return m.normalized() ? denormalize(m) : m; }

BatchSummary vr_batch(const std::string& label, const ReturnMatrix& m) {
  std::vector<double> p(m.rows());
  std::vector<bool> rej(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto r = variance_ratio_test(m.row(i), 2);
    p[i] = r.p_value;
    rej[i] = r.reject_95;
  }
  return summarize(label, "variance ratio (q=2)", p, rej);
}

BatchSummary vr_single(const std::string& label, std::span<const double> series) {
  const auto r = variance_ratio_test(series, 2);
  return summarize(label, "variance ratio (q=2)", std::span<const double>(&r.p_value, 1), {r.reject_95});
}

struct KsBatch {
  BatchSummary summary;
  std::size_t rejected = 0;
};

KsBatch ks_batch(const std::string& label, const ReturnMatrix& m, std::span<const double> reference,
                 std::size_t rows) {
  rows = std::min(rows, m.rows());
  std::vector<double> p(rows);
  std::vector<bool> rej(rows);
  KsBatch out;
  for (std::size_t i = 0; i < rows; ++i) {
    const auto r = ks_two_sample(m.row(i), reference);
    p[i] = r.p_value;
    rej[i] = r.reject_95;
    out.rejected += r.reject_95;
  }
  out.summary = summarize(label, "Kolmogorov-Smirnov", p, rej);
  return out;
}

MomentSummary mean_moments(const ReturnMatrix& m) {
  MomentSummary acc;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto s = moments(m.row(i));
    acc.mean += s.mean;
    acc.std += s.std;
    acc.skew += s.skew;
    acc.kurtosis += s.kurtosis;
  }
  const double k = static_cast<double>(std::max<std::size_t>(m.rows(), 1));
  acc.mean /= k;
  acc.std /= k;
  acc.skew /= k;
  acc.kurtosis /= k;
  return acc;
}

class StageTimer {
 public:
  void mark(const std::string& stage) {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - last_).count();
    text_ += stage + "_seconds=" + format_double(s) + '\n';
    last_ = now;
  }
  const std::string& text() const { return text_; }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
  std::string text_;
};

}  // namespace

DemoMetrics run_demo(const DemoConfig& cfg, const fs::path& run_dir) {
  if (cfg.hf.length != cfg.daily.length) throw InvalidArgument("demo: corpora must share a window length");
  if (cfg.generated < cfg.transferred) throw InvalidArgument("demo: transferred rows exceed generated rows");
  if (cfg.generated_batches < 1 || cfg.generated % cfg.generated_batches != 0)
    throw InvalidArgument("demo: generated rows must split evenly into batches");
  cfg.train.validate();
  cfg.transfer.validate();
  fs::create_directories(run_dir);
  StageTimer timer;
  DemoMetrics met;

  // Corpora. The long raw series is kept for the single-path historical rows.
  const std::vector<double> hf_series = synthetic_series(cfg.hf);
  const std::vector<double> daily_series = synthetic_series(cfg.daily);
  const ReturnMatrix hf_raw = window(hf_series, cfg.hf.length, cfg.hf.length);
  const ReturnMatrix daily_raw = window(daily_series, cfg.daily.length, cfg.daily.length);
  const ReturnMatrix hf = normalize(hf_raw);
  const ReturnMatrix daily = normalize(daily_raw);
  io::write_dataset(run_dir / "hf_corpus.csv", hf,
                    {{"source", "synthetic-ar1-garch"}, {"seed", std::to_string(cfg.hf.seed)},
                     {"phi", format_double(cfg.hf.phi)}, {"alpha", format_double(cfg.hf.alpha)},
                     {"beta", format_double(cfg.hf.beta)}, {"target_std", format_double(cfg.hf.target_std)}});
  io::write_dataset(run_dir / "daily_corpus.csv", daily,
                    {{"source", "synthetic-ar1-garch"}, {"seed", std::to_string(cfg.daily.seed)},
                     {"phi", format_double(cfg.daily.phi)}, {"alpha", format_double(cfg.daily.alpha)},
                     {"beta", format_double(cfg.daily.beta)}, {"target_std", format_double(cfg.daily.target_std)}});
  timer.mark("corpus");

  // Train.
  dae::DaeModel model = dae::build_model(dae::DaeArchitecture::default_for(cfg.hf.length), cfg.seed);
  const dae::TrainHistory hist = dae::train(model, hf, cfg.train);
  io::save_checkpoint(model, run_dir / "model.ckpt");
  {
    std::string csv = "epoch,train_loss,eval_loss\n0,," + format_double(hist.initial_loss) + '\n';
    for (std::size_t e = 0; e < hist.train_loss.size(); ++e)
      csv += std::to_string(e + 1) + ',' + format_double(hist.train_loss[e]) + ',' + format_double(hist.eval_loss[e]) + '\n';
    io::write_file_atomic(run_dir / "loss_history.csv", csv);
  }
  met.initial_loss = hist.initial_loss;
  met.final_loss = hist.eval_loss.empty() ? hist.initial_loss : hist.eval_loss.back();
  timer.mark("train");

  // Generate.
  const dae::Generated gen = dae::generate(model, hf, cfg.generate_corruption, cfg.generated, cfg.threads);
  io::write_dataset(run_dir / "generated.csv", gen.paths,
                    {{"source_rows", format_index_list(gen.source_rows)},
                     {"sigma_scale", format_double(cfg.generate_corruption.sigma_scale)},
                     {"seed", std::to_string(cfg.generate_corruption.seed)}});
  timer.mark("generate");

  // Lag-1 sign agreement, batch by batch.
  {
    double corpus_sum = 0.0;
    for (std::size_t i = 0; i < hf.rows(); ++i) corpus_sum += acf(hf.row(i), 1).values[0];
    met.corpus_lag1 = corpus_sum / static_cast<double>(hf.rows());
    const std::size_t per = cfg.generated / cfg.generated_batches;
    met.lag1_batches = cfg.generated_batches;
    for (std::size_t b = 0; b < cfg.generated_batches; ++b) {
      double s = 0.0;
      for (std::size_t i = b * per; i < (b + 1) * per; ++i) s += acf(gen.paths.row(i), 1).values[0];
      if ((s > 0.0) == (met.corpus_lag1 > 0.0) && s != 0.0) ++met.lag1_batches_matching;
    }
  }

  // Style transfer on the first rows.
  std::vector<std::size_t> content_idx(cfg.transferred);
  std::iota(content_idx.begin(), content_idx.end(), 0);
  const ReturnMatrix content = gen.paths.select(content_idx);
  const style::StylePool pool = style::build_style_pool(model, daily, cfg.threads);
  timer.mark("style_pool");
  const style::TransferResult tr = style::transfer(model, content, pool, cfg.transfer, cfg.threads);
  {
    std::vector<double> match(tr.match_loss), init(tr.initial_loss), fin(tr.final_loss);
    io::write_dataset(run_dir / "transferred.csv", tr.paths,
                      {{"content_rows", format_index_list(content_idx)},
                       {"style_index", format_index_list(tr.style_index)},
                       {"match_loss", io::join_doubles(match)},
                       {"initial_loss", io::join_doubles(init)},
                       {"final_loss", io::join_doubles(fin)},
                       {"alpha", format_double(cfg.transfer.alpha)},
                       {"beta", format_double(cfg.transfer.beta)},
                       {"epochs", std::to_string(cfg.transfer.epochs)},
                       {"lr", format_double(cfg.transfer.lr)},
                       {"seed", std::to_string(cfg.transfer.seed)},
                       {"denormalized", cfg.transfer.denormalize ? "1" : "0"}});
  }
  timer.mark("transfer");

  // Per-row transfer metrics, all on the raw return scale.
  const ReturnMatrix content_raw = raw_scale(content);
  const ReturnMatrix transfer_raw = raw_scale(tr.paths);
  const ReturnMatrix style_raw = raw_scale(pool.paths.select(tr.style_index));
  met.rows = tr.paths.rows();
  for (std::size_t i = 0; i < met.rows; ++i) {
    if (tr.final_loss[i] < tr.initial_loss[i]) ++met.rows_improved;
    const auto mc = moments(content_raw.row(i));
    const auto ms = moments(style_raw.row(i));
    const auto mt = moments(transfer_raw.row(i));
    const bool std_ok = std::abs(mt.std / ms.std - 1.0) <= 0.25;
    const bool kurt_ok = std::abs(mt.kurtosis - ms.kurtosis) < std::abs(mc.kurtosis - ms.kurtosis);
    met.rows_std_ok += std_ok;
    met.rows_kurtosis_closer += kurt_ok;
    met.rows_moments_ok += std_ok && kurt_ok;
  }

  // Table 1: variance ratio.
  std::vector<BatchSummary> t1;
  const std::size_t n = cfg.hf.length;
  const std::size_t bp = cfg.baseline_paths;
  GbmParams gbm{.sigma = cfg.daily.target_std, .n = n};
  StochVolParams sv{.base = gbm, .log_vol_mean = std::log(cfg.daily.target_std)};
  GarchParams garch{.omega = cfg.daily.target_std * cfg.daily.target_std * 0.1, .alpha = 0.1, .beta = 0.8,
                    .n = n, .h0 = cfg.daily.target_std * cfg.daily.target_std};
  const SimBatch b_gbm = simulate_gbm(gbm, bp, derive_seed(cfg.seed, 1), cfg.threads);
  const SimBatch b_sv = simulate_gbm_stochvol(sv, bp, derive_seed(cfg.seed, 2), cfg.threads);
  const SimBatch b_garch = simulate_garch(garch, bp, derive_seed(cfg.seed, 3), cfg.threads);
  t1.push_back(vr_single("Historical High Frequency", hf_series));
  t1.push_back(vr_single("Historical Daily", daily_series));
  t1.push_back(vr_batch("GBM (Constant sigma)", b_gbm.returns));
  t1.push_back(vr_batch("GBM (Stochastic sigma)", b_sv.returns));
  t1.push_back(vr_batch("GARCH(1,1)", b_garch.returns));
  t1.push_back(vr_batch("Corrupted Historical Daily", corrupt(daily, {0.5, derive_seed(cfg.seed, 4)})));
  t1.push_back(vr_batch("DAE (High Frequency)", gen.paths));
  t1.push_back(vr_batch("DAE with Style Transfer", tr.paths));
  io::write_file_atomic(run_dir / "table1_vr.csv", report::summary_table_csv(t1));

  // Table 2: mean per-row moments of content, matched style and transfer.
  {
    const MomentSummary c = mean_moments(content_raw), s = mean_moments(style_raw), t = mean_moments(transfer_raw);
    std::string csv = "statistic,high_frequency,style,style_transfer\n";
    csv += "mean," + format_double(c.mean) + ',' + format_double(s.mean) + ',' + format_double(t.mean) + '\n';
    csv += "std," + format_double(c.std) + ',' + format_double(s.std) + ',' + format_double(t.std) + '\n';
    csv += "skew," + format_double(c.skew) + ',' + format_double(s.skew) + ',' + format_double(t.skew) + '\n';
    csv += "kurtosis," + format_double(c.kurtosis) + ',' + format_double(s.kurtosis) + ',' + format_double(t.kurtosis) + '\n';
    io::write_file_atomic(run_dir / "table2_moments.csv", csv);
  }

  // Table 3: each path against the pooled daily returns.
  {
    const std::span<const double> pooled = daily_raw.data();
    const std::size_t rows = met.rows;
    std::vector<BatchSummary> t3;
    t3.push_back(ks_batch("GBM (Constant sigma)", b_gbm.returns, pooled, rows).summary);
    t3.push_back(ks_batch("GBM (Stochastic sigma)", b_sv.returns, pooled, rows).summary);
    t3.push_back(ks_batch("GARCH(1,1)", b_garch.returns, pooled, rows).summary);
    const KsBatch raw = ks_batch("DAE (High Frequency)", content_raw, pooled, rows);
    const KsBatch st = ks_batch("DAE with Style Transfer", transfer_raw, pooled, rows);
    t3.push_back(raw.summary);
    t3.push_back(st.summary);
    met.rows_ks_raw_reject = raw.rejected;
    met.rows_ks_transfer_fail = rows - st.rejected;
    io::write_file_atomic(run_dir / "table3_ks.csv", report::summary_table_csv(t3));
  }
  timer.mark("tests");

  write_report(run_dir, run_dir / "report", {.overlay_rows = {0, 1, 2}, .triptych_row = 0, .max_lag = cfg.acf_lags});
  timer.mark("report");

  {
    auto frac = [&](std::size_t k, std::size_t of) { return format_double(of ? double(k) / double(of) : 0.0); };
    std::string csv = "metric,value,pass\n";
    csv += "initial_loss," + format_double(met.initial_loss) + ",\n";
    csv += "final_loss," + format_double(met.final_loss) + ',' + (met.loss_halved() ? "1" : "0") + '\n';
    csv += "corpus_lag1," + format_double(met.corpus_lag1) + ",\n";
    csv += "lag1_sign_share," + frac(met.lag1_batches_matching, met.lag1_batches) + ',' +
           (met.lag1_sign_ok() ? "1" : "0") + '\n';
    csv += "transfer_improved_share," + frac(met.rows_improved, met.rows) + ',' + (met.transfer_improves() ? "1" : "0") + '\n';
    csv += "std_within_25pct_share," + frac(met.rows_std_ok, met.rows) + ",\n";
    csv += "kurtosis_closer_share," + frac(met.rows_kurtosis_closer, met.rows) + ",\n";
    csv += "moments_share," + frac(met.rows_moments_ok, met.rows) + ',' + (met.moments_ok() ? "1" : "0") + '\n';
    csv += "ks_transfer_fail_share," + frac(met.rows_ks_transfer_fail, met.rows) + ",\n";
    csv += "ks_raw_reject_share," + frac(met.rows_ks_raw_reject, met.rows) + ',' + (met.ks_contrast_ok() ? "1" : "0") + '\n';
    io::write_file_atomic(run_dir / "metrics.csv", csv);
  }
  io::write_file_atomic(run_dir / "timing.txt", timer.text());
  return met;
}

std::vector<fs::path> write_report(const fs::path& run_dir, const fs::path& out_dir, const ReportOptions& opts) {
  for (const char* name : {"hf_corpus.csv", "daily_corpus.csv", "generated.csv", "transferred.csv"})
    if (!fs::exists(run_dir / name)) throw InvalidArgument("report: missing input " + (run_dir / name).string());
  const io::Dataset hf = io::read_dataset(run_dir / "hf_corpus.csv");
  const io::Dataset daily = io::read_dataset(run_dir / "daily_corpus.csv");
  const io::Dataset gen = io::read_dataset(run_dir / "generated.csv");
  const io::Dataset tr = io::read_dataset(run_dir / "transferred.csv");
  if (opts.max_lag < 1 || opts.max_lag >= hf.matrix.cols()) throw InvalidArgument("report: max_lag out of range");

  auto meta_list = [&](const io::Dataset& d, const char* key) {
    const auto it = d.meta.find(key);
    if (it == d.meta.end()) throw InvalidArgument(std::string("report: transferred.csv.meta lacks ") + key);
    return parse_index_list(it->second);
  };
  const auto style_index = meta_list(tr, "style_index");
  const auto content_rows = meta_list(tr, "content_rows");
  if (style_index.size() != tr.matrix.rows() || content_rows.size() != tr.matrix.rows())
    throw InvalidArgument("report: transferred metadata does not match its row count");

  fs::create_directories(out_dir);
  std::vector<fs::path> written;
  auto emit = [&](const std::string& name, const std::string& text) {
    io::write_file_atomic(out_dir / name, text);
    written.push_back(out_dir / name);
  };

  std::vector<std::pair<std::string, AcfResult>> gen_overlays, tr_overlays;
  for (std::size_t r : opts.overlay_rows) {
    if (r >= gen.matrix.rows()) throw InvalidArgument("report: overlay row " + std::to_string(r) + " out of range");
    gen_overlays.emplace_back("generated_" + std::to_string(r), acf(gen.matrix.row(r), opts.max_lag));
    if (r < tr.matrix.rows())
      tr_overlays.emplace_back("transferred_" + std::to_string(r), acf(tr.matrix.row(r), opts.max_lag));
  }
  const auto hf_fig = report::acf_figure("ACF range of high-frequency windows with generated paths",
                                         acf_envelope(hf.matrix, opts.max_lag), gen_overlays);
  emit("acf_envelope.svg", hf_fig.svg);
  emit("acf_envelope.csv", hf_fig.csv);
  const auto daily_fig = report::acf_figure("ACF range of daily windows with transferred paths",
                                            acf_envelope(daily.matrix, opts.max_lag), tr_overlays);
  emit("acf_style.svg", daily_fig.svg);
  emit("acf_style.csv", daily_fig.csv);

  const std::size_t t = opts.triptych_row;
  if (t >= tr.matrix.rows()) throw InvalidArgument("report: triptych row out of range");
  if (content_rows[t] >= gen.matrix.rows() || style_index[t] >= daily.matrix.rows())
    throw InvalidArgument("report: transferred metadata points outside its inputs");
  const ReturnMatrix content = raw_scale(gen.matrix.select(std::span(&content_rows[t], 1)));
  const ReturnMatrix style = raw_scale(daily.matrix.select(std::span(&style_index[t], 1)));
  const ReturnMatrix transfer = raw_scale(tr.matrix.select(std::span(&t, 1)));
  const auto trip = report::triptych_figure(content.row(0), style.row(0), transfer.row(0));
  emit("triptych.svg", trip.svg);
  emit("triptych.csv", trip.csv);
  return written;
}

}  // namespace synthts::pipeline
