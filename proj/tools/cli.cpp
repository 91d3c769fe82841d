#include "cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <thread>

#include "synthts/baselines.hpp"
#include "synthts/checkpoint.hpp"
#include "synthts/dae.hpp"
#include "synthts/dataset_io.hpp"
#include "synthts/descriptive.hpp"
#include "synthts/error.hpp"
#include "synthts/format.hpp"
#include "synthts/market_data.hpp"
#include "synthts/pipeline.hpp"
#include "synthts/report.hpp"
#include "synthts/rng.hpp"
#include "synthts/stats.hpp"
#include "synthts/style_transfer.hpp"

namespace synthts::cli {

namespace fs = std::filesystem;

namespace {

std::string fmt3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

void require_file(const fs::path& p) {
  if (!fs::is_regular_file(p)) throw InvalidArgument("no such file: " + p.string());
}

unsigned resolve_threads(unsigned t) { return t ? t : std::max(1u, std::thread::hardware_concurrency()); }

ReturnMatrix raw_scale(const ReturnMatrix& m) { return m.normalized() ? denormalize(m) : m; }

void check_length(std::size_t arch_n, std::size_t data_n, const std::string& what) {
  if (arch_n != data_n)
    throw ShapeError("model input length " + std::to_string(arch_n) + " does not match " + what + " length " +
                     std::to_string(data_n));
}

fs::path summary_path(const fs::path& out) {
  return out.parent_path() / (out.stem().string() + ".summary.csv");
}

// ---- ingest ----------------------------------------------------------------

struct IngestOpts {
  std::string input, out, interval = "1m", pair;
  std::size_t window = 243, stride = 0;
  bool raw = false;
};

int cmd_ingest(const IngestOpts& o, std::ostream& out, std::ostream& err) {
  require_file(o.input);
  std::ifstream in(o.input, std::ios::binary);
  const TickParseResult parsed = parse_truefx(in);
  for (const auto& w : parsed.warnings) err << o.input << ":" << w.line << ": warning: " << w.message << '\n';
  if (!parsed.errors.empty()) {
    for (const auto& e : parsed.errors) err << o.input << ":" << e.line << ": " << e.message << '\n';
    throw FormatError(std::to_string(parsed.errors.size()) + " malformed line(s) in " + o.input);
  }
  std::set<std::string> pairs;
  for (const auto& t : parsed.records) pairs.insert(t.pair);
  if (pairs.empty()) throw InvalidArgument("no ticks in " + o.input);
  std::string pair = o.pair;
  if (pair.empty()) {
    if (pairs.size() > 1) throw InvalidArgument("input holds several pairs; choose one with --pair");
    pair = *pairs.begin();
  }
  std::vector<TickRecord> ticks;
  for (const auto& t : parsed.records)
    if (t.pair == pair) ticks.push_back(t);
  if (ticks.empty()) throw InvalidArgument("no ticks for pair " + pair);

  const auto interval = parse_interval(o.interval);
  const PricePath prices = resample(ticks, interval);
  const std::vector<double> returns = to_log_returns(prices);
  const std::size_t stride = o.stride ? o.stride : o.window;
  if (o.window < 2) throw InvalidArgument("--window must be >= 2");
  if (returns.size() < o.window)
    throw InvalidArgument("resampled series has " + std::to_string(returns.size()) +
                          " returns, fewer than --window " + std::to_string(o.window));
  const ReturnMatrix windows = window(returns, o.window, stride);
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < windows.rows(); ++i)
    if (!is_constant(windows.row(i))) keep.push_back(i);
  const std::size_t dropped = windows.rows() - keep.size();
  if (keep.empty()) throw InvalidArgument("every window is flat (zero variance); nothing to write");
  const ReturnMatrix kept = windows.select(keep);
  io::write_dataset(o.out, o.raw ? kept : normalize(kept),
                    {{"source", fs::path(o.input).filename().string()},
                     {"pair", pair},
                     {"interval", o.interval},
                     {"window", std::to_string(o.window)},
                     {"stride", std::to_string(stride)},
                     {"ticks", std::to_string(ticks.size())},
                     {"dropped_flat", std::to_string(dropped)}});
  out << "ticks=" << ticks.size() << " prices=" << prices.values.size() << " paths=" << keep.size()
      << " dropped_flat=" << dropped << '\n';
  return kOk;
}

// ---- simulate --------------------------------------------------------------

struct SimulateOpts {
  std::string model = "gbm", out;
  std::size_t paths = 1000, len = 2000, burn_in = 500;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  double mu = 0.0, sigma = 0.01, s0 = 1.0, dt = 1.0;
  double kappa = 0.1, vol_of_vol = 0.2, log_vol_mean = -4.6;
  double omega = 0.1, alpha = 0.1, beta = 0.8, h0 = 1.0;
};

int cmd_simulate(const SimulateOpts& o, std::ostream& out) {
  if (o.paths < 1) throw InvalidArgument("--paths must be >= 1");
  const GbmParams gbm{.mu = o.mu, .sigma = o.sigma, .s0 = o.s0, .n = o.len, .dt = o.dt};
  const unsigned threads = resolve_threads(o.threads);
  SimBatch b;
  if (o.model == "gbm") {
    b = simulate_gbm(gbm, o.paths, o.seed, threads);
  } else if (o.model == "gbm-sv") {
    b = simulate_gbm_stochvol({gbm, o.kappa, o.vol_of_vol, o.log_vol_mean}, o.paths, o.seed, threads);
  } else {
    b = simulate_garch({o.omega, o.alpha, o.beta, o.mu, o.len, o.h0, o.burn_in}, o.paths, o.seed, threads);
  }
  io::Metadata meta(b.params.begin(), b.params.end());
  meta["generator"] = b.generator;
  meta["seed"] = std::to_string(b.seed);
  io::write_dataset(o.out, b.returns, meta);
  out << "model=" << b.generator << " paths=" << b.returns.rows() << " len=" << b.returns.cols() << '\n';
  return kOk;
}

// ---- train / generate / transfer ------------------------------------------

struct TrainOpts {
  std::string data, out, history, arch;
  std::size_t epochs = 50, batch_size = 0;
  double lr = 3e-3, sigma_scale = 0.5, holdout = 0.0;
  std::uint64_t seed = 1, corruption_seed = 0;
  bool corruption_seed_set = false;
};

int cmd_train(const TrainOpts& o, std::ostream& out) {
  const io::Dataset d = io::read_dataset(o.data);
  const dae::DaeArchitecture arch =
      o.arch.empty() ? dae::DaeArchitecture::default_for(d.matrix.cols()) : dae::DaeArchitecture::parse(o.arch);
  check_length(arch.input_length, d.matrix.cols(), "dataset");
  dae::TrainConfig cfg{.epochs = o.epochs,
                       .lr = o.lr,
                       .batch_size = o.batch_size,
                       .corruption = {o.sigma_scale, o.corruption_seed_set ? o.corruption_seed : derive_seed(o.seed, 0, 3)},
                       .seed = o.seed,
                       .holdout_fraction = o.holdout};
  dae::DaeModel model = dae::build_model(arch, o.seed);
  const dae::TrainHistory hist = dae::train(model, d.matrix, cfg);
  io::save_checkpoint(model, o.out);

  std::string csv = "epoch,train_loss,eval_loss\n0,," + format_double(hist.initial_loss) + '\n';
  for (std::size_t e = 0; e < hist.train_loss.size(); ++e)
    csv += std::to_string(e + 1) + ',' + format_double(hist.train_loss[e]) + ',' + format_double(hist.eval_loss[e]) + '\n';
  const fs::path history = o.history.empty() ? fs::path(o.out + ".history.csv") : fs::path(o.history);
  io::write_file_atomic(history, csv);

  out << "checkpoint=" << o.out << " sha256=" << io::checkpoint_hash(o.out) << '\n'
      << "initial_loss=" << fmt3(hist.initial_loss)
      << " final_loss=" << fmt3(hist.eval_loss.empty() ? hist.initial_loss : hist.eval_loss.back()) << '\n';
  return kOk;
}

struct GenerateOpts {
  std::string model, data, out;
  std::size_t count = 1000;
  double sigma_scale = 0.5;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

int cmd_generate(const GenerateOpts& o, std::ostream& out) {
  require_file(o.model);
  const dae::DaeModel model = io::load_checkpoint(o.model);
  const io::Dataset d = io::read_dataset(o.data);
  check_length(model.arch.input_length, d.matrix.cols(), "dataset");
  const dae::Generated g = dae::generate(model, d.matrix, {o.sigma_scale, o.seed}, o.count, resolve_threads(o.threads));
  io::write_dataset(o.out, g.paths,
                    {{"source_rows", pipeline::format_index_list(g.source_rows)},
                     {"sigma_scale", format_double(o.sigma_scale)},
                     {"seed", std::to_string(o.seed)},
                     {"model_sha256", io::checkpoint_hash(o.model)}});
  out << "generated=" << g.paths.rows() << " len=" << g.paths.cols() << '\n';
  return kOk;
}

struct TransferOpts {
  std::string model, content, style_pool, out, style_weights = "0.5,0.5";
  style::StyleTransferConfig cfg;
  bool no_denormalize = false;
  unsigned threads = 1;
};

int cmd_transfer(TransferOpts o, std::ostream& out) {
  require_file(o.model);
  const dae::DaeModel model = io::load_checkpoint(o.model);
  const io::Dataset content = io::read_dataset(o.content);
  const io::Dataset pool_data = io::read_dataset(o.style_pool);
  check_length(model.arch.input_length, content.matrix.cols(), "content");
  check_length(model.arch.input_length, pool_data.matrix.cols(), "style pool");
  const auto w = io::split_doubles(o.style_weights);
  if (w.size() != 2) throw InvalidArgument("--style-weights needs two comma-separated values");
  o.cfg.layer_weights = {w[0], w[1]};
  o.cfg.denormalize = !o.no_denormalize;
  o.cfg.validate();
  const unsigned threads = resolve_threads(o.threads);
  const style::StylePool pool = style::build_style_pool(model, pool_data.matrix, threads);
  const style::TransferResult r = style::transfer(model, content.matrix, pool, o.cfg, threads);
  const auto& c = o.cfg;
  io::write_dataset(o.out, r.paths,
                    {{"style_index", pipeline::format_index_list(r.style_index)},
                     {"content_rows", [&] {
                        std::vector<std::size_t> idx(r.paths.rows());
                        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
                        return pipeline::format_index_list(idx);
                      }()},
                     {"match_loss", io::join_doubles(r.match_loss)},
                     {"initial_loss", io::join_doubles(r.initial_loss)},
                     {"final_loss", io::join_doubles(r.final_loss)},
                     {"final_content", io::join_doubles(r.final_content)},
                     {"final_style", io::join_doubles(r.final_style)},
                     {"alpha", format_double(c.alpha)},
                     {"beta", format_double(c.beta)},
                     {"style_weights", io::join_doubles(c.layer_weights)},
                     {"epochs", std::to_string(c.epochs)},
                     {"lr", format_double(c.lr)},
                     {"init_sigma", format_double(c.init_sigma)},
                     {"seed", std::to_string(c.seed)},
                     {"denormalized", c.denormalize ? "1" : "0"},
                     {"model_sha256", io::checkpoint_hash(o.model)}});
  std::size_t improved = 0;
  for (std::size_t i = 0; i < r.final_loss.size(); ++i) improved += r.final_loss[i] < r.initial_loss[i];
  out << "transferred=" << r.paths.rows() << " improved=" << improved << '\n';
  return kOk;
}

// ---- test ------------------------------------------------------------------

struct TestOpts {
  std::string dataset, suite, out, reference, pairing = "auto", label;
  std::size_t q = 2, max_lag = 20;
  bool normalized = false;
};

void print_summary(std::ostream& out, const BatchSummary& s) {
  out << s.path_type << ": " << s.statistic << " p = " << fmt3(s.p_mean) << " +/- " << fmt3(s.p_std)
      << ", reject rate " << fmt3(s.reject_rate) << " -> " << s.verdict() << '\n';
}

int cmd_test(const TestOpts& o, std::ostream& out) {
  const io::Dataset d = io::read_dataset(o.dataset);
  const ReturnMatrix m = o.normalized ? d.matrix : raw_scale(d.matrix);
  const std::string label = o.label.empty() ? fs::path(o.dataset).stem().string() : o.label;
  const fs::path out_path = o.out;
  std::string csv, summary;

  if (o.suite == "vr") {
    csv = "path_id,vr,z_homo,z_robust,p_value,reject\n";
    std::vector<double> p;
    std::vector<bool> rej;
    for (std::size_t i = 0; i < m.rows(); ++i) {
      const auto r = variance_ratio_test(m.row(i), o.q);
      csv += std::to_string(i) + ',' + format_double(r.vr) + ',' + format_double(r.z_homo) + ',' +
             format_double(r.z_robust) + ',' + format_double(r.p_value) + ',' + (r.reject_95 ? "1" : "0") + '\n';
      p.push_back(r.p_value);
      rej.push_back(r.reject_95);
    }
    const auto s = summarize(label, "variance ratio (q=" + std::to_string(o.q) + ")", p, rej);
    summary = report::summary_table_csv({s});
    print_summary(out, s);
  } else if (o.suite == "ks") {
    if (o.reference.empty()) throw InvalidArgument("ks suite needs --reference");
    const io::Dataset ref_data = io::read_dataset(o.reference);
    const ReturnMatrix ref = o.normalized ? ref_data.matrix : raw_scale(ref_data.matrix);
    bool rowwise = o.pairing == "rowwise";
    if (o.pairing == "auto") rowwise = ref.rows() == m.rows() && ref.cols() == m.cols();
    if (rowwise && ref.rows() != m.rows())
      throw InvalidArgument("rowwise pairing needs equal row counts (" + std::to_string(m.rows()) + " vs " +
                            std::to_string(ref.rows()) + ")");
    csv = "path_id,d_stat,p_value,reject\n";
    std::vector<double> p;
    std::vector<bool> rej;
    for (std::size_t i = 0; i < m.rows(); ++i) {
      const auto r = ks_two_sample(m.row(i), rowwise ? ref.row(i) : ref.data());
      csv += std::to_string(i) + ',' + format_double(r.d_stat) + ',' + format_double(r.p_value) + ',' +
             (r.reject_95 ? "1" : "0") + '\n';
      p.push_back(r.p_value);
      rej.push_back(r.reject_95);
    }
    const auto s = summarize(label, "Kolmogorov-Smirnov", p, rej);
    summary = report::summary_table_csv({s});
    print_summary(out, s);
  } else if (o.suite == "acf") {
    if (o.max_lag < 1 || o.max_lag >= m.cols()) throw InvalidArgument("--max-lag must lie in [1, path length)");
    csv = "path_id";
    for (std::size_t k = 1; k <= o.max_lag; ++k) csv += ",lag" + std::to_string(k);
    csv += '\n';
    for (std::size_t i = 0; i < m.rows(); ++i) csv += std::to_string(i) + ',' + io::join_doubles(acf(m.row(i), o.max_lag).values) + '\n';
    const AcfEnvelope env = acf_envelope(m, o.max_lag);
    summary = "lag,min,mean,max\n";
    for (std::size_t k = 0; k < o.max_lag; ++k)
      summary += std::to_string(k + 1) + ',' + format_double(env.min[k]) + ',' + format_double(env.mean[k]) + ',' +
                 format_double(env.max[k]) + '\n';
    out << label << ": lag-1 autocorrelation mean " << fmt3(env.mean[0]) << " range [" << fmt3(env.min[0]) << ", "
        << fmt3(env.max[0]) << "]\n";
  } else {
    csv = "mean,std,skew,kurtosis\n";
    std::array<std::vector<double>, 4> cols;
    for (std::size_t i = 0; i < m.rows(); ++i) {
      const auto s = moments(m.row(i));
      const std::array<double, 4> v{s.mean, s.std, s.skew, s.kurtosis};
      for (std::size_t c = 0; c < 4; ++c) cols[c].push_back(v[c]);
      csv += format_double(s.mean) + ',' + format_double(s.std) + ',' + format_double(s.skew) + ',' +
             format_double(s.kurtosis) + '\n';
    }
    static const char* names[] = {"mean", "std", "skew", "kurtosis"};
    summary = "statistic,mean,std\n";
    for (std::size_t c = 0; c < 4; ++c) {
      summary += std::string(names[c]) + ',' + format_double(sample_mean(cols[c])) + ',' +
                 format_double(sample_std(cols[c])) + '\n';
      out << label << ": " << names[c] << " " << fmt3(sample_mean(cols[c])) << " +/- " << fmt3(sample_std(cols[c]))
          << '\n';
    }
  }
  io::write_file_atomic(out_path, csv);
  io::write_file_atomic(summary_path(out_path), summary);
  return kOk;
}

// ---- report / demo ---------------------------------------------------------

struct ReportOpts {
  std::string run_dir, out_dir, overlay = "0";
  std::size_t triptych_row = 0, max_lag = 20;
};

int cmd_report(const ReportOpts& o, std::ostream& out) {
  if (!fs::is_directory(o.run_dir)) throw InvalidArgument("no such run directory: " + o.run_dir);
  const fs::path out_dir = o.out_dir.empty() ? fs::path(o.run_dir) / "report" : fs::path(o.out_dir);
  const auto files = pipeline::write_report(
      o.run_dir, out_dir, {pipeline::parse_index_list(o.overlay), o.triptych_row, o.max_lag});
  for (const auto& f : files) out << f.string() << '\n';
  return kOk;
}

struct DemoOpts {
  std::string out_dir = "demo_run";
  pipeline::DemoConfig cfg;
  unsigned threads = 1;
};

int cmd_demo(DemoOpts o, std::ostream& out) {
  o.cfg.threads = resolve_threads(o.threads);
  const auto m = pipeline::run_demo(o.cfg, o.out_dir);
  auto pf = [](bool b) { return b ? "pass" : "FAIL"; };
  auto share = [](std::size_t k, std::size_t n) { return fmt3(n ? double(k) / double(n) : 0.0); };
  out << "run directory: " << o.out_dir << '\n'
      << "(a) loss " << fmt3(m.initial_loss) << " -> " << fmt3(m.final_loss) << "  " << pf(m.loss_halved()) << '\n'
      << "(b) lag-1 sign agreement " << m.lag1_batches_matching << "/" << m.lag1_batches << "  " << pf(m.lag1_sign_ok())
      << '\n'
      << "(c) transfer improved " << share(m.rows_improved, m.rows) << "  " << pf(m.transfer_improves()) << '\n'
      << "(d) std within 25% and kurtosis closer " << share(m.rows_moments_ok, m.rows) << "  " << pf(m.moments_ok())
      << '\n'
      << "(e) KS transfer fail-to-reject " << share(m.rows_ks_transfer_fail, m.rows) << ", raw reject "
      << share(m.rows_ks_raw_reject, m.rows) << "  " << pf(m.ks_contrast_ok()) << '\n';
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Synthetic financial time series: ingest, simulate, train, generate, transfer, test, report",
               "synthts"};
  app.require_subcommand(1);

  IngestOpts ing;
  auto* s_ing = app.add_subcommand("ingest", "Tick CSV -> windowed log-return dataset");
  s_ing->add_option("--input", ing.input, "Tick file (PAIR,YYYYMMDD HH:MM:SS.mmm,BID,ASK)")->required();
  s_ing->add_option("--out", ing.out, "Output dataset CSV")->required();
  s_ing->add_option("--interval", ing.interval, "Resampling interval (500ms, 30s, 1m, 4h, 1d)")->capture_default_str();
  s_ing->add_option("--pair", ing.pair, "Currency pair to keep when the file holds several");
  s_ing->add_option("--window", ing.window, "Returns per path")->capture_default_str();
  s_ing->add_option("--stride", ing.stride, "Offset between windows (default: --window)");
  s_ing->add_flag("--raw", ing.raw, "Skip per-path normalization");

  SimulateOpts sim;
  auto* s_sim = app.add_subcommand("simulate", "Baseline random-walk paths");
  s_sim->add_option("--model", sim.model, "gbm | gbm-sv | garch")
      ->check(CLI::IsMember({"gbm", "gbm-sv", "garch"}))
      ->capture_default_str();
  s_sim->add_option("--out", sim.out, "Output dataset CSV")->required();
  s_sim->add_option("--paths", sim.paths)->capture_default_str();
  s_sim->add_option("--len", sim.len, "Returns per path")->capture_default_str();
  s_sim->add_option("--seed", sim.seed)->capture_default_str();
  s_sim->add_option("--threads", sim.threads, "Worker cap (0: all cores)")->capture_default_str();
  s_sim->add_option("--mu", sim.mu)->capture_default_str();
  s_sim->add_option("--sigma", sim.sigma)->capture_default_str();
  s_sim->add_option("--s0", sim.s0)->capture_default_str();
  s_sim->add_option("--dt", sim.dt)->capture_default_str();
  s_sim->add_option("--kappa", sim.kappa, "Log-volatility mean reversion (gbm-sv)")->capture_default_str();
  s_sim->add_option("--vol-of-vol", sim.vol_of_vol, "(gbm-sv)")->capture_default_str();
  s_sim->add_option("--log-vol-mean", sim.log_vol_mean, "(gbm-sv)")->capture_default_str();
  s_sim->add_option("--omega", sim.omega, "(garch)")->capture_default_str();
  s_sim->add_option("--alpha", sim.alpha, "(garch)")->capture_default_str();
  s_sim->add_option("--beta", sim.beta, "(garch)")->capture_default_str();
  s_sim->add_option("--h0", sim.h0, "Initial conditional variance (garch)")->capture_default_str();
  s_sim->add_option("--burn-in", sim.burn_in, "(garch)")->capture_default_str();

  TrainOpts tr;
  auto* s_tr = app.add_subcommand("train", "Train the denoising autoencoder");
  s_tr->add_option("--data", tr.data, "Normalized dataset CSV")->required();
  s_tr->add_option("--out", tr.out, "Checkpoint path")->required();
  s_tr->add_option("--history", tr.history, "Loss history CSV (default: <out>.history.csv)");
  s_tr->add_option("--arch", tr.arch, "Descriptor, e.g. n=243;enc=1:8:3:3,8:16:3:3,16:32:3:3");
  s_tr->add_option("--epochs", tr.epochs)->capture_default_str();
  s_tr->add_option("--lr", tr.lr)->capture_default_str();
  s_tr->add_option("--batch-size", tr.batch_size, "0: full batch")->capture_default_str();
  s_tr->add_option("--sigma-scale", tr.sigma_scale, "Corruption std as a multiple of the path std")
      ->capture_default_str();
  s_tr->add_option("--holdout", tr.holdout, "Trailing fraction held out for eval loss")->capture_default_str();
  s_tr->add_option("--seed", tr.seed)->capture_default_str();
  auto* corr_seed = s_tr->add_option("--corruption-seed", tr.corruption_seed, "Default: derived from --seed");

  GenerateOpts gen;
  auto* s_gen = app.add_subcommand("generate", "Corrupt-and-reconstruct paths with a trained model");
  s_gen->add_option("--model", gen.model, "Checkpoint")->required();
  s_gen->add_option("--data", gen.data, "Source dataset")->required();
  s_gen->add_option("--out", gen.out)->required();
  s_gen->add_option("--count", gen.count)->capture_default_str();
  s_gen->add_option("--sigma-scale", gen.sigma_scale)->capture_default_str();
  s_gen->add_option("--seed", gen.seed)->capture_default_str();
  s_gen->add_option("--threads", gen.threads)->capture_default_str();

  TransferOpts st;
  auto* s_st = app.add_subcommand("transfer", "Impose the style of the closest pool path on each content path");
  s_st->add_option("--model", st.model, "Checkpoint")->required();
  s_st->add_option("--content", st.content, "Content dataset (normalized)")->required();
  s_st->add_option("--style-pool", st.style_pool, "Style dataset (normalized, with stats)")->required();
  s_st->add_option("--out", st.out)->required();
  s_st->add_option("--alpha", st.cfg.alpha, "Content weight")->capture_default_str();
  s_st->add_option("--beta", st.cfg.beta, "Style weight")->capture_default_str();
  s_st->add_option("--style-weights", st.style_weights, "Per-layer style weights, sum 1")->capture_default_str();
  s_st->add_option("--epochs", st.cfg.epochs, "Adam steps per path")->capture_default_str();
  s_st->add_option("--lr", st.cfg.lr)->capture_default_str();
  s_st->add_option("--init-sigma", st.cfg.init_sigma)->capture_default_str();
  s_st->add_option("--seed", st.cfg.seed)->capture_default_str();
  s_st->add_flag("--no-denormalize", st.no_denormalize, "Keep outputs in normalized units");
  s_st->add_option("--threads", st.threads)->capture_default_str();

  TestOpts te;
  auto* s_te = app.add_subcommand("test", "Statistical suites over a dataset");
  s_te->add_option("--dataset", te.dataset)->required();
  s_te->add_option("--suite", te.suite, "vr | ks | acf | moments")
      ->required()
      ->check(CLI::IsMember({"vr", "ks", "acf", "moments"}));
  s_te->add_option("--out", te.out, "Per-path CSV; the summary goes to <stem>.summary.csv")->required();
  s_te->add_option("--reference", te.reference, "Reference dataset (ks)");
  s_te->add_option("--pairing", te.pairing, "ks pairing: rowwise | pooled | auto")
      ->check(CLI::IsMember({"auto", "rowwise", "pooled"}))
      ->capture_default_str();
  s_te->add_option("--q", te.q, "Variance ratio horizon")->capture_default_str();
  s_te->add_option("--max-lag", te.max_lag)->capture_default_str();
  s_te->add_option("--label", te.label, "Path type shown in the summary");
  s_te->add_flag("--normalized", te.normalized, "Test stored values instead of the raw return scale");

  ReportOpts rep;
  auto* s_rep = app.add_subcommand("report", "SVG and CSV figures from a run directory");
  s_rep->add_option("--run-dir", rep.run_dir)->required();
  s_rep->add_option("--out-dir", rep.out_dir, "Default: <run-dir>/report");
  s_rep->add_option("--overlay", rep.overlay, "Generated rows drawn over the ACF envelope")->capture_default_str();
  s_rep->add_option("--triptych-row", rep.triptych_row)->capture_default_str();
  s_rep->add_option("--max-lag", rep.max_lag)->capture_default_str();

  DemoOpts demo;
  auto* s_demo = app.add_subcommand("demo", "End-to-end run on the synthetic stand-in corpora");
  s_demo->add_option("--out-dir", demo.out_dir)->capture_default_str();
  s_demo->add_option("--seed", demo.cfg.seed, "Model seed")->capture_default_str();
  s_demo->add_option("--threads", demo.threads)->capture_default_str();
  s_demo->add_option("--train-epochs", demo.cfg.train.epochs)->capture_default_str();
  s_demo->add_option("--transfer-epochs", demo.cfg.transfer.epochs)->capture_default_str();
  s_demo->add_option("--generated", demo.cfg.generated)->capture_default_str();
  s_demo->add_option("--transferred", demo.cfg.transferred)->capture_default_str();

  std::vector<const char*> argv{"synthts"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }
  tr.corruption_seed_set = corr_seed->count() > 0;

  try {
    if (*s_ing) return cmd_ingest(ing, out, err);
    if (*s_sim) return cmd_simulate(sim, out);
    if (*s_tr) return cmd_train(tr, out);
    if (*s_gen) return cmd_generate(gen, out);
    if (*s_st) return cmd_transfer(st, out);
    if (*s_te) return cmd_test(te, out);
    if (*s_rep) return cmd_report(rep, out);
    if (*s_demo) return cmd_demo(demo, out);
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kUsage;
}

}  // namespace synthts::cli
