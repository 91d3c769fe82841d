#include "synthts/market_data.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <sstream>

#include "synthts/descriptive.hpp"
#include "synthts/error.hpp"
#include "synthts/format.hpp"
#include "synthts/rng.hpp"

namespace synthts {

namespace {

int digits(std::string_view s, std::size_t pos, std::size_t count) {
  int v = 0;
  for (std::size_t i = pos; i < pos + count; ++i) {
    const char c = s[i];
    if (c < '0' || c > '9') throw FormatError("bad timestamp '" + std::string(s) + "'");
    v = v * 10 + (c - '0');
  }
  return v;
}

void expect(std::string_view s, std::size_t pos, char c) {
  if (s[pos] != c) throw FormatError("bad timestamp '" + std::string(s) + "'");
}

TickRecord parse_line(std::string_view line) {
  const auto fields = split(line, ',');
  if (fields.size() != 4)
    throw FormatError("expected 4 fields, got " + std::to_string(fields.size()));
  TickRecord rec;
  rec.pair = std::string(fields[0]);
  if (rec.pair.empty()) throw FormatError("empty pair");
  rec.timestamp_ms = parse_truefx_timestamp(fields[1]);
  rec.bid = parse_double(fields[2]);
  rec.ask = parse_double(fields[3]);
  if (!(rec.bid > 0.0) || !std::isfinite(rec.bid)) throw FormatError("bid must be positive");
  if (!(rec.ask > 0.0) || !std::isfinite(rec.ask)) throw FormatError("ask must be positive");
  return rec;
}

}  // namespace

std::int64_t parse_truefx_timestamp(std::string_view s) {
  // YYYYMMDD HH:MM:SS.mmm
  if (s.size() != 21) throw FormatError("bad timestamp '" + std::string(s) + "'");
  const int year = digits(s, 0, 4);
  const int month = digits(s, 4, 2);
  const int day = digits(s, 6, 2);
  expect(s, 8, ' ');
  const int hh = digits(s, 9, 2);
  expect(s, 11, ':');
  const int mm = digits(s, 12, 2);
  expect(s, 14, ':');
  const int ss = digits(s, 15, 2);
  expect(s, 17, '.');
  const int ms = digits(s, 18, 3);
  using namespace std::chrono;
  const year_month_day ymd{std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
                           std::chrono::day{static_cast<unsigned>(day)}};
  if (!ymd.ok() || hh > 23 || mm > 59 || ss > 59)
    throw FormatError("bad timestamp '" + std::string(s) + "'");
  const auto days = sys_days{ymd}.time_since_epoch().count();
  return ((static_cast<std::int64_t>(days) * 24 + hh) * 60 + mm) * 60000LL + ss * 1000LL + ms;
}

std::string format_truefx_timestamp(std::int64_t epoch_ms) {
  using namespace std::chrono;
  std::int64_t day = epoch_ms / 86400000LL;
  std::int64_t rem = epoch_ms % 86400000LL;
  if (rem < 0) {
    rem += 86400000LL;
    --day;
  }
  const year_month_day ymd{sys_days{days{day}}};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d%02u%02u %02d:%02d:%02d.%03d", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(rem / 3600000), static_cast<int>(rem / 60000 % 60),
                static_cast<int>(rem / 1000 % 60), static_cast<int>(rem % 1000));
  return buf;
}

TickParseResult parse_truefx(std::istream& in) {
  TickParseResult out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    try {
      TickRecord rec = parse_line(line);
      if (!out.records.empty() && rec.timestamp_ms < out.records.back().timestamp_ms)
        out.warnings.push_back({lineno, "timestamp goes backwards"});
      out.records.push_back(std::move(rec));
    } catch (const FormatError& e) {
      out.errors.push_back({lineno, e.what()});
    }
  }
  return out;
}

TickParseResult parse_truefx(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_truefx(in);
}

std::string serialize_truefx(std::span<const TickRecord> ticks) {
  std::string out;
  for (const auto& t : ticks) {
    out += t.pair;
    out += ',';
    out += format_truefx_timestamp(t.timestamp_ms);
    out += ',';
    out += format_double(t.bid);
    out += ',';
    out += format_double(t.ask);
    out += '\n';
  }
  return out;
}

std::chrono::milliseconds parse_interval(std::string_view text) {
  text = trim(text);
  std::size_t split_at = 0;
  while (split_at < text.size() && text[split_at] >= '0' && text[split_at] <= '9') ++split_at;
  if (split_at == 0) throw InvalidArgument("bad interval '" + std::string(text) + "'");
  const long long count = parse_int(text.substr(0, split_at));
  const auto unit = text.substr(split_at);
  long long scale = 0;
  if (unit == "ms") scale = 1;
  else if (unit == "s") scale = 1000;
  else if (unit == "m" || unit == "min") scale = 60'000;
  else if (unit == "h") scale = 3'600'000;
  else if (unit == "d") scale = 86'400'000;
  else throw InvalidArgument("bad interval unit '" + std::string(unit) + "'");
  if (count <= 0) throw InvalidArgument("interval must be positive");
  return std::chrono::milliseconds{count * scale};
}

PricePath resample(std::span<const TickRecord> input, std::chrono::milliseconds interval) {
  if (input.empty()) throw InvalidArgument("resample: no ticks");
  const std::int64_t step = interval.count();
  if (step <= 0) throw InvalidArgument("resample: interval must be positive");

  // The parser keeps out-of-order ticks, so order by time here. Stable, so
  // ties keep file order and the last quote at a timestamp wins.
  std::vector<TickRecord> sorted;
  std::span<const TickRecord> ticks = input;
  auto by_time = [](const TickRecord& a, const TickRecord& b) { return a.timestamp_ms < b.timestamp_ms; };
  if (!std::is_sorted(input.begin(), input.end(), by_time)) {
    sorted.assign(input.begin(), input.end());
    std::stable_sort(sorted.begin(), sorted.end(), by_time);
    ticks = sorted;
  }

  auto ceil_to = [step](std::int64_t t) {
    std::int64_t q = t / step;
    if (q * step < t) ++q;
    return q * step;
  };
  const std::int64_t first = ceil_to(ticks.front().timestamp_ms);
  const std::int64_t last = ceil_to(ticks.back().timestamp_ms);

  PricePath path;
  path.interval = interval;
  path.label = ticks.front().pair + " bid";
  std::size_t next = 0;
  double price = ticks.front().bid;
  for (std::int64_t b = first; b <= last; b += step) {
    while (next < ticks.size() && ticks[next].timestamp_ms <= b) price = ticks[next++].bid;
    path.values.push_back(price);
  }
  if (path.values.size() < 2)
    throw InvalidArgument("resample: fewer than 2 intervals (" + std::to_string(path.values.size()) +
                          ")");
  return path;
}

std::vector<double> to_log_returns(std::span<const double> prices) {
  if (prices.size() < 2) throw InvalidArgument("to_log_returns: need at least 2 prices");
  for (std::size_t i = 0; i < prices.size(); ++i)
    if (!(prices[i] > 0.0) || !std::isfinite(prices[i]))
      throw InvalidArgument("to_log_returns: nonpositive price at index " + std::to_string(i));
  std::vector<double> out(prices.size() - 1);
  for (std::size_t i = 0; i + 1 < prices.size(); ++i)
    out[i] = std::log(prices[i + 1]) - std::log(prices[i]);
  return out;
}

ReturnMatrix::ReturnMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

ReturnMatrix::ReturnMatrix(std::size_t rows, std::size_t cols, std::vector<double> data,
                           std::optional<std::vector<NormStats>> norm_stats)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_)
    throw ShapeError("ReturnMatrix: data size " + std::to_string(data_.size()) + " != " +
                     std::to_string(rows_) + "x" + std::to_string(cols_));
  set_norm_stats(std::move(norm_stats));
}

std::span<const double> ReturnMatrix::row(std::size_t i) const {
  if (i >= rows_) throw InvalidArgument("row index out of range");
  return std::span<const double>(data_).subspan(i * cols_, cols_);
}

std::span<double> ReturnMatrix::row(std::size_t i) {
  if (i >= rows_) throw InvalidArgument("row index out of range");
  return std::span<double>(data_).subspan(i * cols_, cols_);
}

void ReturnMatrix::set_norm_stats(std::optional<std::vector<NormStats>> stats) {
  if (stats && stats->size() != rows_)
    throw ShapeError("norm stats count " + std::to_string(stats->size()) + " != rows " +
                     std::to_string(rows_));
  norm_stats_ = std::move(stats);
}

void ReturnMatrix::check_finite() const {
  for (std::size_t k = 0; k < data_.size(); ++k)
    if (!std::isfinite(data_[k]))
      throw InvalidArgument("non-finite value at row " + std::to_string(k / cols_) + ", col " +
                            std::to_string(k % cols_));
}

ReturnMatrix ReturnMatrix::select(std::span<const std::size_t> indices) const {
  ReturnMatrix out(indices.size(), cols_);
  std::optional<std::vector<NormStats>> stats;
  if (norm_stats_) stats.emplace();
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const auto src = row(indices[r]);
    std::copy(src.begin(), src.end(), out.row(r).begin());
    if (stats) stats->push_back((*norm_stats_)[indices[r]]);
  }
  out.set_norm_stats(std::move(stats));
  return out;
}

ReturnMatrix window(std::span<const double> returns, std::size_t n, std::size_t stride) {
  if (n < 2) throw InvalidArgument("window: n must be >= 2");
  if (stride < 1) throw InvalidArgument("window: stride must be >= 1");
  if (returns.size() < n)
    throw InvalidArgument("window: " + std::to_string(returns.size()) +
                          " returns is fewer than window length " + std::to_string(n));
  const std::size_t count = (returns.size() - n) / stride + 1;
  std::vector<double> data;
  data.reserve(count * n);
  for (std::size_t r = 0; r < count; ++r)
    data.insert(data.end(), returns.begin() + static_cast<std::ptrdiff_t>(r * stride),
                returns.begin() + static_cast<std::ptrdiff_t>(r * stride + n));
  return ReturnMatrix(count, n, std::move(data));
}

ReturnMatrix normalize(const ReturnMatrix& m) {
  ReturnMatrix out = m;
  std::vector<NormStats> stats(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = out.row(r);
    const double mu = sample_mean(row);
    const double sd = sample_std(row);
    if (is_constant(row) || !(sd > 0.0) || !std::isfinite(sd))
      throw InvalidArgument("normalize: row " + std::to_string(r) + " has zero variance");
    for (double& v : row) v = (v - mu) / sd;
    if (m.norm_stats()) {
      const NormStats prev = (*m.norm_stats())[r];
      stats[r] = {prev.mean + prev.std * mu, prev.std * sd};
    } else {
      stats[r] = {mu, sd};
    }
  }
  out.set_norm_stats(std::move(stats));
  return out;
}

ReturnMatrix denormalize(const ReturnMatrix& m) {
  if (!m.norm_stats()) return m;
  ReturnMatrix out = m;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const NormStats s = (*m.norm_stats())[r];
    for (double& v : out.row(r)) v = v * s.std + s.mean;
  }
  out.set_norm_stats(std::nullopt);
  return out;
}

ReturnMatrix corrupt(const ReturnMatrix& m, const CorruptionSpec& spec) {
  if (!(spec.sigma_scale >= 0.0)) throw InvalidArgument("corrupt: sigma_scale must be >= 0");
  m.check_finite();
  ReturnMatrix out = m;
  if (spec.sigma_scale == 0.0) return out;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = out.row(r);
    const double sigma = spec.sigma_scale * sample_std(row);
    if (sigma == 0.0) continue;
    Rng rng(derive_seed(spec.seed, r));
    for (double& v : row) v += sigma * rng.normal();
  }
  return out;
}

}  // namespace synthts
