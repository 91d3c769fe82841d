#pragma once

#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace synthts {

struct TickRecord {
  std::string pair;
  std::int64_t timestamp_ms = 0;  // Unix epoch, UTC
  double bid = 0.0;
  double ask = 0.0;

  friend bool operator==(const TickRecord&, const TickRecord&) = default;
};

struct ParseIssue {
  std::size_t line = 0;  // 1-based
  std::string message;
};

/// Parser output: good records plus per-line errors (line dropped) and
/// warnings (line kept).
struct TickParseResult {
  std::vector<TickRecord> records;
  std::vector<ParseIssue> errors;
  std::vector<ParseIssue> warnings;
};

/// Parses `PAIR,YYYYMMDD HH:MM:SS.mmm,BID,ASK` lines (LF or CRLF, no header).
/// Blank lines are skipped.
TickParseResult parse_truefx(std::istream& in);
TickParseResult parse_truefx(std::string_view text);
std::string serialize_truefx(std::span<const TickRecord> ticks);

/// `YYYYMMDD HH:MM:SS.mmm` <-> epoch milliseconds (UTC).
std::int64_t parse_truefx_timestamp(std::string_view text);
std::string format_truefx_timestamp(std::int64_t epoch_ms);

struct PricePath {
  std::vector<double> values;
  std::chrono::milliseconds interval{0};
  std::string label;
};

/// Last-observation-carried-forward bid price on the UTC grid of multiples of
/// `interval`, from the first boundary at or after the first tick through the
/// first boundary at or after the last tick.
PricePath resample(std::span<const TickRecord> ticks, std::chrono::milliseconds interval);

/// Parses interval strings such as `500ms`, `30s`, `1m`, `4h`, `1d`.
std::chrono::milliseconds parse_interval(std::string_view text);

std::vector<double> to_log_returns(std::span<const double> prices);
inline std::vector<double> to_log_returns(const PricePath& path) { return to_log_returns(path.values); }

struct NormStats {
  double mean = 0.0;
  double std = 1.0;

  friend bool operator==(const NormStats&, const NormStats&) = default;
};

/// Row-major M x n matrix of log returns, one path per row.
class ReturnMatrix {
 public:
  ReturnMatrix() = default;
  ReturnMatrix(std::size_t rows, std::size_t cols);
  ReturnMatrix(std::size_t rows, std::size_t cols, std::vector<double> data,
               std::optional<std::vector<NormStats>> norm_stats = std::nullopt);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }
  std::span<const double> row(std::size_t i) const;
  std::span<double> row(std::size_t i);
  double at(std::size_t i, std::size_t j) const { return row(i)[j]; }

  bool normalized() const noexcept { return norm_stats_.has_value(); }
  const std::optional<std::vector<NormStats>>& norm_stats() const noexcept { return norm_stats_; }
  void set_norm_stats(std::optional<std::vector<NormStats>> stats);

  /// Throws InvalidArgument naming the first non-finite entry.
  void check_finite() const;

  /// Rows `indices` in order, with their norm stats.
  ReturnMatrix select(std::span<const std::size_t> indices) const;

  friend bool operator==(const ReturnMatrix&, const ReturnMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
  std::optional<std::vector<NormStats>> norm_stats_;
};

/// Consecutive length-n slices starting at multiples of `stride`; the partial
/// tail is dropped.
ReturnMatrix window(std::span<const double> returns, std::size_t n, std::size_t stride);

/// Per-row z-scoring (n-1 divisor). Stats compose with any existing ones so
/// denormalize() always maps back to the original scale.
ReturnMatrix normalize(const ReturnMatrix& m);
ReturnMatrix denormalize(const ReturnMatrix& m);

struct CorruptionSpec {
  double sigma_scale = 0.5;
  std::uint64_t seed = 0;
};

/// x + N(0, sigma_scale * sample_std(row)) per row. Row i draws from substream
/// derive_seed(seed, i).
ReturnMatrix corrupt(const ReturnMatrix& m, const CorruptionSpec& spec);

}  // namespace synthts
