#pragma once

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include <unistd.h>

#include "synthts/dataset_io.hpp"
#include "synthts/market_data.hpp"
#include "synthts/nn.hpp"
#include "synthts/rng.hpp"

namespace testutil {

inline std::vector<double> normals(std::size_t n, std::uint64_t seed, double sd = 1.0) {
  synthts::Rng rng(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = sd * rng.normal();
  return v;
}

inline synthts::nn::Tensor random_tensor(std::size_t b, std::size_t c, std::size_t n, std::uint64_t seed) {
  return synthts::nn::Tensor(b, c, n, normals(b * c * n, seed));
}

inline std::vector<double> ar1(std::size_t n, double phi, std::uint64_t seed) {
  synthts::Rng rng(seed);
  std::vector<double> v(n);
  double prev = 0.0;
  for (auto& x : v) x = prev = phi * prev + rng.normal();
  return v;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Tick file: `days` days of quotes every two minutes on a seeded random walk.
inline void write_tick_fixture(const std::filesystem::path& file, int days = 10, std::uint64_t seed = 5) {
  synthts::Rng rng(seed);
  std::vector<synthts::TickRecord> ticks;
  const std::int64_t start = synthts::parse_truefx_timestamp("20240101 00:00:00.000");
  double mid = 0.75;
  for (std::int64_t i = 0; i < days * 720; ++i) {
    mid *= std::exp(1e-4 * rng.normal());
    ticks.push_back({"AUD/USD", start + i * 120000, mid - 5e-5, mid + 5e-5});
  }
  synthts::io::write_file_atomic(file, synthts::serialize_truefx(ticks));
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("synthts_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace testutil
