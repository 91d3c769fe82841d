#include <doctest.h>

#include <cmath>
#include <ctime>
#include <numbers>
#include <sstream>

#include "helpers.hpp"
#include "synthts/descriptive.hpp"
#include "synthts/error.hpp"
#include "synthts/format.hpp"
#include "synthts/market_data.hpp"
#include "synthts/rng.hpp"

using namespace synthts;
using std::chrono::milliseconds;

namespace {

// Independent epoch conversion through the C library.
std::int64_t timegm_ms(int y, int mo, int d, int h, int mi, int s, int ms) {
  std::tm tm{};
  tm.tm_year = y - 1900;
  tm.tm_mon = mo - 1;
  tm.tm_mday = d;
  tm.tm_hour = h;
  tm.tm_min = mi;
  tm.tm_sec = s;
  return static_cast<std::int64_t>(timegm(&tm)) * 1000 + ms;
}

TickRecord tick(std::int64_t ts_ms, double bid) { return {"AUD/USD", ts_ms, bid, bid + 1e-4}; }

}  // namespace

TEST_SUITE("market_data") {
  TEST_CASE("rng streams are reproducible and distinct") {
    Rng a(42), b(42), c(43);
    for (int i = 0; i < 100; ++i) {
      const auto x = a.next_u64();
      CHECK(x == b.next_u64());
      CHECK(x != c.next_u64());
    }
    CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
    CHECK(derive_seed(1, 2, 3) != derive_seed(1, 3, 2));
    Rng u(7);
    for (int i = 0; i < 1000; ++i) {
      const double v = u.uniform();
      CHECK((v >= 0.0 && v < 1.0));
      CHECK(u.below(10) < 10u);
    }
  }

  TEST_CASE("format_double round-trips bit for bit") {
    Rng rng(3);
    for (int i = 0; i < 2000; ++i) {
      const double v = rng.normal() * std::pow(10.0, static_cast<int>(rng.below(40)) - 20);
      CHECK(parse_double(format_double(v)) == v);
    }
    CHECK(format_double(0.1) == "0.1");
    CHECK_THROWS_AS(parse_double("1.5x"), FormatError);
    CHECK_THROWS_AS(parse_double(""), FormatError);
  }

  TEST_CASE("truefx line parses with an independently computed epoch") {
    const auto r = parse_truefx(std::string_view("AUD/USD,20090501 00:00:00.000,0.73000,0.73010\n"));
    REQUIRE(r.records.size() == 1);
    CHECK(r.errors.empty());
    const auto& t = r.records[0];
    CHECK(t.pair == "AUD/USD");
    CHECK(t.timestamp_ms == 1241136000000LL);
    CHECK(t.timestamp_ms == timegm_ms(2009, 5, 1, 0, 0, 0, 0));
    CHECK(t.bid == 0.73);
    CHECK(t.ask == 0.7301);
  }

  TEST_CASE("timestamps agree with timegm across calendar edge cases") {
    struct D { int y, mo, d, h, mi, s, ms; };
    for (const D& d : {D{1970, 1, 1, 0, 0, 0, 0}, D{2000, 2, 29, 23, 59, 59, 999}, D{2016, 12, 31, 12, 30, 1, 5},
                       D{2100, 3, 1, 0, 0, 0, 1}, D{2024, 2, 29, 6, 7, 8, 90}}) {
      char text[32];
      std::snprintf(text, sizeof text, "%04d%02d%02d %02d:%02d:%02d.%03d", d.y, d.mo, d.d, d.h, d.mi, d.s, d.ms);
      const auto ms = parse_truefx_timestamp(text);
      CHECK(ms == timegm_ms(d.y, d.mo, d.d, d.h, d.mi, d.s, d.ms));
      CHECK(format_truefx_timestamp(ms) == text);
    }
    CHECK_THROWS(parse_truefx_timestamp("20090230 00:00:00.000"));
    CHECK_THROWS(parse_truefx_timestamp("20090501 24:00:00.000"));
  }

  TEST_CASE("empty stream gives no records") {
    const auto r = parse_truefx(std::string_view(""));
    CHECK(r.records.empty());
    CHECK(r.errors.empty());
  }

  TEST_CASE("a malformed line is reported with its number and neighbours survive") {
    const auto r = parse_truefx(std::string_view(
        "AUD/USD,20090501 00:00:00.000,0.73000,0.73010\n"
        "AUD/USD,garbage,0.7,0.7\n"
        "AUD/USD,20090501 00:00:01.000,0.73001,0.73011\n"));
    REQUIRE(r.errors.size() == 1);
    CHECK(r.errors[0].line == 2);
    REQUIRE(r.records.size() == 2);
    CHECK(r.records[1].bid == 0.73001);
  }

  TEST_CASE("CRLF, blank lines and backwards timestamps") {
    const auto r = parse_truefx(std::string_view(
        "AUD/USD,20090501 00:00:05.000,0.7,0.71\r\n\r\n"
        "AUD/USD,20090501 00:00:01.000,0.8,0.81\r\n"));
    CHECK(r.errors.empty());
    REQUIRE(r.records.size() == 2);
    REQUIRE(r.warnings.size() == 1);
    CHECK(r.warnings[0].line == 3);
    CHECK(r.records[0].ask == 0.71);
  }

  TEST_CASE("nonpositive prices are line errors") {
    const auto r = parse_truefx(std::string_view("AUD/USD,20090501 00:00:00.000,0,0.7\n"));
    CHECK(r.records.empty());
    CHECK(r.errors.size() == 1);
  }

  TEST_CASE("serialize then parse round-trips exactly") {
    Rng rng(9);
    std::vector<TickRecord> ticks;
    std::int64_t ts = timegm_ms(2015, 6, 1, 0, 0, 0, 0);
    for (int i = 0; i < 500; ++i) {
      ts += static_cast<std::int64_t>(rng.below(5000));
      const double bid = 0.7 + 0.01 * rng.uniform();
      ticks.push_back({i % 2 ? "AUD/USD" : "EUR/USD", ts, bid, bid + 1e-5 * rng.uniform()});
    }
    const auto r = parse_truefx(serialize_truefx(ticks));
    CHECK(r.errors.empty());
    CHECK(r.records == ticks);
  }

  TEST_CASE("resample carries the last observation forward") {
    const std::int64_t t0 = timegm_ms(2009, 5, 1, 0, 0, 0, 0);
    SUBCASE("hand-walked example") {
      const std::vector<TickRecord> ticks{tick(t0, 0.70), tick(t0 + 90'000, 0.71)};
      CHECK(resample(ticks, milliseconds(60'000)).values == std::vector<double>{0.70, 0.70, 0.71});
    }
    SUBCASE("ticks on boundaries map one to one") {
      const std::vector<TickRecord> ticks{tick(t0, 1), tick(t0 + 60'000, 2), tick(t0 + 120'000, 3)};
      CHECK(resample(ticks, milliseconds(60'000)).values == std::vector<double>{1, 2, 3});
    }
    SUBCASE("leading partial interval is dropped") {
      const std::vector<TickRecord> ticks{tick(t0 + 10'000, 1), tick(t0 + 70'000, 2), tick(t0 + 130'000, 3)};
      CHECK(resample(ticks, milliseconds(60'000)).values == std::vector<double>{1, 2, 3});
    }
    SUBCASE("gaps inherit the previous price") {
      const std::vector<TickRecord> ticks{tick(t0, 1), tick(t0 + 300'000, 2)};
      CHECK(resample(ticks, milliseconds(60'000)).values == std::vector<double>{1, 1, 1, 1, 1, 2});
    }
    SUBCASE("out-of-order input is ordered first") {
      const std::vector<TickRecord> ticks{tick(t0 + 60'000, 2), tick(t0, 1)};
      CHECK(resample(ticks, milliseconds(60'000)).values == std::vector<double>{1, 2});
    }
    SUBCASE("errors") {
      CHECK_THROWS_AS(resample({}, milliseconds(60'000)), InvalidArgument);
      const std::vector<TickRecord> one{tick(t0, 1)};
      CHECK_THROWS_AS(resample(one, milliseconds(60'000)), InvalidArgument);
    }
  }

  TEST_CASE("interval strings") {
    CHECK(parse_interval("500ms") == milliseconds(500));
    CHECK(parse_interval("30s") == milliseconds(30'000));
    CHECK(parse_interval("1m") == milliseconds(60'000));
    CHECK(parse_interval("4h") == milliseconds(4 * 3'600'000));
    CHECK(parse_interval("1d") == milliseconds(86'400'000));
    CHECK_THROWS(parse_interval("0s"));
    CHECK_THROWS(parse_interval("5x"));
  }

  TEST_CASE("log returns") {
    const auto e = to_log_returns(std::vector<double>{1.0, std::numbers::e});
    REQUIRE(e.size() == 1);
    CHECK(e[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(to_log_returns(std::vector<double>{2, 2, 2}) == std::vector<double>{0, 0});
    const auto d = to_log_returns(std::vector<double>{1, 2, 4});
    CHECK(std::abs(d[0] - 0.6931471805599453) < 1e-15);
    CHECK(std::abs(d[1] - 0.6931471805599453) < 1e-15);
    CHECK_THROWS_AS(to_log_returns(std::vector<double>{1, 0, 2}), InvalidArgument);
    CHECK_THROWS_AS(to_log_returns(std::vector<double>{1}), InvalidArgument);
  }

  TEST_CASE("prices rebuild from cumulative log returns") {
    Rng rng(5);
    std::vector<double> p{1.3};
    for (int i = 0; i < 999; ++i) p.push_back(p.back() * std::exp(0.01 * rng.normal()));
    const auto r = to_log_returns(p);
    double x = std::log(p[0]);
    for (std::size_t i = 0; i < r.size(); ++i) {
      x += r[i];
      CHECK(std::abs(std::exp(x) / p[i + 1] - 1.0) < 1e-9);
    }
  }

  TEST_CASE("window") {
    std::vector<double> r(10);
    for (int i = 0; i < 10; ++i) r[i] = i;
    const auto w = window(r, 4, 3);
    REQUIRE(w.rows() == 3);
    CHECK(w.at(0, 0) == 0);
    CHECK(w.at(1, 0) == 3);
    CHECK(w.at(2, 0) == 6);
    CHECK(w.at(2, 3) == 9);
    CHECK_FALSE(w.normalized());
    const auto whole = window(r, 10, 1);
    CHECK(whole.rows() == 1);
    CHECK(std::vector<double>(whole.row(0).begin(), whole.row(0).end()) == r);
    CHECK_THROWS_AS(window(r, 11, 1), InvalidArgument);
  }

  TEST_CASE("normalize") {
    const ReturnMatrix m(1, 2, {1.0, -1.0});
    const auto z = normalize(m);
    // n-1 divisor: std of [1, -1] is sqrt(2).
    CHECK(z.at(0, 0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
    CHECK(z.at(0, 1) == doctest::Approx(-1.0 / std::sqrt(2.0)).epsilon(1e-15));
    REQUIRE(z.norm_stats());
    CHECK((*z.norm_stats())[0].mean == 0.0);
    CHECK((*z.norm_stats())[0].std == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));

    CHECK_THROWS_WITH_AS(normalize(ReturnMatrix(2, 3, {1, 2, 3, 5, 5, 5})), doctest::Contains("row 1"),
                         InvalidArgument);

    const auto data = testutil::normals(20 * 50, 11, 0.003);
    const ReturnMatrix big(20, 50, data);
    const auto n1 = normalize(big);
    for (std::size_t i = 0; i < n1.rows(); ++i) {
      CHECK(std::abs(sample_mean(n1.row(i))) < 1e-9);
      CHECK(std::abs(sample_std(n1.row(i)) - 1.0) < 1e-6);
    }
    const auto n2 = normalize(n1);
    CHECK(testutil::max_abs_diff(n1.data(), n2.data()) < 1e-9);
    // Stats compose, so one denormalize undoes both passes.
    CHECK(testutil::max_abs_diff(denormalize(n2).data(), big.data()) < 1e-15);
  }

  TEST_CASE("corrupt") {
    const ReturnMatrix m = normalize(ReturnMatrix(4, 100, testutil::normals(400, 1)));
    CHECK(corrupt(m, {0.0, 5}) == m);
    CHECK(corrupt(m, {0.5, 5}) == corrupt(m, {0.5, 5}));
    CHECK_FALSE(corrupt(m, {0.5, 5}) == corrupt(m, {0.5, 6}));

    // Noise scale: one long normalized row, sigma_scale 0.5.
    const ReturnMatrix row = normalize(ReturnMatrix(1, 100'000, testutil::normals(100'000, 2)));
    const auto c = corrupt(row, {0.5, 77});
    std::vector<double> diff(100'000);
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = c.at(0, i) - row.at(0, i);
    CHECK(std::abs(sample_std(diff) - 0.5) < 0.01);

    // A flat row stays flat.
    const ReturnMatrix flat(1, 5, {2, 2, 2, 2, 2});
    CHECK(corrupt(flat, {0.5, 1}) == flat);
  }

  TEST_CASE("corruption noise is independent across rows") {
    const std::size_t rows = 64, cols = 10'000;
    const ReturnMatrix m = normalize(ReturnMatrix(rows, cols, testutil::normals(rows * cols, 4)));
    const auto c = corrupt(m, {0.5, 99});
    std::vector<std::vector<double>> noise(rows, std::vector<double>(cols));
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t j = 0; j < cols; ++j) noise[r][j] = c.at(r, j) - m.at(r, j);
    double worst = 0.0;
    for (std::size_t a = 0; a < rows; ++a)
      for (std::size_t b = a + 1; b < rows; ++b) {
        const double ma = sample_mean(noise[a]), mb = sample_mean(noise[b]);
        double sab = 0, saa = 0, sbb = 0;
        for (std::size_t j = 0; j < cols; ++j) {
          sab += (noise[a][j] - ma) * (noise[b][j] - mb);
          saa += (noise[a][j] - ma) * (noise[a][j] - ma);
          sbb += (noise[b][j] - mb) * (noise[b][j] - mb);
        }
        worst = std::max(worst, std::abs(sab / std::sqrt(saa * sbb)));
      }
    CHECK(worst < 0.05);
  }

  TEST_CASE("ReturnMatrix rejects non-finite data and bad shapes") {
    CHECK_THROWS_AS(ReturnMatrix(2, 2, {1, 2, 3}), ShapeError);
    const ReturnMatrix m(1, 3, {1, NAN, 3});
    CHECK_THROWS_WITH_AS(m.check_finite(), doctest::Contains("col 1"), InvalidArgument);
  }
}
