#include <doctest.h>

#include <cmath>

#include "gradcheck_suite.hpp"
#include "helpers.hpp"
#include "synthts/dae.hpp"
#include "synthts/descriptive.hpp"
#include "synthts/error.hpp"
#include "synthts/pipeline.hpp"
#include "synthts/stats.hpp"

using namespace synthts;
using namespace synthts::dae;

namespace {

ReturnMatrix small_corpus(std::size_t windows, std::uint64_t seed) {
  auto p = pipeline::hf_corpus_params(seed);
  p.windows = windows;
  return normalize(pipeline::synthetic_corpus(p));
}

double lag1(std::span<const double> x) { return acf(x, 1).values[0]; }

}  // namespace

TEST_SUITE("dae") {
  TEST_CASE("default architecture shapes") {
    const auto arch = DaeArchitecture::default_for();
    CHECK(arch.input_length == 243);
    CHECK(arch.encoder_lengths() == std::vector<std::size_t>{81, 27, 9});
    const auto model = build_model(arch, 1);
    const auto tr = encode(model, testutil::random_tensor(2, 1, 243, 2));
    REQUIRE(tr.features.size() == 3);
    const std::size_t ch[]{8, 16, 32}, len[]{81, 27, 9};
    for (std::size_t l = 0; l < 3; ++l) {
      CHECK(tr.features[l].batch() == 2);
      CHECK(tr.features[l].channels() == ch[l]);
      CHECK(tr.features[l].length() == len[l]);
    }
    const auto dec = decode(model, tr.latent());
    CHECK(dec.reconstruction().same_shape(tr.input));
  }

  TEST_CASE("indivisible length names the failing layer") {
    try {
      DaeArchitecture::default_for(100).validate();
      FAIL("expected ShapeError");
    } catch (const ShapeError& e) {
      CHECK(std::string(e.what()).find("layer 0") != std::string::npos);
    }
    CHECK_THROWS_AS(build_model(DaeArchitecture::default_for(100), 1), ShapeError);
    CHECK_THROWS_AS(DaeArchitecture::make(243, {1, 8}).validate(), ShapeError);
  }

  TEST_CASE("descriptor round trip") {
    const auto a = DaeArchitecture::make(81, {1, 4, 6, 2});
    CHECK(DaeArchitecture::parse(a.descriptor()) == a);
    CHECK(DaeArchitecture::default_for().descriptor() == "n=243;enc=1:8:3:3,8:16:3:3,16:32:3:3");
  }

  TEST_CASE("initialization is seeded") {
    const auto arch = DaeArchitecture::default_for();
    const auto a = build_model(arch, 5), b = build_model(arch, 5), c = build_model(arch, 6);
    CHECK(a.encoder[0].weight == b.encoder[0].weight);
    CHECK(a.decoder[2].weight == b.decoder[2].weight);
    CHECK(a.encoder[0].weight != c.encoder[0].weight);
    for (double v : a.encoder[1].bias) CHECK(v == 0.0);
    const double bound = std::sqrt(6.0 / (8 * 3 + 16 * 3));
    for (double v : a.encoder[1].weight) CHECK(std::abs(v) <= bound);
  }

  TEST_CASE("zero input has a zero latent; identical rows share a latent") {
    const auto model = build_model(DaeArchitecture::default_for(), 3);
    const auto zero = encode(model, nn::Tensor(1, 1, 243));
    for (double v : zero.latent().data()) CHECK(v == 0.0);
    const auto row = testutil::normals(243, 4);
    std::vector<double> two(row);
    two.insert(two.end(), row.begin(), row.end());
    const auto z = encode(model, nn::Tensor(2, 1, 243, two)).latent();
    CHECK(testutil::max_abs_diff(z.sample(0), z.sample(1)) == 0.0);
  }

  TEST_CASE("zero learning rate leaves weights and eval loss fixed") {
    auto model = build_model(DaeArchitecture::default_for(), 7);
    const auto before = model.encoder[0].weight;
    const auto data = small_corpus(40, 8);
    const auto hist = train(model, data, {.epochs = 4, .lr = 0.0, .batch_size = 10, .corruption = {0.5, 1}, .seed = 2});
    CHECK(model.encoder[0].weight == before);
    REQUIRE(hist.eval_loss.size() == 4);
    for (double v : hist.eval_loss) CHECK(v == hist.initial_loss);
  }

  TEST_CASE("training on mean-reverting windows halves the loss and is reproducible") {
    const auto data = small_corpus(300, 9);
    const TrainConfig cfg{.epochs = 50, .lr = 3e-3, .batch_size = 50, .corruption = {0.5, 3}, .seed = 4};
    auto m1 = build_model(DaeArchitecture::default_for(), 10);
    auto m2 = build_model(DaeArchitecture::default_for(), 10);
    const auto h1 = train(m1, data, cfg);
    const auto h2 = train(m2, data, cfg);
    REQUIRE(h1.train_loss.size() == 50);
    MESSAGE("train loss " << h1.train_loss.front() << " -> " << h1.train_loss.back());
    CHECK(h1.train_loss.back() < 0.5 * h1.train_loss.front());
    CHECK(h1.eval_loss.back() < 0.5 * h1.initial_loss);
    CHECK(h1.train_loss == h2.train_loss);
    CHECK(m1.decoder[0].weight == m2.decoder[0].weight);
    CHECK(m1.epochs_trained == 50);

    SUBCASE("generated paths keep the sign of the lag-1 autocorrelation") {
      const auto gen = generate(m1, data, {0.5, 11}, 200);
      double src = 0.0, out = 0.0;
      for (std::size_t i = 0; i < data.rows(); ++i) src += lag1(data.row(i));
      for (std::size_t i = 0; i < gen.paths.rows(); ++i) out += lag1(gen.paths.row(i));
      CHECK(src < 0.0);
      CHECK(out < 0.0);
    }
  }

  TEST_CASE("generation without noise is the renormalized reconstruction") {
    const auto data = small_corpus(20, 12);
    const auto model = build_model(DaeArchitecture::default_for(), 13);
    const auto gen = generate(model, data, {0.0, 1}, 30);
    REQUIRE(gen.paths.rows() == 30);
    for (std::size_t r = 0; r < 30; ++r) {
      const auto src = data.row(gen.source_rows[r]);
      const auto y = reconstruct(model, nn::Tensor(1, 1, 243, std::vector<double>(src.begin(), src.end())));
      const double mu = sample_mean(y.data()), sd = sample_std(y.data());
      for (std::size_t j = 0; j < 243; ++j) CHECK(gen.paths.at(r, j) == (y.data()[j] - mu) / sd);
    }
    REQUIRE(gen.paths.norm_stats());
    CHECK((*gen.paths.norm_stats())[3] == (*data.norm_stats())[gen.source_rows[3]]);
  }

  TEST_CASE("generation seeds, oversampling and thread invariance") {
    const auto data = small_corpus(50, 14);
    const auto model = build_model(DaeArchitecture::default_for(), 15);
    const auto a = generate(model, data, {0.5, 1}, 64, 1);
    CHECK(a.paths == generate(model, data, {0.5, 1}, 64, 3).paths);
    CHECK_FALSE(a.paths == generate(model, data, {0.5, 2}, 64).paths);
    const auto big = generate(model, data, {0.5, 3}, 1000);
    CHECK(big.paths.rows() == 1000);
    for (std::size_t s : big.source_rows) CHECK(s < 50);
    CHECK_THROWS_AS(generate(model, data, {0.5, 1}, 0), InvalidArgument);
  }

  TEST_CASE("length mismatch is a shape error") {
    const auto model = build_model(DaeArchitecture::default_for(), 1);
    const auto p = [] {
      auto c = pipeline::hf_corpus_params(1);
      c.windows = 4;
      c.length = 81;
      return normalize(pipeline::synthetic_corpus(c));
    }();
    CHECK_THROWS_AS(generate(model, p, {0.5, 1}, 2), ShapeError);
    auto m = model;
    CHECK_THROWS_AS(train(m, p, {}), ShapeError);
  }

  TEST_CASE("finite-difference sweep over the full denoising loss") {
    const auto s = gcsuite::check_dae_loss(77, 25);
    MESSAGE("redraws " << s.redraws << " worst " << s.worst);
    CHECK(s.worst < 1e-4);
  }
}
