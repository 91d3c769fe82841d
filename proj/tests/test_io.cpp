#include <doctest.h>

#include <cmath>
#include <limits>

#include "helpers.hpp"
#include "synthts/checkpoint.hpp"
#include "synthts/dataset_io.hpp"
#include "synthts/error.hpp"

using namespace synthts;
using namespace synthts::io;
namespace fs = std::filesystem;

namespace {

ReturnMatrix awkward_matrix() {
  std::vector<double> v = testutil::normals(4 * 7, 1, 1e-4);
  v[0] = 0.1;
  v[1] = -0.0;
  v[2] = 5e-324;
  v[3] = std::numeric_limits<double>::max();
  v[4] = 1.0 / 3.0;
  return ReturnMatrix(4, 7, v);
}

dae::DaeModel trained_small_model() {
  auto m = dae::build_model(dae::DaeArchitecture::make(27, {1, 3, 4, 5}), 9);
  for (auto p : m.parameters())
    for (double& v : p) v += 1e-3 / 7.0;
  m.epochs_trained = 3;
  return m;
}

}  // namespace

TEST_SUITE("io") {
  TEST_CASE("dataset round trip is bit exact") {
    testutil::TempDir dir("io");
    const auto m = awkward_matrix();
    write_dataset(dir / "a.csv", m, {{"source", "unit"}, {"seed", "42"}});
    const auto back = read_dataset(dir / "a.csv");
    CHECK(back.matrix == m);
    CHECK(std::signbit(back.matrix.at(0, 1)));
    CHECK(back.meta.at("source") == "unit");
    CHECK(back.meta.at("seed") == "42");
    CHECK(fs::exists(sidecar_path(dir / "a.csv")));
  }

  TEST_CASE("normalization stats survive the round trip") {
    testutil::TempDir dir("io");
    auto raw = ReturnMatrix(3, 5, testutil::normals(15, 2, 0.01));
    const auto norm = normalize(raw);
    write_dataset(dir / "n.csv", norm);
    const auto back = read_dataset(dir / "n.csv");
    CHECK(back.matrix == norm);
    REQUIRE(back.matrix.norm_stats());
    CHECK(denormalize(back.matrix) == denormalize(norm));
  }

  TEST_CASE("writing is atomic and repeatable") {
    testutil::TempDir dir("io");
    const auto m = awkward_matrix();
    write_dataset(dir / "a.csv", m);
    const std::string first = read_file(dir / "a.csv");
    write_dataset(dir / "a.csv", m);
    CHECK(read_file(dir / "a.csv") == first);
    for (const auto& e : fs::directory_iterator(dir.path()))
      CHECK(e.path().filename().string().find(".tmp") == std::string::npos);
    write_file_atomic(dir / "x.txt", "hello");
    write_file_atomic(dir / "x.txt", "bye");
    CHECK(read_file(dir / "x.txt") == "bye");
  }

  TEST_CASE("malformed datasets") {
    testutil::TempDir dir("io");
    CHECK_THROWS_AS(read_dataset(dir / "missing.csv"), InvalidArgument);
    write_dataset(dir / "a.csv", awkward_matrix());
    auto text = read_file(dir / "a.csv");
    write_file_atomic(dir / "a.csv", text.substr(0, text.rfind('\n', text.size() - 2) + 1));
    CHECK_THROWS_AS(read_dataset(dir / "a.csv"), FormatError);
    write_file_atomic(dir / "b.csv", "path_id,step,value\n0,0,abc\n");
    CHECK_THROWS_AS(read_dataset(dir / "b.csv"), FormatError);
    CHECK_THROWS_AS(parse_metadata("no equals sign\n"), FormatError);
  }

  TEST_CASE("metadata text round trip") {
    const Metadata meta{{"a", "1"}, {"losses", "0.5,0.25"}, {"name", "x y"}};
    CHECK(parse_metadata(serialize_metadata(meta)) == meta);
    CHECK(split_doubles(join_doubles(std::vector<double>{0.1, -2.5, 1e300})) == std::vector<double>{0.1, -2.5, 1e300});
  }

  TEST_CASE("checkpoint round trip is bit identical") {
    testutil::TempDir dir("io");
    const auto m = trained_small_model();
    save_checkpoint(m, dir / "m.ckpt");
    const auto back = load_checkpoint(dir / "m.ckpt");
    CHECK(back.arch == m.arch);
    CHECK(back.epochs_trained == 3);
    const auto a = m.parameters(), b = back.parameters();
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
      CHECK(std::vector<double>(a[i].begin(), a[i].end()) == std::vector<double>(b[i].begin(), b[i].end()));
    CHECK(serialize_checkpoint(back) == serialize_checkpoint(m));
    CHECK(checkpoint_hash(dir / "m.ckpt").size() == 64);
    const auto x = testutil::random_tensor(2, 1, 27, 3);
    CHECK(dae::reconstruct(back, x) == dae::reconstruct(m, x));
  }

  TEST_CASE("sha256 reference digests") {
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  }

  TEST_CASE("truncated or edited checkpoints are rejected") {
    const auto text = serialize_checkpoint(trained_small_model());
    CHECK_THROWS_AS(parse_checkpoint(text.substr(0, text.size() - 20)), FormatError);
    try {
      parse_checkpoint(text.substr(0, text.size() / 2));
      FAIL("expected FormatError");
    } catch (const FormatError& e) {
      CHECK(std::string(e.what()).find("hash mismatch") != std::string::npos);
    }
    std::string edited = text;
    edited[edited.size() - 3] = edited[edited.size() - 3] == '1' ? '2' : '1';
    CHECK_THROWS_AS(parse_checkpoint(edited), FormatError);
    CHECK_THROWS_AS(parse_checkpoint("not a checkpoint\n"), FormatError);
  }

  TEST_CASE("unknown version is rejected") {
    std::string text = serialize_checkpoint(trained_small_model());
    const auto at = text.find("version=1");
    REQUIRE(at != std::string::npos);
    text.replace(at, 9, "version=99");
    try {
      parse_checkpoint(text);
      FAIL("expected FormatError");
    } catch (const FormatError& e) {
      CHECK(std::string(e.what()).find("version") != std::string::npos);
    }
  }

  TEST_CASE("architecture mismatch is a shape error") {
    testutil::TempDir dir("io");
    save_checkpoint(trained_small_model(), dir / "m.ckpt");
    CHECK_THROWS_AS(load_checkpoint(dir / "m.ckpt", dae::DaeArchitecture::default_for()), ShapeError);
    CHECK_NOTHROW(load_checkpoint(dir / "m.ckpt", dae::DaeArchitecture::make(27, {1, 3, 4, 5})));
  }
}
