#include <cmath>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "support.hpp"
#include "tnet/errors.hpp"
#include "tnet/haze.hpp"

using namespace tnet;
using namespace tnet::testing;

namespace {

ImageBuffer random_image(int h, int w, std::uint64_t seed) {
  Rng rng(seed);
  ImageBuffer img(h, w);
  for (float& v : img.pixels) v = static_cast<float>(rng.uniform());
  return img;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_sources(const std::filesystem::path& dir, int count, int size) {
  std::filesystem::create_directories(dir);
  for (int i = 0; i < count; ++i) {
    write_png(dir / ("src" + std::to_string(i) + ".png"), procedural_scene(size, size, 100 + i));
  }
}

}  // namespace

TEST_CASE("transmission follows exp(-beta d)") {
  ScalarField d(1, 3);
  d.values = {0.0, 0.5, 1.0};
  const auto t = transmission_from_depth(d, 1.2);
  CHECK(t.values[0] == 1.0);
  CHECK(t.values[1] == doctest::Approx(std::exp(-0.6)).epsilon(1e-15));
  CHECK(t.values[2] == doctest::Approx(std::exp(-1.2)).epsilon(1e-15));
  CHECK_THROWS_AS(transmission_from_depth(d, -0.1), DomainError);
}

TEST_CASE("apply_haze matches the scattering model pointwise") {
  const auto clean = random_image(5, 4, 1);
  const auto depth = make_depth(DepthKind::SmoothNoise, 5, 4, 2);
  const auto s = apply_haze(clean, depth, 0.9, 0.8);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 4; ++x) {
      const double t = std::exp(-0.9 * depth.at(y, x));
      for (int c = 0; c < 3; ++c) {
        CHECK(s.hazy.at(y, x, c) == doctest::Approx(clean.at(y, x, c) * t + 0.8 * (1 - t)).epsilon(1e-6));
      }
    }
  CHECK_THROWS_AS(apply_haze(clean, depth, 0.9, 1.5), DomainError);
  CHECK_THROWS_AS(apply_haze(clean, make_depth(DepthKind::Ramp, 4, 4, 1), 0.9, 0.8), ShapeError);
}

TEST_CASE("invert_haze round trip and low-transmission flags") {
  const auto clean = random_image(8, 8, 3);
  ScalarField depth(8, 8, 0.3);
  depth.at(0, 0) = 4.0;  // t = exp(-4) < 0.05
  const auto s = apply_haze(clean, depth, 1.0, 0.9);
  const auto inv = invert_haze(s.hazy, depth, 1.0, 0.9);
  CHECK(inv.flagged_count == 1);
  CHECK(inv.flagged[0] == 1);
  for (int c = 0; c < 3; ++c) CHECK(inv.clean.at(0, 0, c) == s.hazy.at(0, 0, c));
  double worst = 0;
  for (std::size_t i = 3; i < clean.pixels.size(); ++i) {
    worst = std::max(worst, std::abs(static_cast<double>(inv.clean.pixels[i]) - clean.pixels[i]));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("depth maps are normalized and seeded") {
  for (auto kind : {DepthKind::Ramp, DepthKind::Radial, DepthKind::SmoothNoise}) {
    const auto a = make_depth(kind, 17, 23, 5);
    const auto b = make_depth(kind, 17, 23, 5);
    CHECK(a.values == b.values);
    const auto [lo, hi] = std::minmax_element(a.values.begin(), a.values.end());
    CHECK(*lo >= 0.0);
    CHECK(*hi <= 1.0);
    CHECK(parse_depth_kind(to_string(kind)) == kind);
  }
  CHECK_THROWS_AS(parse_depth_kind("fog"), ConfigError);
}

TEST_CASE("radial depth closed form") {
  const auto d = radial_depth(5, 9, 1.0, 2.0);
  const double far = std::hypot(4.0 - 1.0, 8.0 - 2.0);
  CHECK(d.at(1, 2) == 0.0);
  CHECK(d.at(4, 8) == doctest::Approx(1.0));
  CHECK(d.at(3, 5) == doctest::Approx(std::hypot(2.0, 3.0) / far));
}

TEST_CASE("dataset synthesis is deterministic and re-verifies") {
  const auto root = temp_dir("synth");
  write_sources(root / "clean", 3, 40);
  DatasetOptions o;
  o.clean_dir = root / "clean";
  o.out_dir = root / "a";
  o.count = 9;
  o.seed = 7;
  o.crop = 32;
  const auto entries = build_dataset(o);
  REQUIRE(entries.size() == 9);
  CHECK(entries[0].depth_kind == "ramp");
  CHECK(entries[1].depth_kind == "radial");
  CHECK(entries[2].depth_kind == "smooth-noise");
  for (const auto& e : entries) {
    CHECK(e.beta_s >= 0.4);
    CHECK(e.beta_s <= 1.6);
    CHECK(e.airlight >= 0.7);
    CHECK(e.airlight <= 1.0);
    CHECK(e.crop_w == 32);
    CHECK(verify_manifest_entry(o.out_dir, e) <= 1.0 / 255 + 1e-6);
  }
  CHECK(read_manifest(o.out_dir / kManifestName) == entries);

  o.out_dir = root / "b";
  build_dataset(o);
  CHECK(slurp(root / "a" / kManifestName) == slurp(root / "b" / kManifestName));
  CHECK(slurp(root / "a" / "hazy_00004.png") == slurp(root / "b" / "hazy_00004.png"));
}

TEST_CASE("manifest line field order") {
  ManifestEntry e;
  e.index = 3;
  e.clean_path = "clean_00003.png";
  e.hazy_path = "hazy_00003.png";
  e.depth_kind = "ramp";
  e.beta_s = 0.5;
  e.airlight = 0.75;
  e.seed = 11;
  const std::string line = manifest_line(e);
  CHECK(line.find("\"index\"") < line.find("\"clean_path\""));
  CHECK(line.find("\"beta_s\"") < line.find("\"airlight\""));
  CHECK(line.find("\"crop_x\"") < line.find("\"crop_h\""));
}

TEST_CASE("dataset option errors") {
  DatasetOptions o;
  o.count = 1;
  CHECK_NOTHROW(o.validate());
  o.beta_range = {1.0, 0.5};
  CHECK_THROWS_AS(o.validate(), ConfigError);
  o.beta_range = {0.4, 1.6};
  o.airlight_range = {0.7, 1.2};
  CHECK_THROWS_AS(o.validate(), ConfigError);
  o.airlight_range = {0.7, 1.0};
  o.count = 0;
  CHECK_THROWS_AS(o.validate(), ConfigError);
  o.count = 1;
  o.clean_dir = "/nonexistent/tnet";
  o.out_dir = temp_dir("synth_err");
  CHECK_THROWS_AS(build_dataset(o), IoError);
}
