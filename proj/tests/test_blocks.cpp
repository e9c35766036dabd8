#include "doctest.h"
#include "support.hpp"
#include "tnet/blocks.hpp"
#include "tnet/errors.hpp"

using namespace tnet;
using namespace tnet::testing;

namespace {

// RDB written with plain loops: dense growth convs, 1x1 projection, residual.
Tensor<double> naive_rdb(const Tensor<double>& x, const RdbParams<double>& p) {
  std::vector<Tensor<double>> features{x};
  for (std::size_t l = 0; l + 1 < p.convs.size(); ++l) {
    features.push_back(naive_relu(naive_conv2d(naive_concat(features), p.convs[l].weight.value(),
                                               p.convs[l].bias.value(), 1, 1)));
  }
  auto local = naive_conv2d(naive_concat(features), p.convs.back().weight.value(),
                            p.convs.back().bias.value(), 1, 0);
  for (std::size_t i = 0; i < local.size(); ++i) local[i] += x[i];
  return local;
}

void randomize(Var<double> v, std::uint64_t seed, double scale = 0.3) {
  v.mutable_value() = random_tensor<double>(v.shape(), seed, -scale, scale);
}

}  // namespace

TEST_CASE("RDB parameter layout") {
  ParameterStore<float> store;
  Rng rng(1);
  const auto p = make_rdb(store, "r", RdbSpec{8, 16, 5}, rng);
  REQUIRE(p.convs.size() == 5);
  CHECK(p.convs[0].weight.shape() == Shape{16, 8, 3, 3});
  CHECK(p.convs[3].weight.shape() == Shape{16, 56, 3, 3});
  CHECK(p.convs[4].weight.shape() == Shape{8, 72, 1, 1});
  CHECK(store.find("r.conv0.weight").ptr() != nullptr);
  CHECK(store.find("r.fuse.bias").ptr() != nullptr);
  CHECK_THROWS_AS(make_rdb(store, "q", RdbSpec{8, 16, 1}, rng), ConfigError);
  CHECK_THROWS_AS(make_rdb(store, "r", RdbSpec{8, 16, 5}, rng), ConfigError);
}

TEST_CASE("RDB forward matches the loop reference") {
  ParameterStore<double> store;
  Rng rng(3);
  const auto p = make_rdb(store, "r", RdbSpec{4, 3, 4}, rng);
  std::uint64_t s = 10;
  for (auto& [name, v] : store.items()) randomize(v, ++s);
  const auto x = random_tensor<double>({2, 4, 5, 6}, 1);
  const auto y = rdb_forward(Var<double>(x), p).value();
  CHECK(max_abs_diff(y, naive_rdb(x, p)) < 1e-12);
  CHECK_THROWS_AS(rdb_forward(random_var<double>({1, 3, 4, 4}, 2), p), ConfigError);
}

TEST_CASE("RDB with zeroed projection is the identity") {
  ParameterStore<float> store;
  Rng rng(5);
  const auto p = make_rdb(store, "r", RdbSpec{8, 16, 5}, rng);
  p.convs.back().weight.ptr()->value.fill(0.f);
  const auto x = random_tensor<float>({2, 8, 6, 6}, 2);
  const auto y = rdb_forward(Var<float>(x), p).value();
  CHECK(y.vec() == x.vec());
}

TEST_CASE("down and up blocks") {
  ParameterStore<double> store;
  Rng rng(7);
  const auto down = make_down(store, "d", 4, rng);
  const auto up = make_up(store, "u", 8, rng);
  const auto x = random_var<double>({1, 4, 8, 6}, 3);
  const auto y = downsample_forward(x, down);
  CHECK(y.shape() == Shape{1, 8, 4, 3});
  const auto z = upsample_forward(y, up);
  CHECK(z.shape() == Shape{1, 4, 8, 6});

  const auto ref = naive_conv2d(naive_relu(naive_conv2d(x.value(), down.spatial.weight.value(), down.spatial.bias.value(), 2, 1)),
                                down.project.weight.value(), down.project.bias.value(), 1, 0);
  CHECK(max_abs_diff(y.value(), ref) < 1e-12);
  const auto ref_up = naive_conv2d(naive_relu(naive_conv_transpose2d(y.value(), up.spatial.weight.value(), up.spatial.bias.value(), 2, 1)),
                                   up.project.weight.value(), up.project.bias.value(), 1, 0);
  CHECK(max_abs_diff(z.value(), ref_up) < 1e-12);

  CHECK_THROWS_AS(downsample_forward(random_var<double>({1, 4, 7, 6}, 1), down), ShapeError);
  CHECK_THROWS_AS(make_up(store, "odd", 5, rng), ConfigError);
}

TEST_CASE("attention branches with zero gamma are identities") {
  ParameterStore<float> store;
  const auto att = make_attention(store, "att");
  CHECK(att.gamma_pos.value()[0] == 0.f);
  CHECK(att.gamma_chan.value()[0] == 0.f);
  const auto x = random_tensor<float>({2, 16, 4, 4}, 9, -3, 3);
  CHECK(position_attention(Var<float>(x), att.gamma_pos).value().vec() == x.vec());
  CHECK(channel_attention(Var<float>(x), att.gamma_chan).value().vec() == x.vec());
  const auto d = dual_attention_forward(Var<float>(x), att).value();
  for (std::size_t i = 0; i < x.size(); ++i) REQUIRE(d[i] == 2.f * x[i]);
}

TEST_CASE("attention with nonzero gamma adds the scaled increment") {
  ParameterStore<double> store;
  const auto att = make_attention(store, "att");
  att.gamma_pos.ptr()->value[0] = 0.5;
  att.gamma_chan.ptr()->value[0] = -2.0;
  const auto x = random_var<double>({1, 3, 2, 2}, 4);
  const auto inc_p = ops::position_attention_increment(x).value();
  const auto inc_c = ops::channel_attention_increment(x).value();
  const auto d = dual_attention_forward(x, att).value();
  for (std::size_t i = 0; i < d.size(); ++i) {
    CHECK(d[i] == doctest::Approx(2 * x.value()[i] + 0.5 * inc_p[i] - 2.0 * inc_c[i]).epsilon(1e-12));
  }
}

TEST_CASE("weighted fusion") {
  ParameterStore<float> store;
  const auto w = make_fusion(store, "f", 2, 4);
  CHECK(w.alpha.value().vec() == std::vector<float>(4, 1.f));
  const auto a = random_var<float>({1, 4, 3, 3}, 1);
  const auto b = random_var<float>({1, 4, 3, 3}, 2);
  const auto y = weighted_fuse(a, b, w).value();
  for (std::size_t i = 0; i < y.size(); ++i) CHECK(y[i] == a.value()[i] + b.value()[i]);
  try {
    weighted_fuse(a, random_var<float>({1, 4, 2, 3}, 3), w);
    FAIL("expected ShapeError");
  } catch (const ShapeError& e) {
    CHECK(std::string(e.what()).find("level 2") != std::string::npos);
  }
}

TEST_CASE("block gradients agree with central differences") {
  SUBCASE("RDB") {
    ParameterStore<double> store;
    Rng rng(11);
    const auto p = make_rdb(store, "r", RdbSpec{3, 4, 5}, rng);
    std::vector<Var<double>> inputs;
    std::uint64_t s = 50;
    for (auto& [name, v] : store.items()) {
      randomize(v, ++s, 0.5);
      inputs.push_back(v);
    }
    auto x = random_var<double>({2, 3, 5, 5}, 12, true);
    inputs.push_back(x);
    const auto target = random_var<double>({2, 3, 5, 5}, 13);
    const auto r = grad_check([&] { return ops::normalized_sq_distance(rdb_forward(x, p), target); }, inputs, 10);
    CHECK(r.max_rel_error < 1e-4);
  }
  SUBCASE("dual attention") {
    ParameterStore<double> store;
    const auto att = make_attention(store, "att");
    att.gamma_pos.ptr()->value[0] = 0.7;
    att.gamma_chan.ptr()->value[0] = -0.4;
    auto x = random_var<double>({2, 4, 3, 3}, 14, true, -0.6, 0.6);
    const auto target = random_var<double>({2, 4, 3, 3}, 15);
    const auto r = grad_check([&] { return ops::normalized_sq_distance(dual_attention_forward(x, att), target); },
                              {x, att.gamma_pos, att.gamma_chan}, 72);
    CHECK(r.max_rel_error < 1e-4);
  }
}
