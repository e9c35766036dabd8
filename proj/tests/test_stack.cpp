#include "doctest.h"
#include "support.hpp"
#include "tnet/errors.hpp"
#include "tnet/stack.hpp"

using namespace tnet;
using namespace tnet::testing;

namespace {

TNetConfig small() {
  TNetConfig c;
  c.m = 2;
  c.n = 1;
  c.base_channels = 4;
  return c;
}

}  // namespace

TEST_CASE("shared stacking keeps the parameter count of one network") {
  StackTNet<float> one(small(), {1, true}, 3);
  StackTNet<float> three(small(), {3, true}, 3);
  CHECK(one.parameter_count() == three.parameter_count());
  CHECK(one.named_parameters().size() == three.named_parameters().size());
  StackTNet<float> unshared(small(), {3, false}, 3);
  CHECK(unshared.parameter_count() == 3 * one.parameter_count());
  CHECK(unshared.named_parameters().front().first.rfind("stage1.", 0) == 0);
}

TEST_CASE("earlier stages do not depend on later ones") {
  StackTNet<float> one(small(), {1, true}, 4);
  StackTNet<float> three(small(), {3, true}, 4);
  const auto x = random_var<float>({2, 3, 8, 8}, 5);
  const auto a = one.forward(x);
  const auto b = three.forward(x);
  REQUIRE(b.per_stage.size() == 3);
  CHECK(a.final().value().vec() == b.per_stage[0].value().vec());
  const auto two = three.forward(x, 2);
  CHECK(two.per_stage[1].value().vec() == b.per_stage[1].value().vec());
}

TEST_CASE("stage inputs concatenate the hazy image first") {
  const TNetConfig c = small();
  TNet<double> net(c, 6);
  const auto x0 = random_var<double>({1, 3, 8, 8}, 7);
  const auto out = stack_forward(net, x0, 2);
  const auto y1 = net.forward(ops::concat_channels<double>({x0, x0}));
  const auto y2 = net.forward(ops::concat_channels<double>({x0, y1}));
  CHECK(out.per_stage[0].value().vec() == y1.value().vec());
  CHECK(out.per_stage[1].value().vec() == y2.value().vec());
}

TEST_CASE("stack errors") {
  CHECK_THROWS_AS(StackTNet<float>(small(), {0, true}, 1), ConfigError);
  TNetConfig bad = small();
  bad.in_channels = 3;
  CHECK_THROWS_AS(StackTNet<float>(bad, {2, true}, 1), ConfigError);
  StackTNet<float> model(small(), {2, true}, 1);
  try {
    model.forward(random_var<float>({1, 3, 6, 8}, 1));
    FAIL("expected ShapeError");
  } catch (const ShapeError& e) {
    CHECK(std::string(e.what()).find("stage 1") != std::string::npos);
  }
  StackTNet<float> unshared(small(), {2, false}, 1);
  CHECK_THROWS_AS(unshared.forward(random_var<float>({1, 3, 8, 8}, 1), 3), ConfigError);
}

TEST_CASE("shared-stage gradients agree with central differences") {
  TNetConfig c = small();
  c.base_channels = 2;
  StackTNet<double> model(c, {2, true}, 8);
  std::vector<Var<double>> inputs;
  for (const auto& [name, v] : model.named_parameters()) {
    auto var = v;
    if (name.find("gamma") != std::string::npos) var.mutable_value().fill(0.2);
    inputs.push_back(var);
  }
  const auto x = random_var<double>({1, 3, 8, 8}, 9);
  const auto gt = random_var<double>({1, 3, 8, 8}, 10);
  const auto r = grad_check([&] { return ops::normalized_sq_distance(model.forward(x).final(), gt); }, inputs, 3);
  INFO("analytic ", r.worst_analytic, " numeric ", r.worst_numeric, " fallbacks ", r.kink_fallbacks, "/", r.checked);
  CHECK(r.max_rel_error < 1e-4);
}
