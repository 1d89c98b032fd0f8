#include <cmath>

#include "bpl/neural.hpp"
#include "bpl/testkit/properties.hpp"
#include "doctest.h"

using namespace bpl;

namespace {

MLPParams two_two_one() {
  MLPParams p;
  Eigen::MatrixXd w1(2, 2);
  w1 << 1.0, -1.0, 0.5, 2.0;
  Eigen::VectorXd b1(2);
  b1 << 0.0, -1.0;
  Eigen::MatrixXd w2(1, 2);
  w2 << 2.0, -3.0;
  Eigen::VectorXd b2(1);
  b2 << 0.5;
  p.layers = {{w1, b1}, {w2, b2}};
  return p;
}

MLPParams scalar_net(double w, double b) {
  MLPParams p;
  p.layers = {{Eigen::MatrixXd::Constant(1, 1, w), Eigen::VectorXd::Constant(1, b)}};
  return p;
}

}  // namespace

TEST_SUITE("neural") {
  TEST_CASE("forward") {
    const std::vector<double> x{1.0, 2.0};
    CHECK(forward(two_two_one(), x) == -10.0);
    CHECK(forward(zeros_like(two_two_one()), x) == 0.0);
    Eigen::MatrixXd cols(2, 2);
    cols << 1.0, 0.0, 2.0, 0.0;
    const Eigen::VectorXd out = forward_batch(two_two_one(), cols);
    CHECK(out(0) == -10.0);
    CHECK(out(1) == doctest::Approx(0.5));
  }

  TEST_CASE("backward by hand") {
    const std::vector<double> x{1.0, 2.0};
    const MLPGrads g = backward(two_two_one(), x, 1.0);
    CHECK(g.layers[1].bias(0) == 1.0);
    CHECK(g.layers[1].weights(0, 0) == 0.0);
    CHECK(g.layers[1].weights(0, 1) == 3.5);
    CHECK(g.layers[0].bias(0) == 0.0);
    CHECK(g.layers[0].bias(1) == -3.0);
    CHECK(g.layers[0].weights(1, 0) == -3.0);
    CHECK(g.layers[0].weights(1, 1) == -6.0);
    const MLPGrads zero = backward(two_two_one(), x, 0.0);
    CHECK(zero == zeros_like(two_two_one()));
  }

  TEST_CASE("adam first step") {
    MLPParams p = scalar_net(1.0, 0.0);
    AdamState st = init_adam(p);
    adam_step(p, scalar_net(0.5, 0.0), st);
    CHECK(st.t == 1);
    CHECK(std::abs(p.layers[0].weights(0, 0) - (1.0 - 1e-3 * 0.5 / (0.5 + 1e-8))) <= 1e-12);
    CHECK(p.layers[0].bias(0) == 0.0);
    CHECK(std::abs(st.m.layers[0].weights(0, 0) - 0.05) <= 1e-12);
    CHECK(std::abs(st.v.layers[0].weights(0, 0) - 0.00025) <= 1e-12);
  }

  TEST_CASE("polyak averaging") {
    const MLPParams target = scalar_net(0.0, 4.0);
    const MLPParams online = scalar_net(1.0, 0.0);
    const MLPParams mixed = polyak(target, online, 0.25);
    CHECK(mixed.layers[0].weights(0, 0) == 0.25);
    CHECK(mixed.layers[0].bias(0) == 3.0);
    CHECK(polyak(target, online, 0.0) == target);
    CHECK(polyak(target, online, 1.0) == online);
    MLPParams t = target;
    polyak_inplace(t, online, 0.25);
    CHECK(t == mixed);
  }

  TEST_CASE("init bounds and shapes") {
    std::mt19937_64 rng(3);
    const MLPParams p = init_mlp(7, {32, 32}, rng);
    REQUIRE(p.layers.size() == 3);
    CHECK(p.input_dim() == 7);
    CHECK(p.num_parameters() == 7 * 32 + 32 + 32 * 32 + 32 + 32 + 1);
    for (const auto& l : p.layers) {
      const double bound = std::sqrt(1.0 / static_cast<double>(l.weights.cols()));
      CHECK(l.weights.cwiseAbs().maxCoeff() <= bound);
      CHECK(l.bias.cwiseAbs().maxCoeff() <= bound);
    }
    std::mt19937_64 again(3);
    CHECK(init_mlp(7, {32, 32}, again) == p);
  }

  TEST_CASE("dimension errors") {
    const std::vector<double> bad{1.0, 2.0, 3.0};
    CHECK_THROWS_AS(forward(two_two_one(), bad), DimensionError);
    CHECK_THROWS_AS(backward(two_two_one(), bad, 1.0), DimensionError);
    MLPParams p = two_two_one();
    AdamState st = init_adam(p);
    CHECK_THROWS_AS(adam_step(p, scalar_net(1.0, 0.0), st), DimensionError);
    CHECK_THROWS_AS(polyak(p, scalar_net(1.0, 0.0), 0.5), DimensionError);
  }

  TEST_CASE("checkpoints") {
    const MLPParams p = two_two_one();
    CHECK(mlp_from_checkpoint(mlp_to_checkpoint(p)) == p);
    CHECK(mlp_to_checkpoint(p).find("bpl-mlp-1") != std::string::npos);
    CHECK_THROWS_AS(mlp_from_checkpoint("not json"), Error);
    CHECK_THROWS_AS(mlp_from_checkpoint(R"({"format":"other","layers":[]})"), Error);
    CHECK_THROWS_AS(mlp_from_checkpoint(R"({"format":"bpl-mlp-1","layers":[{"rows":2,"cols":2,"weights":[1],"bias":[0,0]}]})"),
                    Error);
  }

  TEST_CASE("property: gradients, fixtures and products") {
    for (const auto& r : {bpl::testkit::gradient_check(), bpl::testkit::polyak_adam_fixtures(),
                          bpl::testkit::polyak_contraction(), bpl::testkit::forward_product_matches_forward(),
                          bpl::testkit::checkpoint_roundtrip()}) {
      INFO(r.name << ": " << r.detail);
      CHECK(r.passed);
    }
  }
}
