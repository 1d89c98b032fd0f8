#include "bpl/config.hpp"
#include "bpl/testkit/properties.hpp"
#include "doctest.h"

using namespace bpl;

namespace {

std::string error_of(const ConfigValues& values) {
  try {
    expand_configs(values);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("defaults for an empty config") {
    const auto configs = expand_configs(parse_config_text("env = light_switch_door\n"));
    REQUIRE(configs.size() == 1);
    const RunConfig& c = configs.front();
    CHECK(c.learner.gamma == 0.8);
    CHECK(c.learner.adam.lr == 1e-3);
    CHECK(c.learner.replay_capacity == 1'000'000);
    CHECK(c.learner.hidden == std::vector<std::size_t>{32, 32});
    CHECK(c.learner.n_sample == 10);
    CHECK(c.learner.batch_size == 128);
    CHECK(c.learner.train_iters == 10'000);
    CHECK(c.learner.tau == 2.5e-3);
    CHECK(c.trajectories_per_cycle == 5);
    CHECK(c.steps_per_trajectory == 100);
    CHECK(c.n_train_tasks == 1);
    CHECK(c.n_eval_tasks == 10);
    CHECK(c.cycles == 100);
    CHECK(expand_configs(parse_config_text("env = coffee")).front().n_eval_tasks == 1);
    CHECK(expand_configs(parse_config_text("env = coffee")).front().cycles == 150);
  }

  TEST_CASE("seed matrices") {
    ConfigValues v;
    apply_overrides(v, {"seeds=8"});
    const auto configs = expand_configs(v);
    REQUIRE(configs.size() == 8);
    for (std::size_t i = 0; i < 8; ++i) CHECK(configs[i].seed == i);
    apply_overrides(v, {"env=all", "approach=all"});
    CHECK(expand_configs(v).size() == 3 * 6 * 8);
  }

  TEST_CASE("range errors name the key") {
    ConfigValues v;
    apply_overrides(v, {"gamma=1.5"});
    CHECK(v.contains("learner.gamma"));
    CHECK(error_of(v).find("learner.gamma") != std::string::npos);
    ConfigValues w;
    apply_overrides(w, {"cycles=0"});
    CHECK(error_of(w).find("cycles") != std::string::npos);
  }

  TEST_CASE("parse errors") {
    CHECK_THROWS_AS(parse_config_text("colour = blue"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("gamma"), ConfigError);
    CHECK_THROWS_AS(expand_configs(parse_config_text("cycles = many")), ConfigError);
    CHECK_THROWS_AS(expand_configs(parse_config_text("gamma = 0.8x")), ConfigError);
    CHECK_THROWS_AS(expand_configs(parse_config_text("env = kitchen")), ConfigError);
    CHECK_THROWS_AS(expand_configs(parse_config_text("approach = greedy")), ConfigError);
    CHECK_THROWS_AS(parse_config_file("/nonexistent/bpl.cfg"), ConfigError);
    ConfigValues v;
    CHECK_THROWS_AS(apply_overrides(v, {"gamma"}), ConfigError);
  }

  TEST_CASE("comments, aliases and last-wins") {
    const auto v = parse_config_text("# header\nlr = 0.01  # inline\nlearner.lr = 0.02\nhidden = 16, 8\n");
    const RunConfig c = expand_configs(v).front();
    CHECK(c.learner.adam.lr == 0.02);
    CHECK(c.learner.hidden == std::vector<std::size_t>{16, 8});
  }

  TEST_CASE("config echo round-trips") {
    ConfigValues v;
    apply_overrides(v, {"env=doorknobs", "seed=4", "frame=absolute", "n_sample=3"});
    const RunConfig c = expand_configs(v).front();
    const std::string echo = config_echo(c);
    CHECK(echo.find("bridge.frame = absolute\n") != std::string::npos);
    CHECK(config_echo(config_from_echo(echo)) == echo);
    CHECK(config_from_echo(echo).run_key() == "doorknobs__ours__seed4");
  }

  TEST_CASE("property: echo") {
    const auto r = bpl::testkit::config_echo_roundtrip();
    INFO(r.detail);
    CHECK(r.passed);
  }
}
