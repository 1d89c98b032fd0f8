#include <sstream>

#include "bpl/config.hpp"
#include "bpl/harness.hpp"
#include "bpl/testkit/properties.hpp"
#include "doctest.h"

using namespace bpl;

namespace {

RunConfig tiny(ApproachKind approach, int cycles = 2) {
  RunConfig c = RunConfig::defaults_for("light_switch_door");
  c.approach = approach;
  c.cycles = cycles;
  c.n_eval_tasks = 3;
  c.trajectories_per_cycle = 2;
  c.steps_per_trajectory = 10;
  c.learner.train_iters = 5;
  c.learner.batch_size = 8;
  c.learner.hidden = {8};
  return c;
}

RunRecord fake_record(std::uint64_t seed, std::vector<double> smooth_eval) {
  RunRecord r;
  r.config = RunConfig::defaults_for("light_switch_door");
  r.config.seed = seed;
  r.config_echo = config_echo(r.config);
  for (std::size_t i = 0; i < smooth_eval.size(); ++i) {
    CycleRecord c;
    c.cycle = static_cast<int>(i);
    c.smooth_eval = smooth_eval[i];
    c.smooth_train = 1.0 - smooth_eval[i];
    c.env_steps = static_cast<long long>(10 * (i + 1) * (seed + 1));
    r.cycles.push_back(c);
  }
  return r;
}

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("pure planning never opens a door") {
    const RunRecord rec = run_online_learning(tiny(ApproachKind::kPurePlanning));
    REQUIRE(rec.cycles.size() == 2);
    for (const auto& c : rec.cycles) {
      CHECK(c.eval_reward == 0.0);
      CHECK(c.train_status == "no_learning");
    }
    CHECK(rec.checkpoint.empty());
  }

  TEST_CASE("pure planning solves door-free tasks") {
    RunConfig c = tiny(ApproachKind::kPurePlanning);
    c.eval_ranges.novelty_min = c.eval_ranges.novelty_max = 0;
    const RunRecord rec = run_online_learning(c);
    for (const auto& cr : rec.cycles) CHECK(cr.eval_reward == 1.0);
  }

  TEST_CASE("approach stacks") {
    const EnvSpec& env = light_switch_door();
    const RunConfig c = tiny(ApproachKind::kOurs);
    CHECK(build_approach(ApproachKind::kOursNoCallPlanner, env, c).learner->action_space().call_planner == false);
    CHECK(build_approach(ApproachKind::kOursNoFeatureSelection, env, c).learner->state_dim() ==
          projected_dim(env, StateView::kFull));
    CHECK(build_approach(ApproachKind::kOurs, env, c).learner->state_dim() == 4);
    CHECK(build_approach(ApproachKind::kRandomBridge, env, c).learner == nullptr);
    CHECK(build_approach(ApproachKind::kPurePlanning, env, c).learner == nullptr);
    const PolicyStack maple = build_approach(ApproachKind::kMapleQ, env, c);
    CHECK_FALSE(maple.options.use_planner);
    CHECK_FALSE(maple.options.bridge.call_planner);
    CHECK(all_approaches().size() == 6);
    CHECK_THROWS_AS(approach_from_string("greedy"), Error);
    CHECK(approach_from_string("maple_q") == ApproachKind::kMapleQ);
  }

  TEST_CASE("random bridge is reproducible") {
    const RunConfig c = tiny(ApproachKind::kRandomBridge);
    std::ostringstream a, b;
    write_run_record(a, run_online_learning(c));
    write_run_record(b, run_online_learning(c));
    CHECK(a.str() == b.str());
  }

  TEST_CASE("smooth reward") {
    std::vector<double> series(25, 0.0);
    series.resize(50, 1.0);
    const auto s = smooth_reward(series);
    CHECK(s[49] == 1.0);
    CHECK(s[25] == 1.0 / 25.0);
    CHECK(s[26] == 2.0 / 25.0);
    CHECK(s[0] == 0.0);
    CHECK(smooth_reward({0.4, 0.6}, 25)[0] == 0.4);
    CHECK(smooth_reward(std::vector<double>(30, 1.0)) == std::vector<double>(30, 1.0));
    CHECK(smooth_reward({}).empty());
  }

  TEST_CASE("aggregate seeds") {
    SUBCASE("a single record has zero variance") {
      const auto rows = aggregate_seeds({fake_record(0, {0.5, 1.0})});
      REQUIRE(rows.size() == 2);
      CHECK(rows[1].mean_smooth_eval == 1.0);
      CHECK(rows[1].var_smooth_eval == 0.0);
    }
    SUBCASE("two records 0 and 1") {
      const auto rows = aggregate_seeds({fake_record(0, {0.0}), fake_record(1, {1.0})});
      CHECK(rows[0].mean_smooth_eval == 0.5);
      CHECK(rows[0].var_smooth_eval == 0.5);
      CHECK(rows[0].mean_env_steps == 15.0);
      CHECK(rows[0].env == "light_switch_door");
      CHECK(rows[0].approach == "ours");
    }
    SUBCASE("identical records") {
      std::vector<RunRecord> recs;
      for (std::uint64_t s = 0; s < 8; ++s) recs.push_back(fake_record(s, {0.3, 0.7, 0.9}));
      for (const auto& r : aggregate_seeds(recs)) {
        CHECK(r.var_smooth_eval == 0.0);
        CHECK(r.var_smooth_train == 0.0);
      }
    }
    SUBCASE("mismatched configs") {
      RunRecord other = fake_record(1, {0.0});
      other.config.cycles = 7;
      other.config_echo = config_echo(other.config);
      CHECK_THROWS_AS(aggregate_seeds({fake_record(0, {0.0}), other}), Error);
    }
  }

  TEST_CASE("run records round-trip") {
    const RunRecord rec = run_online_learning(tiny(ApproachKind::kOurs));
    std::ostringstream out;
    write_run_record(out, rec);
    std::istringstream in(out.str());
    const RunRecord back = read_run_record(in);
    CHECK(back.config_echo == rec.config_echo);
    CHECK(back.cycles.size() == rec.cycles.size());
    CHECK(back.eval_episodes.size() == rec.eval_episodes.size());
    CHECK(back.checkpoint == "light_switch_door__ours__seed0.ckpt.json");
    std::ostringstream again;
    write_run_record(again, back);
    CHECK(again.str() == out.str());
    std::istringstream empty("");
    CHECK_THROWS_AS(read_run_record(empty), Error);
  }

  TEST_CASE("run_all keeps order and reports errors") {
    RunConfig good = tiny(ApproachKind::kPurePlanning, 1);
    RunConfig bad = good;
    bad.env = "nowhere";
    std::vector<std::string> errors;
    const auto out = run_all({good, bad}, 2, &errors);
    REQUIRE(out.size() == 2);
    CHECK(out[0].cycles.size() == 1);
    CHECK(out[1].cycles.empty());
    REQUIRE(errors.size() == 1);
    CHECK(errors[0].find("nowhere") != std::string::npos);
  }

  TEST_CASE("csv and tsv writers") {
    const auto rows = aggregate_seeds({fake_record(0, {0.0}), fake_record(1, {1.0})});
    std::ostringstream csv;
    write_aggregate_csv(csv, rows);
    CHECK(csv.str().starts_with(std::string(kAggregateHeader) + "\n"));
    CHECK(csv.str().find("light_switch_door,ours,0,") != std::string::npos);
    std::ostringstream panel;
    write_panel_csv(panel, rows, Split::kEval);
    CHECK(panel.str().starts_with("env,approach,cycle,split,mean_smooth,var_smooth\n"));
    CHECK(panel.str().find(",eval,") != std::string::npos);
    std::ostringstream tsv;
    write_plot_tsv(tsv, rows, Split::kEval);
    CHECK(tsv.str().starts_with("cycle\tmean\tlower\tupper\n"));
  }

  TEST_CASE("property: oracles, determinism, isolation") {
    for (const auto& r : {bpl::testkit::smooth_and_aggregate_oracles(), bpl::testkit::tiny_run_determinism(),
                          bpl::testkit::eval_isolation_and_contracts()}) {
      INFO(r.name << ": " << r.detail);
      CHECK(r.passed);
    }
  }
}
