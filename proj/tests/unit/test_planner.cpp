#include <sstream>

#include "bpl/planner.hpp"
#include "bpl/testkit/properties.hpp"
#include "doctest.h"
#include "fixtures.hpp"

using namespace bpl;

namespace {

struct Problem {
  AtomSet init;
  std::vector<GroundOperator> ops;
};

Problem ground_task(const Task& t) {
  const EnvSpec& env = light_switch_door();
  Problem p;
  p.init = abstract(t.initial_state, env.all_predicates());
  p.ops = ground(env.operators, t.objects, p.init);
  return p;
}

std::vector<std::string> op_names(const Skeleton& s) {
  std::vector<std::string> out;
  for (const auto& op : s) out.push_back(op.name());
  return out;
}

}  // namespace

TEST_SUITE("planner") {
  TEST_CASE("grounding drops bindings that fail static preconditions") {
    const Task t = fixtures::lsd_task(3, 0, 2);
    const Problem p = ground_task(t);
    int moves = 0;
    int toggles = 0;
    for (const auto& op : p.ops) {
      moves += op.op->name == "MoveRobot";
      toggles += op.op->name == "ToggleLight";
    }
    CHECK(moves == 4);
    CHECK(toggles == 1);
    CHECK(ground(light_switch_door().operators, std::vector<Object>{}, {}).empty());
  }

  TEST_CASE("heuristics on a three-cell corridor") {
    const Task far = fixtures::lsd_task(3, 0, 2);
    const Problem p = ground_task(far);
    CHECK(lmcut(p.init, far.goal, p.ops) == 3);
    CHECK(hmax(p.init, far.goal, p.ops) == 3);
    const Task near = fixtures::lsd_task(3, 2, 2);
    const Problem q = ground_task(near);
    CHECK(lmcut(q.init, near.goal, q.ops) == 1);
    const Task done = fixtures::lsd_task(3, 0, 2, {}, 1.0);
    const Problem r = ground_task(done);
    CHECK(lmcut(r.init, done.goal, r.ops) == 0);
    CHECK(hmax(r.init, done.goal, r.ops) == 0);
  }

  TEST_CASE("unreachable goals have infinite heuristic and no plan") {
    const Task t = fixtures::lsd_task(3, 0, 2);
    const Problem p = ground_task(t);
    std::vector<GroundOperator> moves_only;
    for (const auto& op : p.ops) {
      if (op.op->name == "MoveRobot") moves_only.push_back(op);
    }
    CHECK(lmcut(p.init, t.goal, moves_only) == kInfiniteCost);
    CHECK(hmax(p.init, t.goal, moves_only) == kInfiniteCost);
    CHECK_FALSE(astar_plan(p.init, t.goal, moves_only).has_value());
  }

  TEST_CASE("astar returns a minimum skeleton") {
    const Task t = fixtures::lsd_task(3, 0, 2);
    const Problem p = ground_task(t);
    for (Heuristic h : {Heuristic::kLmCut, Heuristic::kHMax, Heuristic::kBlind}) {
      SearchOptions opts;
      opts.heuristic = h;
      const auto plan = astar_plan(p.init, t.goal, p.ops, opts);
      REQUIRE(plan.has_value());
      CHECK(op_names(*plan) == std::vector<std::string>{"MoveRobot(robby,cell0,cell1)", "MoveRobot(robby,cell1,cell2)",
                                                        "ToggleLight(robby,light0,cell2)"});
    }
    const Task done = fixtures::lsd_task(3, 0, 2, {}, 1.0);
    const Problem d = ground_task(done);
    const auto empty = astar_plan(d.init, done.goal, d.ops);
    REQUIRE(empty.has_value());
    CHECK(empty->empty());
  }

  TEST_CASE("the node cap raises ResourceError") {
    const Task t = fixtures::lsd_task(6, 0, 5);
    const Problem p = ground_task(t);
    SearchOptions opts;
    opts.max_nodes = 2;
    opts.heuristic = Heuristic::kBlind;
    CHECK_THROWS_AS(astar_plan(p.init, t.goal, p.ops, opts), ResourceError);
  }

  TEST_CASE("plan policy executes and monitors") {
    const EnvSpec& env = light_switch_door();
    SUBCASE("door-free execution reaches the goal") {
      const Task t = fixtures::lsd_task(3, 0, 2);
      auto plan = plan_from_state(env, t.initial_state, t.goal);
      REQUIRE(plan.has_value());
      PlanPolicy policy = make_plan_policy(*plan, env);
      State s = t.initial_state;
      for (int i = 0; i < 3; ++i) {
        const PlanOutput out = policy.next(s);
        REQUIRE(out.status == PlanStatus::kOnTrack);
        s = step(env, s, *out.action);
        CHECK(policy.check_progress(s) == Progress::kAdvance);
      }
      CHECK(policy.exhausted());
      CHECK(policy.next(s).status == PlanStatus::kExhausted);
      CHECK(goal_holds(t.goal, s));
    }
    SUBCASE("a door makes the first move stuck without advancing") {
      const Task t = fixtures::lsd_task(3, 0, 2, {0.5});
      auto plan = plan_from_state(env, t.initial_state, t.goal);
      REQUIRE(plan.has_value());
      PlanPolicy policy = make_plan_policy(*plan, env);
      const PlanOutput out = policy.next(t.initial_state);
      const State s = step(env, t.initial_state, *out.action);
      CHECK(policy.check_progress(s) == Progress::kStuck);
      CHECK(policy.stuck());
      CHECK(policy.cursor() == 0);
      CHECK(policy.stuck_state() == s);
      CHECK(policy.next(s).status == PlanStatus::kStuck);
    }
    SUBCASE("check_progress needs a pending action") {
      const Task t = fixtures::lsd_task(3, 0, 2);
      PlanPolicy policy = make_plan_policy(*plan_from_state(env, t.initial_state, t.goal), env);
      CHECK_THROWS_AS(policy.check_progress(t.initial_state), Error);
    }
  }

  TEST_CASE("dump_problem uses list syntax") {
    const Task t = fixtures::lsd_task(2, 0, 1);
    const Problem p = ground_task(t);
    const std::string text = dump_problem(p.init, t.goal, p.ops);
    CHECK(text.find("(RobotInCell robby cell0)") != std::string::npos);
    CHECK(text.find("(:goal (and (LightOn light0)))") != std::string::npos);
    CHECK(text.find("(MoveRobot(robby,cell0,cell1)") != std::string::npos);
  }

  TEST_CASE("property: optimality, heuristics, stuck detection, grounding") {
    for (const auto& r : {bpl::testkit::planner_optimality(), bpl::testkit::heuristic_ordering(),
                          bpl::testkit::stuck_detection(), bpl::testkit::grounding_matches_exhaustive(),
                          bpl::testkit::skeleton_determinism()}) {
      INFO(r.name << ": " << r.detail);
      CHECK(r.passed);
    }
  }
}
