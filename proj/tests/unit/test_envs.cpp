#include <numbers>

#include "bpl/testkit/properties.hpp"
#include "doctest.h"
#include "fixtures.hpp"

using namespace bpl;

namespace {

int count_type(const Task& t, const char* type) {
  return static_cast<int>(t.initial_state.objects_of_type(type).size());
}

std::vector<std::string> names(const std::vector<Object>& objs) {
  std::vector<std::string> out;
  for (const auto& o : objs) out.push_back(o.name());
  return out;
}

}  // namespace

TEST_SUITE("envs") {
  TEST_CASE("light_switch_door eval tasks follow the eval ranges") {
    const EnvSpec& env = light_switch_door();
    const auto tasks = sample_tasks(env, {Split::kEval, 0, env.eval_ranges, 0}, 10);
    for (const auto& t : tasks) {
      CHECK(count_type(t, "cell") >= 10);
      CHECK(count_type(t, "cell") <= 20);
      CHECK(count_type(t, "door") >= 2);
      CHECK(count_type(t, "door") <= 4);
    }
  }

  TEST_CASE("light_switch_door train tasks have exactly one door") {
    const EnvSpec& env = light_switch_door();
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const Task t = sample_task(env, {Split::kTrain, seed, env.train_ranges, seed});
      CHECK(count_type(t, "door") == 1);
    }
  }

  TEST_CASE("doorknobs eval goal room is reachable in the fully open graph") {
    const EnvSpec& env = doorknobs();
    for (const auto& t : sample_tasks(env, {Split::kEval, 0, env.eval_ranges, 0}, 10)) {
      const int rooms = count_type(t, "room");
      CHECK(rooms >= 4);
      CHECK(rooms <= 25);
      State open = t.initial_state;
      for (const auto& d : open.objects_of_type("door")) open.set_feature(d, "open", 1.0);
      CHECK(plan_from_state(env, open, t.goal).has_value());
    }
  }

  TEST_CASE("doorknobs shares the knob target within a deployment") {
    const EnvSpec& env = doorknobs();
    const auto tasks = sample_tasks(env, {Split::kEval, 3, env.eval_ranges, 42}, 5);
    std::set<double> targets;
    for (const auto& t : tasks) {
      for (const auto& d : t.initial_state.objects_of_type("door")) targets.insert(t.initial_state.get(d, "target"));
    }
    CHECK(targets.size() == 1);
  }

  TEST_CASE("light_switch_door moves and door blocking") {
    const EnvSpec& env = light_switch_door();
    const Task t = fixtures::lsd_task(4, 1, 3, {2.5});
    const State& s = t.initial_state;
    const Object robot = s.object("robby");
    const State moved = step(env, s, GroundAction(env.skill("MoveRight"), {robot}, {}));
    CHECK(moved.get(robot, "x") == 2.0);
    const State blocked = step(env, moved, GroundAction(env.skill("MoveRight"), {robot}, {}));
    CHECK(blocked == moved);
    const State left = step(env, s, GroundAction(env.skill("MoveLeft"), {robot}, {}));
    CHECK(left.get(robot, "x") == 0.0);
  }

  TEST_CASE("light_switch_door door protocol") {
    const EnvSpec& env = light_switch_door();
    const Task t = fixtures::lsd_task(4, 2, 3, {2.5});
    const State& s = t.initial_state;
    const Object door = s.object("door0");
    const SkillPtr rll = env.skill(kRunLowLevelAction);
    const State one = step(env, s, GroundAction(rll, {}, {0.8, 1.0}));
    CHECK(one.get(door, "open") == 0.0);
    CHECK(one.get(door, "latch") == 0.8);
    const State two = step(env, one, GroundAction(rll, {}, {0.1, 1.0}));
    CHECK(two.get(door, "open") == 1.0);
    const State weak = step(env, one, GroundAction(rll, {}, {0.1, 0.5}));
    CHECK(weak.get(door, "open") == 0.0);
    const State wrong = step(env, s, GroundAction(rll, {}, {0.95, 0.0}));
    CHECK(wrong.get(door, "latch") == 0.0);
    const State toggled = step(env, fixtures::lsd_task(4, 3, 3).initial_state,
                               GroundAction(env.skill("ToggleLightSwitch"), {robot_of(env, s)}, {0.7}));
    CHECK(toggled.get(toggled.object("light0"), "level") == 0.7);
  }

  TEST_CASE("coffee grasp needs an upright jug") {
    const EnvSpec& env = coffee();
    const Task t = sample_task(env, {Split::kTrain, 0, env.train_ranges, 0});
    const State& s = t.initial_state;
    const Object robot = s.object("robby");
    const Object jug = s.object("jug0");
    REQUIRE(std::abs(s.get(jug, "rotation")) > coffee_env::kGraspTolerance);
    const GroundAction pick(env.skill("PickJug"), {robot, jug}, {});
    CHECK(step(env, s, pick) == s);
    const double p = -s.get(jug, "rotation") / std::numbers::pi;
    const State upright = step(env, s, GroundAction(env.skill(kRunLowLevelAction), {}, {p}));
    CHECK(std::abs(upright.get(jug, "rotation")) <= 1e-12);
    CHECK(step(env, upright, pick).get(jug, "held") == 1.0);
  }

  TEST_CASE("doorknobs opens a door at the target angle") {
    const EnvSpec& env = doorknobs();
    const Task t = sample_task(env, {Split::kTrain, 5, env.train_ranges, 5});
    State s = t.initial_state;
    const Object robot = robot_of(env, s);
    const Object door = s.objects_of_type("door").front();
    // Stand in a room next to the door.
    const double dx = s.get(door, "x");
    const double dy = s.get(door, "y");
    const bool horizontal = dx != std::floor(dx);
    s.set(robot, {horizontal ? dx - 0.5 : dx, horizontal ? dy : dy - 0.5});
    const SkillPtr rll = env.skill(kRunLowLevelAction);
    const double target = s.get(door, "target");
    const State miss = step(env, s, GroundAction(rll, {}, {std::fmod(target / (2 * std::numbers::pi) + 0.5, 1.0)}));
    CHECK(miss.get(door, "open") == 0.0);
    const State hit = step(env, s, GroundAction(rll, {}, {target / (2 * std::numbers::pi)}));
    CHECK(hit.get(door, "open") == 1.0);
    CHECK(doorknobs_env::wrapped_angle_distance(0.1, 2 * std::numbers::pi - 0.1) == doctest::Approx(0.2));
  }

  TEST_CASE("interactable_objects") {
    const EnvSpec& lsd_env = light_switch_door();
    const Task two = fixtures::lsd_task(8, 0, 7, {2.5, 5.5});
    CHECK(names(interactable_objects(lsd_env, two.initial_state)) ==
          std::vector<std::string>{"door0", "door1", "light0"});
    const Task c = sample_task(coffee(), {Split::kTrain, 0, coffee().train_ranges, 0});
    CHECK(names(interactable_objects(coffee(), c.initial_state)) ==
          std::vector<std::string>{"cup0", "jug0", "machine0"});
    State bare;
    bare.set(Object("robby", lsd_env.type("robot")), {0.0});
    bare.set(Object("cell0", lsd_env.type("cell")), {0.0});
    CHECK(interactable_objects(lsd_env, bare).empty());
  }

  TEST_CASE("sampler errors and lookup") {
    CHECK_THROWS_AS(env_by_name("kitchen"), Error);
    CHECK(env_by_name("coffee").name == "coffee");
    CHECK_THROWS_AS(sample_task(light_switch_door(), {Split::kEval, 0, {3, 3, 3, 3}, 0}), Error);
    CHECK_THROWS_AS(sample_task(light_switch_door(), {Split::kEval, 0, {5, 3, 1, 1}, 0}), Error);
    CHECK(lsd::optimal_steps(0, 4, 1) == 7);
  }

  TEST_CASE("task ids and count independence") {
    const EnvSpec& env = light_switch_door();
    const auto a = sample_tasks(env, {Split::kEval, 9, env.eval_ranges, 9}, 3);
    const auto b = sample_tasks(env, {Split::kEval, 9, env.eval_ranges, 9}, 6);
    CHECK(a[0].id == "light_switch_door-eval-9-0");
    for (int i = 0; i < 3; ++i) CHECK(a[i].initial_state == b[i].initial_state);
  }

  TEST_CASE("property: generators, transitions and protocols") {
    for (const auto& r : {bpl::testkit::task_generator_invariants(), bpl::testkit::transition_determinism(),
                          bpl::testkit::env_protocols()}) {
      INFO(r.name << ": " << r.detail);
      CHECK(r.passed);
    }
  }
}
