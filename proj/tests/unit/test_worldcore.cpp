#include "doctest.h"
#include "fixtures.hpp"
#include "bpl/testkit/properties.hpp"

using namespace bpl;

TEST_SUITE("worldcore") {
  TEST_CASE("abstract evaluates classifiers over typed tuples") {
    const EnvSpec& env = light_switch_door();
    SUBCASE("light level 0.9 gives LightOn(light0)") {
      const Task t = fixtures::lsd_task(3, 0, 2, {}, 0.9);
      CHECK(fixtures::has_atom(abstract(t.initial_state, env.predicates), "LightOn(light0)"));
    }
    SUBCASE("empty predicate set gives the empty set") {
      const Task t = fixtures::lsd_task(3, 0, 2);
      CHECK(abstract(t.initial_state, {}).empty());
    }
    SUBCASE("robot cell membership is by x") {
      const Task t = fixtures::lsd_task(3, 0, 2);
      const AtomSet atoms = abstract(t.initial_state, env.planner_predicates);
      CHECK(fixtures::has_atom(atoms, "RobotInCell(robby,cell0)"));
      CHECK_FALSE(fixtures::has_atom(atoms, "RobotInCell(robby,cell1)"));
      CHECK(fixtures::has_atom(atoms, "Adjacent(cell0,cell1)"));
      CHECK(fixtures::has_atom(atoms, "Adjacent(cell1,cell0)"));
      CHECK_FALSE(fixtures::has_atom(atoms, "Adjacent(cell0,cell2)"));
    }
  }

  TEST_CASE("goal_holds") {
    const Task off = fixtures::lsd_task(3, 0, 2, {}, 0.0);
    const Task on = fixtures::lsd_task(3, 0, 2, {}, 0.9);
    CHECK(goal_holds({}, off.initial_state));
    CHECK_FALSE(goal_holds(off.goal, off.initial_state));
    CHECK(goal_holds(on.goal, on.initial_state));
    CHECK(goal_holds(on.goal, fixtures::lsd_task(3, 0, 2, {}, lsd::kLightOnLevel).initial_state));
  }

  TEST_CASE("object_distance") {
    const EnvSpec& lsd_env = light_switch_door();
    const Task t = fixtures::lsd_task(4, 1, 3, {2.0});
    const State& s = t.initial_state;
    CHECK(object_distance(s, s.object("robby"), s.object("door0"), lsd_env.position_features) == 1.0);
    CHECK(object_distance(s, s.object("robby"), s.object("robby"), lsd_env.position_features) == 0.0);

    const EnvSpec& dk = doorknobs();
    State p;
    const Object robot("robby", dk.type("robot"));
    const Object door("door0", dk.type("door"));
    p.set(robot, {0.0, 0.0});
    p.set(door, {3.0, 4.0, 0.0, 1.0, 0.0});
    CHECK(object_distance(p, robot, door, dk.position_features) == 5.0);
    CHECK(object_distance(p, door, robot, dk.position_features) == 5.0);
  }

  TEST_CASE("state and atom validation") {
    const EnvSpec& env = light_switch_door();
    State s;
    const Object robot("robby", env.type("robot"));
    CHECK_THROWS_AS(s.set(robot, {1.0, 2.0}), Error);
    s.set(robot, {1.0});
    CHECK_THROWS_AS(s.get(robot, "y"), Error);
    CHECK_THROWS_AS(s.object("nobody"), Error);
    const Object cell("cell0", env.type("cell"));
    CHECK_THROWS_AS(GroundAtom(fixtures::predicate(env, "RobotInCell"), {cell, robot}), Error);
    CHECK_THROWS_AS(GroundAtom(fixtures::predicate(env, "RobotInCell"), {robot}), Error);
  }

  TEST_CASE("ground actions check signatures and bounds") {
    const EnvSpec& env = light_switch_door();
    const Object robot("robby", env.type("robot"));
    const Object cell("cell0", env.type("cell"));
    CHECK_NOTHROW(GroundAction(env.skill("ToggleLightSwitch"), {robot}, {0.5}));
    CHECK_THROWS_AS(GroundAction(env.skill("ToggleLightSwitch"), {robot}, {1.5}), Error);
    CHECK_THROWS_AS(GroundAction(env.skill("ToggleLightSwitch"), {cell}, {0.5}), Error);
    CHECK_THROWS_AS(GroundAction(env.skill("MoveLeft"), {robot}, {0.5}), Error);
    CHECK(GroundAction(env.skill("MoveLeft"), {robot}, {}).to_string() == "MoveLeft(robby)");
  }

  TEST_CASE("task validation") {
    Task t = fixtures::lsd_task(3, 0, 2);
    t.horizon = 0;
    CHECK_THROWS_AS(t.validate(), Error);
    t = fixtures::lsd_task(3, 0, 2);
    t.objects.pop_back();
    CHECK_THROWS_AS(t.validate(), Error);
  }

  TEST_CASE("property: world algebra") {
    const auto r = bpl::testkit::world_algebra();
    INFO(r.detail);
    CHECK(r.passed);
    const auto e = bpl::testkit::abstraction_matches_enumeration();
    INFO(e.detail);
    CHECK(e.passed);
  }
}
