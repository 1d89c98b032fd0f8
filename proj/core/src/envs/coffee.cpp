// Coffee: put the jug in the machine, turn the machine on, pour into the cup.
// The jug starts rotated away from its grasp pose; grasping only succeeds
// within a small rotation tolerance, which the planner does not model.

#include <algorithm>
#include <cmath>
#include <numbers>

#include "bpl/envs.hpp"

namespace bpl {

namespace {

struct CoffeeTypes {
  ObjectTypePtr robot = make_type("robot", {"x", "y"});
  ObjectTypePtr jug = make_type("jug", {"x", "y", "rotation", "held", "in_machine", "filled"});
  ObjectTypePtr machine = make_type("machine", {"x", "y", "on"});
  ObjectTypePtr cup = make_type("cup", {"x", "y", "fill"});
};

bool flag(const State& s, const Object& o, std::string_view f) { return s.get(o, f) >= 0.5; }

State transition(const State& state, const GroundAction& action) {
  State next = state;
  const std::string& skill = action.skill->name;
  if (skill == "PickJug") {
    const Object& jug = action.objects[1];
    if (!flag(state, jug, "held") &&
        std::abs(state.get(jug, "rotation")) <= coffee_env::kGraspTolerance) {
      next.set_feature(jug, "held", 1.0);
      next.set_feature(jug, "in_machine", 0.0);
    }
    return next;
  }
  if (skill == "PlaceJugInMachine") {
    const Object& jug = action.objects[1];
    if (flag(state, jug, "held")) {
      next.set_feature(jug, "held", 0.0);
      next.set_feature(jug, "in_machine", 1.0);
    }
    return next;
  }
  if (skill == "TurnMachineOn") {
    const Object& machine = action.objects[1];
    for (const auto& jug : state.objects_of_type("jug")) {
      if (!flag(state, jug, "in_machine")) continue;
      next.set_feature(machine, "on", 1.0);
      next.set_feature(jug, "filled", 1.0);
    }
    return next;
  }
  if (skill == "PourCoffee") {
    const Object& jug = action.objects[1];
    const Object& cup = action.objects[2];
    if (flag(state, jug, "held") && flag(state, jug, "filled")) {
      next.set_feature(cup, "fill", action.params[0]);
    }
    return next;
  }
  if (skill == kRunLowLevelAction) {
    for (const auto& jug : state.objects_of_type("jug")) {
      if (flag(state, jug, "held")) continue;
      const double phi = state.get(jug, "rotation") + action.params[0] * std::numbers::pi;
      next.set_feature(jug, "rotation", std::clamp(phi, -std::numbers::pi, std::numbers::pi));
      break;
    }
    return next;
  }
  return next;
}

std::optional<Task> generate(const CoffeeTypes& t, const PredicatePtr& cup_filled, const TaskSampler&,
                             std::mt19937_64& rng) {
  const double magnitude = std::uniform_real_distribution<double>(0.5, 3.0)(rng);
  const double sign = std::bernoulli_distribution(0.5)(rng) ? 1.0 : -1.0;
  Task task;
  State& s = task.initial_state;
  const Object robot("robby", t.robot);
  const Object jug("jug0", t.jug);
  const Object machine("machine0", t.machine);
  const Object cup("cup0", t.cup);
  s.set(robot, {0.0, 0.0});
  s.set(jug, {1.0, 0.0, sign * magnitude, 0.0, 0.0, 0.0});
  s.set(machine, {2.0, 2.0, 0.0});
  s.set(cup, {0.0, 2.0, 0.0});
  task.objects = {cup, jug, machine, robot};
  task.goal.emplace(cup_filled, std::vector<Object>{cup});
  task.horizon = coffee_env::kHorizon;
  return task;
}

EnvSpec build() {
  static const CoffeeTypes t;
  EnvSpec env;
  env.name = "coffee";
  env.types = {t.robot, t.jug, t.machine, t.cup};
  env.skills = {
      make_skill("PickJug", {t.robot, t.jug}, {}),
      make_skill("PlaceJugInMachine", {t.robot, t.jug, t.machine}, {}),
      make_skill("TurnMachineOn", {t.robot, t.machine}, {}),
      make_skill("PourCoffee", {t.robot, t.jug, t.cup}, {{0.0, 1.0}}),
      make_skill(std::string(kRunLowLevelAction), {}, {{-1.0, 1.0}}),
  };

  using Args = std::span<const Object>;
  auto cup_filled = make_predicate("CupFilled", {t.cup}, [](const State& s, Args a) {
    return s.get(a[0], "fill") >= coffee_env::kCupFilledLevel;
  });
  auto hand_empty = make_predicate("HandEmpty", {t.robot}, [](const State& s, Args) {
    for (const auto& j : s.objects_of_type("jug")) {
      if (flag(s, j, "held")) return false;
    }
    return true;
  });
  auto holding = make_predicate("Holding", {t.robot, t.jug},
                                [](const State& s, Args a) { return flag(s, a[1], "held"); });
  auto on_table = make_predicate("JugOnTable", {t.jug}, [](const State& s, Args a) {
    return !flag(s, a[0], "held") && !flag(s, a[0], "in_machine");
  });
  auto in_machine = make_predicate("JugInMachine", {t.jug, t.machine},
                                   [](const State& s, Args a) { return flag(s, a[0], "in_machine"); });
  auto machine_on =
      make_predicate("MachineOn", {t.machine}, [](const State& s, Args a) { return flag(s, a[0], "on"); });
  auto jug_filled =
      make_predicate("JugFilled", {t.jug}, [](const State& s, Args a) { return flag(s, a[0], "filled"); });
  env.predicates = {cup_filled};
  env.planner_predicates = {hand_empty, holding, on_table, in_machine, machine_on, jug_filled};

  auto full = [](const State&, Args) { return std::vector<double>{1.0}; };

  Operator pick_table;
  pick_table.name = "PickJugFromTable";
  pick_table.parameters = {{"robot", t.robot}, {"jug", t.jug}};
  pick_table.preconditions = {{hand_empty, {0}}, {on_table, {1}}};
  pick_table.add_effects = {{holding, {0, 1}}};
  pick_table.delete_effects = {{hand_empty, {0}}, {on_table, {1}}};
  pick_table.linked_skill = env.skills[0];
  pick_table.skill_args = {0, 1};

  Operator place;
  place.name = "PlaceJugInMachine";
  place.parameters = {{"robot", t.robot}, {"jug", t.jug}, {"machine", t.machine}};
  place.preconditions = {{holding, {0, 1}}};
  place.add_effects = {{in_machine, {1, 2}}, {hand_empty, {0}}};
  place.delete_effects = {{holding, {0, 1}}};
  place.linked_skill = env.skills[1];
  place.skill_args = {0, 1, 2};

  Operator turn_on;
  turn_on.name = "TurnMachineOn";
  turn_on.parameters = {{"robot", t.robot}, {"machine", t.machine}, {"jug", t.jug}};
  turn_on.preconditions = {{in_machine, {2, 1}}};
  turn_on.add_effects = {{machine_on, {1}}, {jug_filled, {2}}};
  turn_on.linked_skill = env.skills[2];
  turn_on.skill_args = {0, 1};

  Operator pick_machine;
  pick_machine.name = "PickJugFromMachine";
  pick_machine.parameters = {{"robot", t.robot}, {"jug", t.jug}, {"machine", t.machine}};
  pick_machine.preconditions = {{hand_empty, {0}}, {in_machine, {1, 2}}, {jug_filled, {1}}};
  pick_machine.add_effects = {{holding, {0, 1}}};
  pick_machine.delete_effects = {{hand_empty, {0}}, {in_machine, {1, 2}}};
  pick_machine.linked_skill = env.skills[0];
  pick_machine.skill_args = {0, 1};

  Operator pour;
  pour.name = "PourCoffee";
  pour.parameters = {{"robot", t.robot}, {"jug", t.jug}, {"cup", t.cup}};
  pour.preconditions = {{holding, {0, 1}}, {jug_filled, {1}}};
  pour.add_effects = {{cup_filled, {2}}};
  pour.linked_skill = env.skills[3];
  pour.skill_args = {0, 1, 2};
  pour.parameter_policy = full;

  for (auto* op : {&pick_table, &place, &turn_on, &pick_machine, &pour}) {
    op->validate();
    env.operators.push_back(std::make_shared<const Operator>(std::move(*op)));
  }

  env.interactable_types = {"jug", "machine", "cup"};
  env.position_features = {{"robot", {0, 1}}, {"jug", {0, 1}}, {"machine", {0, 1}}, {"cup", {0, 1}}};
  env.max_objects = {{"robot", 1}, {"jug", 1}, {"machine", 1}, {"cup", 1}};
  env.default_cycles = 150;
  env.default_eval_tasks = 1;
  env.train_ranges = {0, 0, 1, 1};
  env.eval_ranges = {0, 0, 1, 1};
  env.transition = transition;
  env.generate = [cup_filled](const TaskSampler& sampler, std::mt19937_64& rng) {
    return generate(t, cup_filled, sampler, rng);
  };
  env.resolved_novelties = [](const State& s) {
    int n = 0;
    for (const auto& j : s.objects_of_type("jug")) {
      const bool graspable = std::abs(s.get(j, "rotation")) <= coffee_env::kGraspTolerance;
      n += (graspable || flag(s, j, "held") || flag(s, j, "in_machine")) ? 1 : 0;
    }
    return n;
  };
  return env;
}

}  // namespace

const EnvSpec& coffee() {
  static const EnvSpec env = build();
  return env;
}

}  // namespace bpl
