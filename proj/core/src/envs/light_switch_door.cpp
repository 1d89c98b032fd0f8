// Light Switch Door: a row of cells, a light in the last cell of the route and
// doors (unknown to the planner) on cell boundaries between robot and light.
//
// Positions are 1-D. Cells and the robot sit at integer x; a door on the
// boundary between cells b-1 and b sits at x = b - 0.5.

#include <algorithm>
#include <cmath>

#include "bpl/envs.hpp"

namespace bpl {

namespace lsd {

int optimal_steps(int robot_cell, int light_cell, int doors) {
  return std::abs(light_cell - robot_cell) + 2 * doors + 1;
}

}  // namespace lsd

namespace {

struct LsdTypes {
  ObjectTypePtr robot = make_type("robot", {"x"});
  ObjectTypePtr cell = make_type("cell", {"x"});
  ObjectTypePtr light = make_type("light", {"level", "x"});
  ObjectTypePtr door = make_type("door", {"x", "latch", "open"});
};

bool same_x(const State& s, const Object& a, const Object& b) {
  return s.get(a, "x") == s.get(b, "x");
}

int cell_count(const State& s) { return static_cast<int>(s.objects_of_type("cell").size()); }

std::optional<Object> door_at(const State& s, double boundary_x) {
  for (const auto& d : s.objects_of_type("door")) {
    if (s.get(d, "x") == boundary_x) return d;
  }
  return std::nullopt;
}

bool blocked(const State& s, double boundary_x) {
  auto d = door_at(s, boundary_x);
  return d && s.get(*d, "open") < 0.5;
}

State transition(const State& state, const GroundAction& action) {
  const std::string& skill = action.skill->name;
  State next = state;
  if (skill == "MoveLeft" || skill == "MoveRight") {
    const Object& robot = action.objects[0];
    const double x = state.get(robot, "x");
    const double dir = skill == "MoveRight" ? 1.0 : -1.0;
    const double target = x + dir;
    if (target < 0.0 || target > cell_count(state) - 1) return next;
    if (blocked(state, x + 0.5 * dir)) return next;
    next.set_feature(robot, "x", target);
    return next;
  }
  if (skill == "ToggleLightSwitch") {
    const Object& robot = action.objects[0];
    for (const auto& light : state.objects_of_type("light")) {
      if (same_x(state, robot, light)) next.set_feature(light, "level", action.params[0]);
    }
    return next;
  }
  if (skill == kRunLowLevelAction) {
    auto robots = state.objects_of_type("robot");
    if (robots.empty()) return next;
    const double x = state.get(robots.front(), "x");
    for (const auto& door : state.objects_of_type("door")) {
      if (std::abs(state.get(door, "x") - x) != 0.5) continue;
      const double latch = state.get(door, "latch");
      const double u1 = action.params[0];
      const double u2 = action.params[1];
      if (latch < lsd::kLatchLow && u1 >= lsd::kLatchLow && u1 <= lsd::kLatchHigh) {
        next.set_feature(door, "latch", u1);
      }
      // Uses the latch value before this action, so one action never opens a door.
      if (latch >= lsd::kLatchLow && latch <= lsd::kLatchHigh && u2 >= lsd::kPushThreshold) {
        next.set_feature(door, "open", 1.0);
      }
      break;
    }
    return next;
  }
  return next;
}

std::optional<Task> generate(const LsdTypes& types, const PredicatePtr& light_on,
                             const TaskSampler& sampler, std::mt19937_64& rng) {
  const auto& rg = sampler.ranges;
  if (rg.size_min < 1 || rg.size_max < rg.size_min || rg.novelty_min < 0 ||
      rg.novelty_max < rg.novelty_min) {
    throw Error("light_switch_door: invalid structural ranges");
  }
  const int n = std::uniform_int_distribution<int>(rg.size_min, rg.size_max)(rng);
  const int k = std::uniform_int_distribution<int>(rg.novelty_min, rg.novelty_max)(rng);
  // Doors sit on pairwise non-adjacent boundaries strictly between robot and light.
  const int min_span = std::max(k > 0 ? 2 * k - 1 : 0, 1);
  if (min_span > n - 1) return std::nullopt;
  const int robot_cell = std::uniform_int_distribution<int>(0, n - 1 - min_span)(rng);
  const int light_cell = std::uniform_int_distribution<int>(robot_cell + min_span, n - 1)(rng);
  const int boundaries = light_cell - robot_cell;
  // Choose k sorted offsets in [0, boundaries - k] and spread them by index.
  std::vector<int> pool(static_cast<std::size_t>(boundaries - k + 1));
  for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = static_cast<int>(i);
  std::shuffle(pool.begin(), pool.end(), rng);
  std::vector<int> picks(pool.begin(), pool.begin() + k);
  std::sort(picks.begin(), picks.end());

  Task task;
  State& s = task.initial_state;
  const Object robot("robby", types.robot);
  s.set(robot, {static_cast<double>(robot_cell)});
  task.objects.push_back(robot);
  for (int c = 0; c < n; ++c) {
    Object cell("cell" + std::to_string(c), types.cell);
    s.set(cell, {static_cast<double>(c)});
    task.objects.push_back(cell);
  }
  const Object light("light0", types.light);
  s.set(light, {0.0, static_cast<double>(light_cell)});
  task.objects.push_back(light);
  for (int i = 0; i < k; ++i) {
    const int boundary = robot_cell + 1 + picks[i] + i;
    Object door("door" + std::to_string(i), types.door);
    s.set(door, {boundary - 0.5, 0.0, 0.0});
    task.objects.push_back(door);
  }
  std::sort(task.objects.begin(), task.objects.end());
  task.goal.emplace(light_on, std::vector<Object>{light});
  task.horizon = std::max(30, lsd::optimal_steps(robot_cell, light_cell, k) + 5);
  return task;
}

EnvSpec build() {
  static const LsdTypes t;
  EnvSpec env;
  env.name = "light_switch_door";
  env.types = {t.robot, t.cell, t.light, t.door};

  env.skills = {
      make_skill("MoveLeft", {t.robot}, {}),
      make_skill("MoveRight", {t.robot}, {}),
      make_skill("ToggleLightSwitch", {t.robot}, {{0.0, 1.0}}),
      make_skill(std::string(kRunLowLevelAction), {}, {{0.0, 1.0}, {0.0, 1.0}}),
  };

  auto light_on = make_predicate("LightOn", {t.light}, [](const State& s, std::span<const Object> a) {
    return s.get(a[0], "level") >= lsd::kLightOnLevel;
  });
  auto robot_in_cell =
      make_predicate("RobotInCell", {t.robot, t.cell},
                     [](const State& s, std::span<const Object> a) { return same_x(s, a[0], a[1]); });
  auto adjacent = make_predicate("Adjacent", {t.cell, t.cell}, [](const State& s, std::span<const Object> a) {
    return std::abs(s.get(a[0], "x") - s.get(a[1], "x")) == 1.0;
  });
  auto light_in_cell =
      make_predicate("LightInCell", {t.light, t.cell},
                     [](const State& s, std::span<const Object> a) { return same_x(s, a[0], a[1]); });
  env.predicates = {light_on};
  env.planner_predicates = {robot_in_cell, adjacent, light_in_cell};

  const SkillPtr move_left = env.skills[0];
  const SkillPtr move_right = env.skills[1];
  Operator move;
  move.name = "MoveRobot";
  move.parameters = {{"robot", t.robot}, {"current_cell", t.cell}, {"target_cell", t.cell}};
  move.preconditions = {{adjacent, {1, 2}}, {robot_in_cell, {0, 1}}};
  move.add_effects = {{robot_in_cell, {0, 2}}};
  move.delete_effects = {{robot_in_cell, {0, 1}}};
  move.skill_args = {0};
  move.choose_skill = [move_left, move_right](const State& s, std::span<const Object> b) {
    return s.get(b[2], "x") > s.get(b[1], "x") ? move_right : move_left;
  };

  Operator toggle;
  toggle.name = "ToggleLight";
  toggle.parameters = {{"robot", t.robot}, {"light", t.light}, {"cell", t.cell}};
  toggle.preconditions = {{robot_in_cell, {0, 2}}, {light_in_cell, {1, 2}}};
  toggle.add_effects = {{light_on, {1}}};
  toggle.linked_skill = env.skills[2];
  toggle.skill_args = {0};
  toggle.parameter_policy = [](const State&, std::span<const Object>) { return std::vector<double>{1.0}; };

  env.operators = {std::make_shared<const Operator>(std::move(move)),
                   std::make_shared<const Operator>(std::move(toggle))};
  for (const auto& op : env.operators) op->validate();

  env.interactable_types = {"door", "light"};
  env.position_features = {{"robot", {0}}, {"cell", {0}}, {"light", {1}}, {"door", {0}}};
  env.max_objects = {{"robot", 1}, {"cell", 20}, {"light", 1}, {"door", 4}};
  env.default_cycles = 100;
  env.default_eval_tasks = 10;
  env.train_ranges = {3, 6, 1, 1};
  env.eval_ranges = {10, 20, 2, 4};
  env.transition = transition;
  env.generate = [light_on](const TaskSampler& sampler, std::mt19937_64& rng) {
    return generate(t, light_on, sampler, rng);
  };
  env.resolved_novelties = [](const State& s) {
    int open = 0;
    for (const auto& d : s.objects_of_type("door")) open += s.get(d, "open") >= 0.5 ? 1 : 0;
    return open;
  };
  return env;
}

}  // namespace

const EnvSpec& light_switch_door() {
  static const EnvSpec env = build();
  return env;
}

}  // namespace bpl
