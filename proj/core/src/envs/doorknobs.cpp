// Doorknobs on a room graph. Rooms sit on an integer grid and are joined by
// the edges of a random spanning tree; closed doors sit at edge midpoints.
// A door opens once its knob is turned to within tolerance of its target
// angle, which is shared by every door of one deployment environment.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "bpl/envs.hpp"

namespace bpl {

namespace doorknobs_env {

double wrapped_angle_distance(double a, double b) {
  const double two_pi = 2.0 * std::numbers::pi;
  double d = std::fmod(std::abs(a - b), two_pi);
  return std::min(d, two_pi - d);
}

}  // namespace doorknobs_env

namespace {

struct DkTypes {
  ObjectTypePtr robot = make_type("robot", {"x", "y"});
  ObjectTypePtr room = make_type("room", {"x", "y", "conn_n", "conn_e", "conn_s", "conn_w"});
  ObjectTypePtr door = make_type("door", {"x", "y", "knob", "target", "open"});
};

// Passage flag on `from` toward the grid neighbour `to`; -1 if not neighbours.
int direction_feature(double dx, double dy) {
  if (dx == 0.0 && dy == 1.0) return 2;
  if (dx == 1.0 && dy == 0.0) return 3;
  if (dx == 0.0 && dy == -1.0) return 4;
  if (dx == -1.0 && dy == 0.0) return 5;
  return -1;
}

bool connected(const State& s, const Object& a, const Object& b) {
  const auto& va = s.values(a);
  const auto& vb = s.values(b);
  const int f = direction_feature(vb[0] - va[0], vb[1] - va[1]);
  return f >= 0 && va[static_cast<std::size_t>(f)] >= 0.5;
}

bool robot_in_room(const State& s, const Object& robot, const Object& room) {
  const auto& r = s.values(robot);
  const auto& m = s.values(room);
  return r[0] == m[0] && r[1] == m[1];
}

bool door_adjacent_to(const std::vector<double>& door, double x, double y) {
  return (door[0] == x && std::abs(door[1] - y) == 0.5) || (door[1] == y && std::abs(door[0] - x) == 0.5);
}

State transition(const State& state, const GroundAction& action) {
  State next = state;
  const std::string& skill = action.skill->name;
  if (skill == "MoveRobot") {
    const Object& robot = action.objects[0];
    const Object& from = action.objects[1];
    const Object& to = action.objects[2];
    if (!robot_in_room(state, robot, from) || !connected(state, from, to)) return next;
    const auto& vf = state.values(from);
    const auto& vt = state.values(to);
    const double mx = 0.5 * (vf[0] + vt[0]);
    const double my = 0.5 * (vf[1] + vt[1]);
    for (const auto& door : state.objects_of_type("door")) {
      const auto& vd = state.values(door);
      if (vd[0] == mx && vd[1] == my && vd[4] < 0.5) return next;
    }
    next.set(robot, {vt[0], vt[1]});
    return next;
  }
  if (skill == kRunLowLevelAction) {
    auto robots = state.objects_of_type("robot");
    if (robots.empty()) return next;
    const auto& vr = state.values(robots.front());
    for (const auto& door : state.objects_of_type("door")) {
      const auto& vd = state.values(door);
      if (vd[4] >= 0.5 || !door_adjacent_to(vd, vr[0], vr[1])) continue;
      const double knob = 2.0 * std::numbers::pi * action.params[0];
      next.set_feature(door, "knob", knob);
      if (doorknobs_env::wrapped_angle_distance(knob, vd[3]) <= doorknobs_env::kKnobTolerance) {
        next.set_feature(door, "open", 1.0);
      }
      break;
    }
    return next;
  }
  return next;
}

struct Grid {
  int w = 0;
  int h = 0;
  int size() const { return w * h; }
  int index(int x, int y) const { return y * w + x; }
  int x(int i) const { return i % w; }
  int y(int i) const { return i / w; }
};

int find_root(std::vector<int>& parent, int i) {
  while (parent[i] != i) i = parent[i] = parent[parent[i]];
  return i;
}

std::string room_name(int i) {
  return std::string("room") + (i < 10 ? "0" : "") + std::to_string(i);
}

std::optional<Task> generate(const DkTypes& t, const PredicatePtr& in_room, const TaskSampler& sampler,
                             std::mt19937_64& rng) {
  const auto& rg = sampler.ranges;
  if (rg.size_min < 2 || rg.size_max < rg.size_min || rg.novelty_min < 0 ||
      rg.novelty_max < rg.novelty_min) {
    throw Error("doorknobs: invalid structural ranges");
  }
  std::vector<Grid> shapes;
  for (int w = 2; w <= rg.size_max; ++w) {
    for (int h = 2; w * h <= rg.size_max; ++h) {
      if (w * h >= rg.size_min) shapes.push_back({w, h});
    }
  }
  if (shapes.empty()) {
    for (int w = 2; w <= rg.size_max; ++w) {
      if (w >= rg.size_min) shapes.push_back({w, 1});
    }
  }
  if (shapes.empty()) return std::nullopt;
  const Grid grid = shapes[std::uniform_int_distribution<std::size_t>(0, shapes.size() - 1)(rng)];
  const int k = std::uniform_int_distribution<int>(rg.novelty_min, rg.novelty_max)(rng);

  // Random spanning tree over grid neighbours.
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < grid.size(); ++i) {
    if (grid.x(i) + 1 < grid.w) edges.emplace_back(i, i + 1);
    if (grid.y(i) + 1 < grid.h) edges.emplace_back(i, i + grid.w);
  }
  std::shuffle(edges.begin(), edges.end(), rng);
  std::vector<int> parent(static_cast<std::size_t>(grid.size()));
  std::iota(parent.begin(), parent.end(), 0);
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(grid.size()));
  for (auto [a, b] : edges) {
    const int ra = find_root(parent, a);
    const int rb = find_root(parent, b);
    if (ra == rb) continue;
    parent[ra] = rb;
    adj[a].push_back(b);
    adj[b].push_back(a);
  }

  // Tree paths long enough to host k pairwise non-touching doors.
  const int min_len = std::max(2 * k - 1, 1);
  std::vector<std::vector<int>> prev(static_cast<std::size_t>(grid.size()));
  std::vector<std::pair<int, int>> pairs;
  std::vector<std::vector<int>> dist(static_cast<std::size_t>(grid.size()));
  for (int s = 0; s < grid.size(); ++s) {
    auto& d = dist[s];
    auto& p = prev[s];
    d.assign(static_cast<std::size_t>(grid.size()), -1);
    p.assign(static_cast<std::size_t>(grid.size()), -1);
    std::vector<int> queue{s};
    d[s] = 0;
    for (std::size_t qi = 0; qi < queue.size(); ++qi) {
      const int u = queue[qi];
      for (int v : adj[u]) {
        if (d[v] >= 0) continue;
        d[v] = d[u] + 1;
        p[v] = u;
        queue.push_back(v);
      }
    }
    for (int g = 0; g < grid.size(); ++g) {
      if (d[g] >= min_len) pairs.emplace_back(s, g);
    }
  }
  if (pairs.empty()) return std::nullopt;
  const auto [start, goal] = pairs[std::uniform_int_distribution<std::size_t>(0, pairs.size() - 1)(rng)];
  std::vector<int> path{goal};
  while (path.back() != start) path.push_back(prev[start][path.back()]);
  std::reverse(path.begin(), path.end());
  const int edges_on_path = static_cast<int>(path.size()) - 1;

  std::vector<int> pool(static_cast<std::size_t>(edges_on_path - k + 1));
  std::iota(pool.begin(), pool.end(), 0);
  std::shuffle(pool.begin(), pool.end(), rng);
  std::vector<int> picks(pool.begin(), pool.begin() + k);
  std::sort(picks.begin(), picks.end());

  std::mt19937_64 world_rng(sampler.world_seed ^ 0xd00c0b5ULL);
  const double target =
      std::uniform_real_distribution<double>(1.0, 2.0 * std::numbers::pi - 1.0)(world_rng);

  Task task;
  State& s = task.initial_state;
  std::vector<Object> rooms;
  for (int i = 0; i < grid.size(); ++i) {
    Object room(room_name(i), t.room);
    std::vector<double> v{static_cast<double>(grid.x(i)), static_cast<double>(grid.y(i)), 0, 0, 0, 0};
    for (int j : adj[i]) {
      const int f = direction_feature(grid.x(j) - grid.x(i), grid.y(j) - grid.y(i));
      v[static_cast<std::size_t>(f)] = 1.0;
    }
    s.set(room, std::move(v));
    rooms.push_back(room);
    task.objects.push_back(room);
  }
  const Object robot("robby", t.robot);
  s.set(robot, {static_cast<double>(grid.x(start)), static_cast<double>(grid.y(start))});
  task.objects.push_back(robot);
  for (int i = 0; i < k; ++i) {
    const int e = picks[i] + i;
    const int a = path[e];
    const int b = path[e + 1];
    Object door("door" + std::to_string(i), t.door);
    s.set(door, {0.5 * (grid.x(a) + grid.x(b)), 0.5 * (grid.y(a) + grid.y(b)), 0.0, target, 0.0});
    task.objects.push_back(door);
  }
  std::sort(task.objects.begin(), task.objects.end());
  task.goal.emplace(in_room, std::vector<Object>{robot, rooms[goal]});
  task.horizon = doorknobs_env::kHorizon;
  return task;
}

EnvSpec build() {
  static const DkTypes t;
  EnvSpec env;
  env.name = "doorknobs";
  env.types = {t.robot, t.room, t.door};
  env.skills = {
      make_skill("MoveRobot", {t.robot, t.room, t.room}, {}),
      make_skill(std::string(kRunLowLevelAction), {}, {{0.0, 1.0}}),
  };
  auto in_room = make_predicate("RobotInRoom", {t.robot, t.room}, [](const State& s, std::span<const Object> a) {
    return robot_in_room(s, a[0], a[1]);
  });
  auto conn = make_predicate("Connected", {t.room, t.room}, [](const State& s, std::span<const Object> a) {
    return connected(s, a[0], a[1]);
  });
  env.predicates = {in_room};
  env.planner_predicates = {conn};

  Operator move;
  move.name = "MoveRobot";
  move.parameters = {{"robot", t.robot}, {"current_room", t.room}, {"target_room", t.room}};
  move.preconditions = {{conn, {1, 2}}, {in_room, {0, 1}}};
  move.add_effects = {{in_room, {0, 2}}};
  move.delete_effects = {{in_room, {0, 1}}};
  move.linked_skill = env.skills[0];
  move.skill_args = {0, 1, 2};
  env.operators = {std::make_shared<const Operator>(std::move(move))};
  for (const auto& op : env.operators) op->validate();

  env.interactable_types = {"door"};
  env.position_features = {{"robot", {0, 1}}, {"room", {0, 1}}, {"door", {0, 1}}};
  env.hidden_features = {{"door", {0, 1}}};
  env.max_objects = {{"robot", 1}, {"room", 25}, {"door", 5}};
  env.default_cycles = 100;
  env.default_eval_tasks = 10;
  env.train_ranges = {4, 4, 1, 1};
  env.eval_ranges = {4, 25, 2, 5};
  env.transition = transition;
  env.generate = [in_room](const TaskSampler& sampler, std::mt19937_64& rng) {
    return generate(t, in_room, sampler, rng);
  };
  env.resolved_novelties = [](const State& s) {
    int open = 0;
    for (const auto& d : s.objects_of_type("door")) open += s.get(d, "open") >= 0.5 ? 1 : 0;
    return open;
  };
  return env;
}

}  // namespace

const EnvSpec& doorknobs() {
  static const EnvSpec env = build();
  return env;
}

}  // namespace bpl
