#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "bpl/bridge.hpp"
#include "bpl/envs.hpp"

namespace fixtures {

// Hand-built Light Switch Door task: `cells` cells at x = 0..cells-1, the
// robot and light at the given cells, doors at the given boundary positions.
inline bpl::Task lsd_task(int cells, double robot_x, double light_x, const std::vector<double>& door_xs = {},
                          double light_level = 0.0) {
  const bpl::EnvSpec& env = bpl::light_switch_door();
  bpl::Task t;
  t.id = "fixture";
  bpl::State& s = t.initial_state;
  const bpl::Object robot("robby", env.type("robot"));
  s.set(robot, {robot_x});
  t.objects.push_back(robot);
  for (int c = 0; c < cells; ++c) {
    bpl::Object cell("cell" + std::to_string(c), env.type("cell"));
    s.set(cell, {static_cast<double>(c)});
    t.objects.push_back(cell);
  }
  const bpl::Object light("light0", env.type("light"));
  s.set(light, {light_level, light_x});
  t.objects.push_back(light);
  for (std::size_t i = 0; i < door_xs.size(); ++i) {
    bpl::Object door("door" + std::to_string(i), env.type("door"));
    s.set(door, {door_xs[i], 0.0, 0.0});
    t.objects.push_back(door);
  }
  std::sort(t.objects.begin(), t.objects.end());
  t.goal.emplace(env.predicates.front(), std::vector<bpl::Object>{light});
  t.horizon = 30;
  t.validate();
  return t;
}

inline const bpl::PredicatePtr& predicate(const bpl::EnvSpec& env, const std::string& name) {
  for (const auto& p : env.planner_predicates) {
    if (p->name == name) return p;
  }
  for (const auto& p : env.predicates) {
    if (p->name == name) return p;
  }
  throw bpl::Error("no predicate " + name);
}

inline bool has_atom(const bpl::AtomSet& atoms, const std::string& text) {
  return std::any_of(atoms.begin(), atoms.end(), [&](const bpl::GroundAtom& a) { return a.to_string() == text; });
}

// One-hidden-layer net over [state | action] whose hidden units copy the
// action one-hot, so Q(x, a) = head[skill_index].
inline bpl::MLPParams slot_value_net(std::size_t state_dim, std::size_t encoding_dim, std::vector<double> head) {
  bpl::MLPParams p;
  const auto h = static_cast<Eigen::Index>(head.size());
  Eigen::MatrixXd w1 = Eigen::MatrixXd::Zero(h, static_cast<Eigen::Index>(state_dim + encoding_dim));
  for (Eigen::Index i = 0; i < h; ++i) w1(i, static_cast<Eigen::Index>(state_dim) + i) = 1.0;
  p.layers.push_back({w1, Eigen::VectorXd::Zero(h)});
  Eigen::MatrixXd w2(1, h);
  for (Eigen::Index i = 0; i < h; ++i) w2(0, i) = head[static_cast<std::size_t>(i)];
  p.layers.push_back({w2, Eigen::VectorXd::Zero(1)});
  return p;
}

}  // namespace fixtures
