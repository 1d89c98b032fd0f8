#include "bpl/testkit/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <numbers>
#include <queue>
#include <set>

namespace bpl::testkit {

std::optional<int> bfs_plan_length(const AtomSet& init, const AtomSet& goal, std::span<const GroundOperator> ops,
                                   std::size_t max_states) {
  auto satisfied = [&](const AtomSet& s) {
    return std::includes(s.begin(), s.end(), goal.begin(), goal.end());
  };
  std::map<AtomSet, int> depth{{init, 0}};
  std::deque<AtomSet> queue{init};
  while (!queue.empty()) {
    AtomSet s = std::move(queue.front());
    queue.pop_front();
    const int d = depth.at(s);
    if (satisfied(s)) return d;
    if (depth.size() > max_states) return std::nullopt;
    for (const auto& op : ops) {
      if (!std::includes(s.begin(), s.end(), op.preconditions.begin(), op.preconditions.end())) continue;
      AtomSet next = s;
      for (const auto& a : op.delete_effects) next.erase(a);
      for (const auto& a : op.add_effects) next.insert(a);
      if (depth.emplace(next, d + 1).second) queue.push_back(std::move(next));
    }
  }
  return std::nullopt;
}

std::vector<GroundOperator> ground_exhaustive(std::span<const OperatorPtr> operators,
                                              std::span<const Object> objects, const AtomSet& init_atoms) {
  std::set<std::string> fluent;
  for (const auto& op : operators) {
    for (const auto& t : op->add_effects) fluent.insert(t.predicate->name);
    for (const auto& t : op->delete_effects) fluent.insert(t.predicate->name);
  }
  std::vector<GroundOperator> out;
  for (const auto& op : operators) {
    const std::size_t n = op->parameters.size();
    std::vector<std::vector<Object>> pools(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (const auto& o : objects) {
        if (o.type().name == op->parameters[i].type->name) pools[i].push_back(o);
      }
      std::sort(pools[i].begin(), pools[i].end());
    }
    std::size_t total = 1;
    for (const auto& p : pools) total *= p.size();
    for (std::size_t code = 0; code < total; ++code) {
      std::vector<Object> binding;
      std::size_t rest = code;
      // Most significant digit first so the output is lexicographic.
      std::vector<std::size_t> digits(n);
      for (std::size_t i = n; i-- > 0;) {
        digits[i] = rest % pools[i].size();
        rest /= pools[i].size();
      }
      for (std::size_t i = 0; i < n; ++i) binding.push_back(pools[i][digits[i]]);
      bool keep = true;
      for (const auto& t : op->preconditions) {
        if (!fluent.contains(t.predicate->name) && !init_atoms.contains(instantiate(t, binding))) keep = false;
      }
      if (!keep) continue;
      GroundOperator g;
      g.op = op;
      g.binding = binding;
      for (const auto& t : op->preconditions) g.preconditions.insert(instantiate(t, binding));
      for (const auto& t : op->add_effects) g.add_effects.insert(instantiate(t, binding));
      for (const auto& t : op->delete_effects) g.delete_effects.insert(instantiate(t, binding));
      out.push_back(std::move(g));
    }
  }
  return out;
}

int hmax_fixpoint(const AtomSet& atoms, const AtomSet& goal, std::span<const GroundOperator> ops) {
  std::map<GroundAtom, int> cost;
  for (const auto& a : atoms) cost[a] = 0;
  auto value = [&](const AtomSet& set) {
    int worst = 0;
    for (const auto& a : set) {
      auto it = cost.find(a);
      if (it == cost.end()) return kInfiniteCost;
      worst = std::max(worst, it->second);
    }
    return worst;
  };
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& op : ops) {
      const int pre = value(op.preconditions);
      if (pre == kInfiniteCost) continue;
      for (const auto& a : op.add_effects) {
        auto it = cost.find(a);
        if (it == cost.end() || it->second > pre + op.cost) {
          cost[a] = pre + op.cost;
          changed = true;
        }
      }
    }
  }
  return value(goal);
}

std::optional<int> relaxed_optimum(const AtomSet& atoms, const AtomSet& goal, std::span<const GroundOperator> ops,
                                   std::size_t max_states) {
  using Node = std::pair<int, AtomSet>;
  std::priority_queue<Node, std::vector<Node>, std::greater<>> open;
  std::map<AtomSet, int> best{{atoms, 0}};
  open.emplace(0, atoms);
  while (!open.empty()) {
    auto [g, s] = open.top();
    open.pop();
    if (best.at(s) < g) continue;
    if (std::includes(s.begin(), s.end(), goal.begin(), goal.end())) return g;
    if (best.size() > max_states) return std::nullopt;
    for (const auto& op : ops) {
      if (!std::includes(s.begin(), s.end(), op.preconditions.begin(), op.preconditions.end())) continue;
      if (std::includes(s.begin(), s.end(), op.add_effects.begin(), op.add_effects.end())) continue;
      AtomSet next = s;
      next.insert(op.add_effects.begin(), op.add_effects.end());
      auto [it, fresh] = best.emplace(next, g + op.cost);
      if (!fresh && it->second <= g + op.cost) continue;
      it->second = g + op.cost;
      open.emplace(g + op.cost, std::move(next));
    }
  }
  return std::nullopt;
}

MLPGrads finite_difference_grad(const MLPParams& params, std::span<const double> input, double h) {
  MLPGrads g = zeros_like(params);
  MLPParams p = params;
  auto probe = [&](double& slot) {
    const double saved = slot;
    slot = saved + h;
    const double up = forward(p, input);
    slot = saved - h;
    const double down = forward(p, input);
    slot = saved;
    return (up - down) / (2.0 * h);
  };
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    auto& w = p.layers[l].weights;
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) g.layers[l].weights(r, c) = probe(w(r, c));
    }
    auto& b = p.layers[l].bias;
    for (Eigen::Index r = 0; r < b.size(); ++r) g.layers[l].bias(r) = probe(b(r));
  }
  return g;
}

double max_relative_error(const MLPParams& a, const MLPParams& b, double floor) {
  if (!a.same_shape(b)) throw DimensionError("max_relative_error: shape mismatch");
  double worst = 0.0;
  auto take = [&](double x, double y) {
    const double scale = std::max({std::abs(x), std::abs(y), floor});
    worst = std::max(worst, std::abs(x - y) / scale);
  };
  for (std::size_t l = 0; l < a.layers.size(); ++l) {
    const auto& wa = a.layers[l].weights;
    const auto& wb = b.layers[l].weights;
    for (Eigen::Index i = 0; i < wa.size(); ++i) take(wa.data()[i], wb.data()[i]);
    for (Eigen::Index i = 0; i < a.layers[l].bias.size(); ++i) take(a.layers[l].bias(i), b.layers[l].bias(i));
  }
  return worst;
}

namespace {

std::vector<Task> alternating(int count, std::uint64_t seed, StructuralRanges lsd_ranges,
                              StructuralRanges dk_ranges) {
  TaskSampler a{Split::kEval, seed, lsd_ranges, seed};
  TaskSampler b{Split::kEval, seed + 1, dk_ranges, seed};
  const int half = count / 2;
  auto left = sample_tasks(light_switch_door(), a, count - half);
  auto right = sample_tasks(doorknobs(), b, half);
  std::vector<Task> out;
  for (int i = 0; i < count; ++i) {
    if (i % 2 == 0 && !left.empty()) {
      out.push_back(std::move(left.front()));
      left.erase(left.begin());
    } else {
      out.push_back(std::move(right.front()));
      right.erase(right.begin());
    }
  }
  return out;
}

}  // namespace

std::vector<Task> door_free_instances(int count, std::uint64_t seed, int max_size) {
  return alternating(count, seed, {2, max_size, 0, 0}, {2, max_size, 0, 0});
}

std::vector<Task> doored_instances(int count, std::uint64_t seed, int max_size, int min_doors, int max_doors) {
  return alternating(count, seed, {2 * max_doors + 1, max_size, min_doors, max_doors},
                     {4, max_size, min_doors, max_doors});
}

const EnvSpec& env_of(const Task& task) {
  for (const EnvSpec* env : {&light_switch_door(), &doorknobs(), &coffee()}) {
    const auto first = task.objects.front();
    for (const auto& t : env->types) {
      if (t.get() == &first.type()) return *env;
    }
  }
  throw Error("env_of: task " + task.id + " belongs to no known environment");
}

std::optional<std::size_t> first_blocked_action(const EnvSpec& env, const Task& task, const Skeleton& skeleton) {
  State s = task.initial_state;
  for (std::size_t i = 0; i < skeleton.size(); ++i) {
    const GroundAction a = skeleton[i].op->make_action(s, skeleton[i].binding);
    State next = step(env, s, a);
    if (next == s) return i;
    s = std::move(next);
  }
  return std::nullopt;
}

BridgeAction ScriptedBridge::act(const State& state, const BridgeMDP& mdp, std::mt19937_64&) {
  const EnvSpec& env = *mdp.env;
  int rll = -1;
  for (std::size_t i = 0; i < mdp.actions.skills.size(); ++i) {
    if (mdp.actions.skills[i]->name == kRunLowLevelAction) rll = static_cast<int>(i);
  }
  auto low_level = [&](std::vector<double> params) {
    ++low_level_;
    BridgeAction b;
    b.skill_index = rll;
    b.action = GroundAction(mdp.actions.skills[static_cast<std::size_t>(rll)], {}, std::move(params));
    return b;
  };
  if (rll >= 0) {
    const Object& robot = robot_of(env, state);
    if (env.name == "light_switch_door") {
      const double x = state.get(robot, "x");
      for (const auto& d : state.objects_of_type("door")) {
        if (std::abs(state.get(d, "x") - x) != 0.5 || state.get(d, "open") >= 0.5) continue;
        const double latch = state.get(d, "latch");
        if (latch < lsd::kLatchLow || latch > lsd::kLatchHigh) return low_level({0.8, 0.0});
        return low_level({0.8, 1.0});
      }
    } else if (env.name == "doorknobs") {
      const double x = state.get(robot, "x");
      const double y = state.get(robot, "y");
      for (const auto& d : state.objects_of_type("door")) {
        if (state.get(d, "open") >= 0.5) continue;
        const double dx = std::abs(state.get(d, "x") - x);
        const double dy = std::abs(state.get(d, "y") - y);
        if (!((dx == 0.5 && dy == 0.0) || (dx == 0.0 && dy == 0.5))) continue;
        return low_level({state.get(d, "target") / (2.0 * std::numbers::pi)});
      }
    } else if (env.name == "coffee") {
      for (const auto& j : state.objects_of_type("jug")) {
        const double rot = state.get(j, "rotation");
        if (state.get(j, "held") < 0.5 && std::abs(rot) > coffee_env::kGraspTolerance) {
          return low_level({std::clamp(-rot / std::numbers::pi, -1.0, 1.0)});
        }
      }
    }
  }
  return call_planner_action(mdp.actions);
}

std::pair<double, double> two_action_sanity_q(int iters, std::uint64_t seed) {
  ActionSpace space;
  space.skills = {make_skill("Good", {}, {}), make_skill("Bad", {}, {})};
  space.call_planner = false;
  LearnerConfig cfg;
  cfg.batch_size = 32;
  cfg.train_iters = iters;
  QLearner learner(space, 1, cfg, seed);
  const std::vector<double> x{1.0};
  auto add = [&](int skill, double reward) {
    BridgeAction a;
    a.skill_index = skill;
    a.action = GroundAction(space.skills[static_cast<std::size_t>(skill)], {}, {});
    TransitionRecord r;
    r.state = x;
    r.action = encode_action(space, a);
    r.reward = reward;
    r.next_state = x;
    r.terminal = true;
    r.next_mask = {1, 1, 0};
    learner.buffer().add(std::move(r));
  };
  add(0, 1.0);
  add(1, 0.0);
  learner.train_cycle();
  std::vector<BridgeAction> cands(2);
  for (int i = 0; i < 2; ++i) {
    cands[static_cast<std::size_t>(i)].skill_index = i;
    cands[static_cast<std::size_t>(i)].action = GroundAction(space.skills[static_cast<std::size_t>(i)], {}, {});
  }
  const auto q = learner.q_values(x, cands);
  return {q[0], q[1]};
}

}  // namespace bpl::testkit
