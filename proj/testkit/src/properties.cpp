#include "bpl/testkit/properties.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "bpl/config.hpp"
#include "bpl/harness.hpp"
#include "bpl/testkit/oracles.hpp"

namespace bpl::testkit {

namespace {

CheckResult pass(std::string name, std::string detail) { return {std::move(name), true, std::move(detail)}; }
CheckResult fail(std::string name, std::string detail) { return {std::move(name), false, std::move(detail)}; }

struct Ground {
  AtomSet init;
  std::vector<GroundOperator> ops;
};

Ground ground_task(const EnvSpec& env, const Task& task) {
  Ground g;
  const auto preds = env.all_predicates();
  g.init = abstract(task.initial_state, preds);
  g.ops = ground(env.operators, task.objects, g.init);
  return g;
}

// Replays a skeleton symbolically; false if some step is inapplicable or the goal is missed.
bool skeleton_valid(const AtomSet& init, const AtomSet& goal, const Skeleton& plan) {
  AtomSet s = init;
  for (const auto& op : plan) {
    if (!applicable(op, s)) return false;
    s = bpl::apply(op, s);
  }
  return std::includes(s.begin(), s.end(), goal.begin(), goal.end());
}

std::vector<double> uniform_vector(std::size_t n, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

// Random walk of the ground-truth dynamics using the env skills with the first
// type-consistent binding and uniform parameters.
std::vector<State> random_walk(const EnvSpec& env, const Task& task, int steps, std::mt19937_64& rng) {
  std::vector<State> out{task.initial_state};
  BridgeSettings settings;
  settings.focus = false;
  for (int i = 0; i < steps; ++i) {
    const State& s = out.back();
    const BridgeMDP mdp = make_bridge_mdp(env, s, task.goal, settings, task.horizon);
    auto cands = candidate_actions(s, mdp, 1, rng);
    cands.erase(std::remove_if(cands.begin(), cands.end(), [](const auto& c) { return c.is_call_planner(); }),
                cands.end());
    if (cands.empty()) break;
    const auto& pick = cands[std::uniform_int_distribution<std::size_t>(0, cands.size() - 1)(rng)];
    out.push_back(step(env, s, *pick.action));
  }
  return out;
}

}  // namespace

CheckResult planner_optimality(int instances, std::uint64_t seed) {
  const std::string name = "planner_optimality";
  int checked = 0;
  for (const auto& task : door_free_instances(instances, seed)) {
    const EnvSpec& env = env_of(task);
    const Ground g = ground_task(env, task);
    const auto plan = astar_plan(g.init, task.goal, g.ops);
    const auto optimum = bfs_plan_length(g.init, task.goal, g.ops);
    if (!plan || !optimum) return fail(name, task.id + ": no plan found");
    if (static_cast<int>(plan->size()) != *optimum) {
      return fail(name, task.id + ": A* length " + std::to_string(plan->size()) + " vs BFS " +
                            std::to_string(*optimum));
    }
    if (!skeleton_valid(g.init, task.goal, *plan)) return fail(name, task.id + ": skeleton does not reach the goal");
    ++checked;
  }
  return pass(name, std::to_string(checked) + " door-free instances, A* length == BFS optimum");
}

CheckResult heuristic_ordering(int instances, std::uint64_t seed) {
  const std::string name = "heuristic_ordering";
  int checked = 0;
  int strict = 0;
  // Coffee instances add goals whose landmarks are not a single chain.
  std::vector<Task> tasks = door_free_instances(instances, seed);
  for (auto& t : sample_tasks(coffee(), {Split::kEval, seed, coffee().eval_ranges, seed}, 5)) {
    tasks.push_back(std::move(t));
  }
  for (const auto& task : tasks) {
    const EnvSpec& env = env_of(task);
    const Ground g = ground_task(env, task);
    const int hm = hmax(g.init, task.goal, g.ops);
    const int lm = lmcut(g.init, task.goal, g.ops);
    const auto hstar = bfs_plan_length(g.init, task.goal, g.ops);
    const auto hplus = relaxed_optimum(g.init, task.goal, g.ops);
    const int fix = hmax_fixpoint(g.init, task.goal, g.ops);
    if (!hstar || !hplus) return fail(name, task.id + ": oracle search failed");
    std::ostringstream d;
    d << task.id << ": hmax=" << hm << " fixpoint=" << fix << " lmcut=" << lm << " h+=" << *hplus
      << " h*=" << *hstar;
    if (!(0 <= hm && hm <= lm && lm <= *hplus && *hplus <= *hstar) || hm != fix) return fail(name, d.str());
    strict += hm < lm ? 1 : 0;
    ++checked;
  }
  return pass(name, std::to_string(checked) + " instances, 0 <= hmax <= lmcut <= h+ <= h* (hmax < lmcut on " +
                        std::to_string(strict) + ")");
}

CheckResult stuck_detection(int episodes, std::uint64_t seed) {
  const std::string name = "stuck_detection";
  // Door-free: every episode runs to plan exhaustion at the goal.
  for (const auto& task : door_free_instances(episodes, seed)) {
    const EnvSpec& env = env_of(task);
    auto plan = plan_from_state(env, task.initial_state, task.goal);
    if (!plan) return fail(name, task.id + ": no plan");
    PlanPolicy policy(*plan, env);
    State s = task.initial_state;
    for (;;) {
      const PlanOutput out = policy.next(s);
      if (out.status == PlanStatus::kStuck) return fail(name, task.id + ": false stuck");
      if (out.status == PlanStatus::kExhausted) break;
      s = step(env, s, *out.action);
      if (policy.check_progress(s) == Progress::kStuck) {
        return fail(name, task.id + ": false stuck after action " + std::to_string(policy.cursor()));
      }
    }
    if (!goal_holds(task.goal, s)) return fail(name, task.id + ": exhausted off the goal");
  }
  // Doored: stuck raised right after the first move that the world refuses.
  for (const auto& task : doored_instances(episodes, seed + 1)) {
    const EnvSpec& env = env_of(task);
    auto plan = plan_from_state(env, task.initial_state, task.goal);
    if (!plan) return fail(name, task.id + ": no plan");
    const auto blocked = first_blocked_action(env, task, *plan);
    if (!blocked) return fail(name, task.id + ": oracle found no blocked move");
    PlanPolicy policy(*plan, env);
    State s = task.initial_state;
    std::optional<std::size_t> stuck_at;
    for (std::size_t i = 0; !stuck_at; ++i) {
      const PlanOutput out = policy.next(s);
      if (out.status != PlanStatus::kOnTrack) break;
      s = step(env, s, *out.action);
      if (policy.check_progress(s) == Progress::kStuck) stuck_at = i;
    }
    if (stuck_at != blocked) {
      return fail(name, task.id + ": stuck at " + (stuck_at ? std::to_string(*stuck_at) : "never") +
                            ", first blocked move " + std::to_string(*blocked));
    }
    if (policy.next(s).status != PlanStatus::kStuck) return fail(name, task.id + ": stuck flag not latched");
  }
  return pass(name, std::to_string(episodes) + " door-free episodes without stuck, " + std::to_string(episodes) +
                        " doored episodes stuck at the first blocked move");
}

CheckResult grounding_matches_exhaustive(int instances, std::uint64_t seed) {
  const std::string name = "grounding_matches_exhaustive";
  std::vector<Task> tasks = door_free_instances(instances, seed);
  for (auto& t : doored_instances(instances / 2, seed + 5)) tasks.push_back(std::move(t));
  tasks.push_back(sample_task(coffee(), {Split::kTrain, seed, coffee().train_ranges, seed}));
  std::size_t total = 0;
  for (const auto& task : tasks) {
    const EnvSpec& env = env_of(task);
    const AtomSet init = abstract(task.initial_state, env.all_predicates());
    auto fast = ground(env.operators, task.objects, init);
    auto slow = ground_exhaustive(env.operators, task.objects, init);
    auto key = [](const GroundOperator& g) { return g.name(); };
    std::vector<std::string> a, b;
    std::transform(fast.begin(), fast.end(), std::back_inserter(a), key);
    std::transform(slow.begin(), slow.end(), std::back_inserter(b), key);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a != b) {
      return fail(name, task.id + ": " + std::to_string(a.size()) + " ground operators vs " +
                            std::to_string(b.size()) + " exhaustive");
    }
    for (const auto& g : fast) {
      auto it = std::find(slow.begin(), slow.end(), g);
      if (it->preconditions != g.preconditions || it->add_effects != g.add_effects ||
          it->delete_effects != g.delete_effects) {
        return fail(name, task.id + ": atoms differ for " + g.name());
      }
    }
    total += a.size();
  }
  return pass(name, std::to_string(tasks.size()) + " tasks, " + std::to_string(total) + " ground operators");
}

CheckResult gradient_check(int nets, std::uint64_t seed, double tolerance) {
  const std::string name = "gradient_check";
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int n = 0; n < nets; ++n) {
    const auto in = std::uniform_int_distribution<std::size_t>(1, 8)(rng);
    const auto depth = std::uniform_int_distribution<int>(1, 3)(rng);
    std::vector<std::size_t> hidden;
    for (int d = 0; d < depth; ++d) hidden.push_back(std::uniform_int_distribution<std::size_t>(2, 12)(rng));
    const MLPParams p = init_mlp(in, hidden, rng);
    const auto x = uniform_vector(in, rng, -2.0, 2.0);
    const double upstream = std::uniform_real_distribution<double>(0.5, 2.0)(rng);
    MLPGrads analytic = backward(p, x, upstream);
    MLPGrads numeric = finite_difference_grad(p, x);
    for (auto& l : numeric.layers) {
      l.weights *= upstream;
      l.bias *= upstream;
    }
    worst = std::max(worst, max_relative_error(analytic, numeric));
  }
  std::ostringstream d;
  d << nets << " random nets, max relative error " << worst << " (tolerance " << tolerance << ")";
  return worst <= tolerance ? pass(name, d.str()) : fail(name, d.str());
}

CheckResult sanity_mdp_q(double tolerance) {
  const std::string name = "sanity_mdp_q";
  const auto [good, bad] = two_action_sanity_q(3000, 5);
  std::ostringstream d;
  d << "Q(good)=" << good << " Q(bad)=" << bad << " vs (1, 0), tolerance " << tolerance;
  return std::abs(good - 1.0) <= tolerance && std::abs(bad) <= tolerance ? pass(name, d.str()) : fail(name, d.str());
}

CheckResult epsilon_closed_form() {
  const std::string name = "epsilon_closed_form";
  const EpsilonSchedule sched;
  for (std::uint64_t t : {0ULL, 1ULL, 10ULL, 5'000ULL, 10'000ULL, 24'999ULL, 25'000ULL, 26'000ULL, 1'000'000ULL}) {
    const double expected = std::max(0.05, 1.0 - 3.8e-5 * static_cast<double>(t));
    if (sched.value(t) != expected) {
      return fail(name, "t=" + std::to_string(t) + ": " + std::to_string(sched.value(t)));
    }
  }
  if (std::abs(sched.value(10'000) - 0.62) > 1e-12) return fail(name, "t=10^4 is not 0.62");
  return pass(name, "epsilon(t) == max(0.05, 1 - 3.8e-5 t) exactly; epsilon(10^4) = 0.62");
}

CheckResult polyak_adam_fixtures(double tolerance) {
  const std::string name = "polyak_adam_fixtures";
  auto scalar_net = [](double w, double b) {
    MLPParams p;
    p.layers.push_back({Eigen::MatrixXd::Constant(1, 1, w), Eigen::VectorXd::Constant(1, b)});
    return p;
  };
  // Adam on one scalar weight: two steps with g = 1 then g = 0.5.
  MLPParams p = scalar_net(0.3, 0.0);
  AdamState st = init_adam(p);
  const AdamConfig cfg;
  adam_step(p, scalar_net(1.0, 0.0), st, cfg);
  const double step1 = 0.3 - 1e-3 * 1.0 / (1.0 + 1e-8);
  if (std::abs(p.layers[0].weights(0, 0) - step1) > tolerance || st.t != 1) return fail(name, "adam step 1");
  adam_step(p, scalar_net(0.5, 0.0), st, cfg);
  const double m = 0.9 * 0.1 + 0.1 * 0.5;
  const double v = 0.999 * 0.001 + 0.001 * 0.25;
  const double mhat = m / (1.0 - 0.81);
  const double vhat = v / (1.0 - 0.999 * 0.999);
  const double step2 = step1 - 1e-3 * mhat / (std::sqrt(vhat) + 1e-8);
  if (std::abs(p.layers[0].weights(0, 0) - step2) > tolerance) return fail(name, "adam step 2");
  if (p.layers[0].bias(0) != 0.0) return fail(name, "adam moved a zero-gradient parameter");
  // Weight decay adds lambda * w to the gradient.
  MLPParams q = scalar_net(2.0, 0.0);
  AdamState sq = init_adam(q);
  adam_step(q, scalar_net(0.0, 0.0), sq, {1e-3, 0.9, 0.999, 1e-8, 0.1});
  const double g = 0.1 * 2.0;
  if (std::abs(q.layers[0].weights(0, 0) - (2.0 - 1e-3 * g / (g + 1e-8))) > tolerance) {
    return fail(name, "adam weight decay");
  }

  const MLPParams zero = scalar_net(0.0, 0.0);
  const MLPParams one = scalar_net(1.0, 1.0);
  const MLPParams mixed = polyak(zero, one, 0.0025);
  if (std::abs(mixed.layers[0].weights(0, 0) - 0.0025) > tolerance ||
      std::abs(mixed.layers[0].bias(0) - 0.0025) > tolerance) {
    return fail(name, "polyak tau=0.0025");
  }
  if (!(polyak(zero, one, 1.0) == one) || !(polyak(zero, one, 0.0) == zero)) return fail(name, "polyak endpoints");
  const MLPParams a = scalar_net(0.4, -0.2);
  const MLPParams b = scalar_net(-1.2, 0.6);
  const MLPParams c = polyak(a, b, 0.3);
  if (std::abs(c.layers[0].weights(0, 0) - (0.7 * 0.4 + 0.3 * -1.2)) > tolerance) return fail(name, "polyak mix");
  return pass(name, "adam (2 steps, weight decay) and polyak match hand arithmetic within 1e-12");
}

CheckResult forward_product_matches_forward(std::uint64_t seed) {
  const std::string name = "forward_product_matches_forward";
  std::mt19937_64 rng(seed);
  const MLPParams p = init_mlp(7, {9, 5}, rng);
  Eigen::MatrixXd states(4, 3), actions(3, 5);
  for (Eigen::Index i = 0; i < states.size(); ++i) states.data()[i] = std::normal_distribution<double>()(rng);
  for (Eigen::Index i = 0; i < actions.size(); ++i) actions.data()[i] = std::normal_distribution<double>()(rng);
  const Eigen::MatrixXd q = forward_product(p, states, actions);
  double worst = 0.0;
  for (Eigen::Index s = 0; s < states.cols(); ++s) {
    for (Eigen::Index a = 0; a < actions.cols(); ++a) {
      std::vector<double> x(7);
      for (int k = 0; k < 4; ++k) x[k] = states(k, s);
      for (int k = 0; k < 3; ++k) x[4 + k] = actions(k, a);
      worst = std::max(worst, std::abs(q(s, a) - forward(p, x)));
    }
  }
  // backward_batch is the weighted sum of single-sample gradients.
  Eigen::MatrixXd inputs(7, 4);
  for (Eigen::Index i = 0; i < inputs.size(); ++i) inputs.data()[i] = std::normal_distribution<double>()(rng);
  Eigen::VectorXd up(4);
  up << 0.5, -1.0, 2.0, 0.25;
  const MLPGrads batch = backward_batch(p, inputs, up);
  MLPGrads sum = zeros_like(p);
  for (Eigen::Index j = 0; j < 4; ++j) {
    std::vector<double> x(inputs.col(j).data(), inputs.col(j).data() + 7);
    const MLPGrads gj = backward(p, x, up(j));
    for (std::size_t l = 0; l < sum.layers.size(); ++l) {
      sum.layers[l].weights += gj.layers[l].weights;
      sum.layers[l].bias += gj.layers[l].bias;
    }
  }
  const double gerr = max_relative_error(batch, sum);
  std::ostringstream d;
  d << "max |product - forward| " << worst << ", batch grad rel err " << gerr;
  return worst <= 1e-12 && gerr <= 1e-12 ? pass(name, d.str()) : fail(name, d.str());
}

CheckResult checkpoint_roundtrip(std::uint64_t seed) {
  const std::string name = "checkpoint_roundtrip";
  std::mt19937_64 rng(seed);
  const MLPParams p = init_mlp(5, {4, 3}, rng);
  if (!(mlp_from_checkpoint(mlp_to_checkpoint(p)) == p)) return fail(name, "mlp checkpoint not bit-exact");
  const EnvSpec& env = light_switch_door();
  const ActionSpace space = make_action_space(env, true);
  LearnerConfig cfg;
  QLearner a(space, projected_dim(env, StateView::kFocused), cfg, seed);
  QLearner b(space, projected_dim(env, StateView::kFocused), cfg, seed + 1);
  b.load_checkpoint(a.checkpoint());
  if (!(a.online() == b.online()) || !(a.target() == b.target()) || a.steps() != b.steps()) {
    return fail(name, "learner checkpoint not restored");
  }
  try {
    mlp_from_checkpoint("{\"format\":\"nope\"}");
    return fail(name, "malformed checkpoint accepted");
  } catch (const Error&) {
  }
  return pass(name, "mlp and learner checkpoints restore bit-exactly; malformed input rejected");
}

CheckResult abstraction_matches_enumeration(std::uint64_t seed) {
  const std::string name = "abstraction_matches_enumeration";
  std::mt19937_64 rng(seed);
  std::size_t states = 0;
  for (const EnvSpec* env : {&light_switch_door(), &doorknobs(), &coffee()}) {
    const auto tasks = sample_tasks(*env, {Split::kTrain, seed, env->train_ranges, seed}, 3);
    const auto preds = env->all_predicates();
    for (const auto& task : tasks) {
      for (const auto& s : random_walk(*env, task, 15, rng)) {
        const AtomSet atoms = abstract(s, preds);
        AtomSet expected;
        const auto objs = s.objects();
        for (const auto& p : preds) {
          std::vector<std::vector<Object>> tuples{{}};
          for (const auto& t : p->arg_types) {
            std::vector<std::vector<Object>> next;
            for (const auto& prefix : tuples) {
              for (const auto& o : objs) {
                if (o.type().name != t->name) continue;
                auto ext = prefix;
                ext.push_back(o);
                next.push_back(std::move(ext));
              }
            }
            tuples = std::move(next);
          }
          for (const auto& args : tuples) {
            if (p->classifier(s, args)) expected.emplace(p, args);
          }
        }
        if (atoms != expected) return fail(name, env->name + ": abstract() differs from enumeration");
        ++states;
      }
    }
  }
  return pass(name, std::to_string(states) + " visited states across 3 environments");
}

CheckResult task_generator_invariants(int per_split) {
  const std::string name = "task_generator_invariants";
  int checked = 0;
  for (const EnvSpec* env : {&light_switch_door(), &doorknobs(), &coffee()}) {
    for (Split split : {Split::kTrain, Split::kEval}) {
      const StructuralRanges r = env->default_ranges(split);
      for (std::uint64_t seed : {0ULL, 1ULL, 7ULL}) {
        TaskSampler sampler{split, seed, r, seed};
        const auto tasks = sample_tasks(*env, sampler, per_split);
        const auto prefix = sample_tasks(*env, sampler, per_split / 2);
        for (std::size_t i = 0; i < prefix.size(); ++i) {
          if (prefix[i].id != tasks[i].id || !(prefix[i].initial_state == tasks[i].initial_state)) {
            return fail(name, env->name + ": task " + std::to_string(i) + " depends on the count");
          }
        }
        for (const auto& t : tasks) {
          t.validate();
          const int doors = static_cast<int>(t.initial_state.objects_of_type("door").size());
          int size = 0;
          if (env->name == "light_switch_door") size = static_cast<int>(t.initial_state.objects_of_type("cell").size());
          if (env->name == "doorknobs") size = static_cast<int>(t.initial_state.objects_of_type("room").size());
          if (env->name != "coffee") {
            if (size < r.size_min || size > r.size_max || doors < r.novelty_min || doors > r.novelty_max) {
              return fail(name, t.id + ": size " + std::to_string(size) + " doors " + std::to_string(doors) +
                                    " outside the ranges");
            }
          }
          // The goal is reachable once every novelty is removed.
          State open = t.initial_state;
          for (const auto& d : open.objects_of_type("door")) open.set_feature(d, "open", 1.0);
          for (const auto& j : open.objects_of_type("jug")) open.set_feature(j, "rotation", 0.0);
          const auto plan = plan_from_state(*env, open, t.goal);
          if (!plan) return fail(name, t.id + ": goal unreachable with all novelties removed");
          State s = open;
          for (const auto& op : *plan) s = step(*env, s, op.op->make_action(s, op.binding));
          if (!goal_holds(t.goal, s)) return fail(name, t.id + ": plan fails with all novelties removed");
          ++checked;
        }
      }
    }
  }
  return pass(name, std::to_string(checked) + " sampled tasks valid, within ranges and solvable without novelties");
}

CheckResult transition_determinism(std::uint64_t seed) {
  const std::string name = "transition_determinism";
  std::mt19937_64 rng(seed);
  int steps = 0;
  for (const EnvSpec* env : {&light_switch_door(), &doorknobs(), &coffee()}) {
    const auto tasks = sample_tasks(*env, {Split::kEval, seed, env->eval_ranges, seed}, 3);
    for (const auto& task : tasks) {
      const auto walk = random_walk(*env, task, 20, rng);
      for (std::size_t i = 0; i + 1 < walk.size(); ++i) {
        if (walk[i + 1].objects() != walk[i].objects()) return fail(name, task.id + ": object set changed");
        ++steps;
      }
    }
  }
  // A closed door blocks MoveRight; an open one does not.
  const EnvSpec& lsd_env = light_switch_door();
  Task t = sample_task(lsd_env, {Split::kTrain, 3, {3, 3, 1, 1}, 3});
  const Object robot = robot_of(lsd_env, t.initial_state);
  const Object door = t.initial_state.objects_of_type("door").front();
  State s = t.initial_state;
  s.set_feature(robot, "x", s.get(door, "x") - 0.5);
  const GroundAction right(lsd_env.skill("MoveRight"), {robot}, {});
  if (!(step(lsd_env, s, right) == s)) return fail(name, "MoveRight passed a closed door");
  State o = s;
  o.set_feature(door, "open", 1.0);
  if (step(lsd_env, o, right).get(robot, "x") != s.get(robot, "x") + 1.0) return fail(name, "open door blocked");
  if (!(step(lsd_env, s, right) == step(lsd_env, s, right))) return fail(name, "step not deterministic");
  return pass(name, std::to_string(steps) + " random steps preserve objects; door blocking holds");
}

CheckResult candidate_set_properties(std::uint64_t seed) {
  const std::string name = "candidate_set_properties";
  std::mt19937_64 rng(seed);
  for (const EnvSpec* env : {&light_switch_door(), &doorknobs(), &coffee()}) {
    const auto tasks = sample_tasks(*env, {Split::kEval, seed, env->eval_ranges, seed}, 4);
    for (const auto& task : tasks) {
      for (bool cp : {true, false}) {
        for (bool focus : {true, false}) {
          BridgeSettings settings;
          settings.call_planner = cp;
          settings.focus = focus;
          const BridgeMDP mdp = make_bridge_mdp(*env, task.initial_state, task.goal, settings, task.horizon);
          const auto mask = skill_mask(task.initial_state, mdp);
          const int bindable = static_cast<int>(std::count(mask.begin(), mask.end() - 1, 1));
          for (int n : {1, 10}) {
            const auto c = candidate_actions(task.initial_state, mdp, n, rng);
            const int expected = bindable * n + (cp ? 1 : 0);
            if (static_cast<int>(c.size()) != expected) {
              return fail(name, task.id + ": " + std::to_string(c.size()) + " candidates, expected " +
                                    std::to_string(expected));
            }
            for (const auto& a : c) {
              if (a.is_call_planner()) {
                if (a.skill_index != mdp.actions.call_planner_index()) return fail(name, "CallPlanner slot");
                continue;
              }
              if (!mask[static_cast<std::size_t>(a.skill_index)]) return fail(name, "masked skill proposed");
              const auto& bounds = a.action->skill->param_bounds;
              for (std::size_t k = 0; k < bounds.size(); ++k) {
                if (a.action->params[k] < bounds[k].lo || a.action->params[k] > bounds[k].hi) {
                  return fail(name, a.to_string() + ": parameter outside bounds");
                }
              }
              for (const auto& o : a.action->objects) {
                if (focus && std::find(mdp.focus_objects.begin(), mdp.focus_objects.end(), o) ==
                                 mdp.focus_objects.end()) {
                  return fail(name, a.to_string() + ": binds an object outside the focus");
                }
              }
              const auto enc = encode_action(mdp.actions, a);
              if (enc.size() != mdp.actions.encoding_dim() || enc[static_cast<std::size_t>(a.skill_index)] != 1.0) {
                return fail(name, "bad action encoding");
              }
            }
          }
        }
      }
    }
  }
  return pass(name, "counts, masks, bounds, focus binding and encodings hold on 12 tasks");
}

CheckResult projection_properties(std::uint64_t seed) {
  const std::string name = "projection_properties";
  std::mt19937_64 rng(seed);
  for (const EnvSpec* env : {&light_switch_door(), &doorknobs(), &coffee()}) {
    const auto tasks = sample_tasks(*env, {Split::kEval, seed, env->eval_ranges, seed}, 4);
    for (const auto& task : tasks) {
      for (const auto& s : random_walk(*env, task, 8, rng)) {
        for (StateView view : {StateView::kFocused, StateView::kFull}) {
          for (Frame frame : {Frame::kAbsolute, Frame::kRobotRelative}) {
            BridgeSettings settings;
            settings.view = view;
            settings.frame = frame;
            const BridgeMDP mdp = make_bridge_mdp(*env, s, task.goal, settings, task.horizon);
            const auto x = project_state(s, mdp);
            if (x.size() != projected_dim(*env, view)) return fail(name, task.id + ": projected length");
            if (x != project_state(s, mdp)) return fail(name, task.id + ": projection not deterministic");
            const Object& robot = robot_of(*env, s);
            const auto& robot_pos = env->position_features.at(robot.type().name);
            if (view == StateView::kFocused) {
              const Object& focus = mdp.focus_objects[1];
              if (focus != select_focus_object(s, *env)) return fail(name, "focus is not the nearest object");
              for (const auto& o : interactable_objects(*env, s)) {
                if (object_distance(s, robot, o, env->position_features) <
                    object_distance(s, robot, focus, env->position_features)) {
                  return fail(name, task.id + ": a nearer object than the focus exists");
                }
              }
            }
            // The robot leads both views: it is the first declared type in every env.
            for (std::size_t k : robot_pos) {
              const double expected = frame == Frame::kRobotRelative ? 0.0 : s.values(robot)[k];
              if (x[k] != expected) return fail(name, task.id + ": robot position entry");
            }
          }
        }
      }
    }
  }
  return pass(name, "dimensions, determinism, nearest focus and frames hold on 12 random walks");
}

CheckResult learner_determinism(std::uint64_t seed) {
  const std::string name = "learner_determinism";
  const EnvSpec& env = light_switch_door();
  const ActionSpace space = make_action_space(env, true);
  const std::size_t dim = projected_dim(env, StateView::kFocused);
  LearnerConfig cfg;
  cfg.train_iters = 50;
  cfg.batch_size = 16;
  auto build = [&] {
    QLearner l(space, dim, cfg, seed);
    std::mt19937_64 rng(seed);
    for (int i = 0; i < 40; ++i) {
      TransitionRecord r;
      r.state = uniform_vector(dim, rng);
      r.action = std::vector<double>(space.encoding_dim(), 0.0);
      r.action[static_cast<std::size_t>(i % 5)] = 1.0;
      r.reward = i % 7 == 0 ? 1.0 : 0.0;
      r.next_state = uniform_vector(dim, rng);
      r.terminal = r.reward > 0.0;
      r.next_mask = {1, 1, 1, 1, 1};
      l.buffer().add(std::move(r));
    }
    return l;
  };
  QLearner a = build();
  QLearner b = build();
  QLearner untouched = build();
  a.train_cycle();
  b.train_cycle();
  if (!(a.online() == b.online()) || !(a.target() == b.target())) return fail(name, "equal seeds diverged");
  if (a.online() == untouched.online()) return fail(name, "training did not move the weights");
  LearnerConfig zero = cfg;
  zero.train_iters = 0;
  QLearner z(space, dim, zero, seed);
  const MLPParams before = z.online();
  TransitionRecord r;
  r.state.assign(dim, 0.0);
  r.action.assign(space.encoding_dim(), 0.0);
  r.next_state.assign(dim, 0.0);
  r.terminal = true;
  z.buffer().add(r);
  if (z.train_cycle() != TrainStatus::kSkipped || !(z.online() == before)) return fail(name, "zero iters changed");
  return pass(name, "equal seeds give bit-identical weights; zero iterations leave the learner unchanged");
}

CheckResult scripted_bridge_solves(int tasks, std::uint64_t seed) {
  const std::string name = "scripted_bridge_solves";
  std::vector<Task> pool;
  for (int doors = 1; doors <= 4; ++doors) {
    for (auto& t : sample_tasks(light_switch_door(), {Split::kEval, seed + doors, {10, 20, doors, doors}, seed},
                                tasks / 4)) {
      pool.push_back(std::move(t));
    }
  }
  for (auto& t : sample_tasks(doorknobs(), {Split::kEval, seed, doorknobs().eval_ranges, seed}, tasks / 2)) {
    pool.push_back(std::move(t));
  }
  for (auto& t : sample_tasks(coffee(), {Split::kEval, seed, coffee().eval_ranges, seed}, 2)) {
    pool.push_back(std::move(t));
  }
  for (const auto& task : pool) {
    const EnvSpec& env = env_of(task);
    ScriptedBridge bridge;
    SolveOptions opts;
    std::mt19937_64 rng(seed);
    const EpisodeRecord ep = solve_task(env, task, bridge, opts, rng);
    const int novelties = env.name == "coffee" ? 1 : static_cast<int>(task.initial_state.objects_of_type("door").size());
    if (!ep.success) return fail(name, task.id + ": scripted bridge failed");
    if (ep.alternations != novelties) {
      return fail(name, task.id + ": " + std::to_string(ep.alternations) + " alternations for " +
                            std::to_string(novelties) + " novelties");
    }
    if (ep.novelties_final < novelties) return fail(name, task.id + ": novelty not resolved");
  }
  return pass(name, std::to_string(pool.size()) + " tasks solved with one bridge segment per novelty");
}

CheckResult smooth_and_aggregate_oracles(std::uint64_t seed) {
  const std::string name = "smooth_and_aggregate_oracles";
  std::mt19937_64 rng(seed);
  for (int window : {1, 3, 25}) {
    const auto series = uniform_vector(60, rng, 0.0, 1.0);
    std::vector<double> prefix(series.size() + 1, 0.0);
    std::partial_sum(series.begin(), series.end(), prefix.begin() + 1);
    const auto smooth = smooth_reward(series, window);
    for (std::size_t i = 0; i < series.size(); ++i) {
      const std::size_t lo = i + 1 > static_cast<std::size_t>(window) ? i + 1 - window : 0;
      const double expected = (prefix[i + 1] - prefix[lo]) / static_cast<double>(i + 1 - lo);
      if (std::abs(smooth[i] - expected) > 1e-12) return fail(name, "smooth_reward mismatch");
    }
  }
  std::vector<RunRecord> recs(5);
  const std::int64_t cycles = 4;
  for (std::size_t r = 0; r < recs.size(); ++r) {
    recs[r].config.seed = r;
    recs[r].config_echo = "env = x\nseed = " + std::to_string(r) + "\n";
    for (int c = 0; c < cycles; ++c) {
      CycleRecord cr;
      cr.cycle = c;
      cr.smooth_train = uniform_vector(1, rng, 0.0, 1.0)[0];
      cr.smooth_eval = uniform_vector(1, rng, 0.0, 1.0)[0];
      cr.env_steps = 10 * (c + 1) + static_cast<long long>(r);
      recs[r].cycles.push_back(cr);
    }
  }
  const auto rows = aggregate_seeds(recs);
  for (int c = 0; c < cycles; ++c) {
    double sum = 0.0;
    for (const auto& r : recs) sum += r.cycles[c].smooth_eval;
    const double mean = sum / 5.0;
    double ss = 0.0;
    for (const auto& r : recs) ss += (r.cycles[c].smooth_eval - mean) * (r.cycles[c].smooth_eval - mean);
    if (std::abs(rows[c].mean_smooth_eval - mean) > 1e-12 || std::abs(rows[c].var_smooth_eval - ss / 4.0) > 1e-12) {
      return fail(name, "aggregate mean/variance mismatch at cycle " + std::to_string(c));
    }
  }
  return pass(name, "smooth reward matches prefix-sum oracle; aggregate uses sample variance");
}

CheckResult config_echo_roundtrip() {
  const std::string name = "config_echo_roundtrip";
  for (const auto& env : env_names()) {
    for (auto a : all_approaches()) {
      RunConfig c = RunConfig::defaults_for(env);
      c.approach = a;
      c.seed = 4;
      const std::string echo = config_echo(c);
      if (config_echo(config_from_echo(echo)) != echo) return fail(name, c.run_key() + ": echo does not round-trip");
    }
  }
  try {
    ConfigValues v;
    apply_overrides(v, {"gamma=1.5"});
    expand_configs(v);
    return fail(name, "gamma=1.5 accepted");
  } catch (const ConfigError&) {
  }
  return pass(name, "echo round-trips for every env x approach; range errors raised");
}

CheckResult tiny_run_determinism() {
  const std::string name = "tiny_run_determinism";
  RunConfig c = RunConfig::defaults_for("light_switch_door");
  c.cycles = 2;
  c.n_eval_tasks = 2;
  c.trajectories_per_cycle = 2;
  c.learner.train_iters = 10;
  c.learner.batch_size = 8;
  auto render = [&] {
    const RunRecord rec = run_online_learning(c);
    std::ostringstream out;
    write_run_record(out, rec);
    write_aggregate_csv(out, aggregate_seeds({rec}));
    return out.str() + rec.final_learner_checkpoint;
  };
  const std::string a = render();
  const std::string b = render();
  return a == b ? pass(name, "two identical runs serialize byte-identically (" + std::to_string(a.size()) + " bytes)")
                : fail(name, "repeated run differs");
}

CheckResult world_algebra(std::uint64_t seed) {
  const std::string name = "world_algebra";
  std::mt19937_64 rng(seed);
  int states = 0;
  for (const EnvSpec* env : {&light_switch_door(), &doorknobs(), &coffee()}) {
    const auto tasks = sample_tasks(*env, {Split::kEval, seed, env->eval_ranges, seed}, 3);
    for (const auto& task : tasks) {
      for (const auto& s : random_walk(*env, task, 12, rng)) {
        const AtomSet a1 = abstract(s, env->predicates);
        const AtomSet a2 = abstract(s, env->planner_predicates);
        const auto all_preds = env->all_predicates();
        const AtomSet all = abstract(s, all_preds);
        AtomSet uni = a1;
        uni.insert(a2.begin(), a2.end());
        if (all != uni) return fail(name, task.id + ": abstract is not monotone in predicates");
        if (abstract(s, all_preds) != all) return fail(name, task.id + ": abstract not deterministic");
        if (!abstract(s, {}).empty()) return fail(name, "empty predicate set gave atoms");
        const bool subset = std::includes(all.begin(), all.end(), task.goal.begin(), task.goal.end());
        if (goal_holds(task.goal, s) != subset) return fail(name, task.id + ": goal_holds differs from subset test");
        const auto objs = s.objects();
        for (const auto& a : objs) {
          for (const auto& b : objs) {
            const double ab = object_distance(s, a, b, env->position_features);
            if (ab != object_distance(s, b, a, env->position_features) || ab < 0.0) {
              return fail(name, "distance not symmetric");
            }
            for (const auto& c : objs) {
              const double ac = object_distance(s, a, c, env->position_features);
              const double cb = object_distance(s, c, b, env->position_features);
              if (ab > ac + cb + 1e-12) return fail(name, "triangle inequality violated");
            }
          }
        }
        ++states;
      }
    }
  }
  return pass(name, std::to_string(states) + " states: monotone, deterministic, subset goals, metric distances");
}

CheckResult env_protocols(std::uint64_t seed) {
  const std::string name = "env_protocols";
  std::mt19937_64 rng(seed);
  const EnvSpec& lsd_env = light_switch_door();
  int blocked = 0;
  for (const auto& task : sample_tasks(lsd_env, {Split::kEval, seed, lsd_env.eval_ranges, seed}, 20)) {
    const State& s0 = task.initial_state;
    const Object robot = robot_of(lsd_env, s0);
    // Ill-applicable actions leave the state unchanged.
    State edge = s0;
    edge.set_feature(robot, "x", 0.0);
    if (!(step(lsd_env, edge, GroundAction(lsd_env.skill("MoveLeft"), {robot}, {})) == edge)) {
      return fail(name, "MoveLeft off the row changed the state");
    }
    const Object light = s0.objects_of_type("light").front();
    if (s0.get(robot, "x") != s0.get(light, "x") &&
        !(step(lsd_env, s0, GroundAction(lsd_env.skill("ToggleLightSwitch"), {robot}, {1.0})) == s0)) {
      return fail(name, "ToggleLightSwitch away from the light changed the state");
    }
    // Skeleton replayed open loop never reaches the goal past a closed door.
    const auto plan = plan_from_state(lsd_env, s0, task.goal);
    if (!plan) return fail(name, task.id + ": no skeleton");
    State s = s0;
    for (const auto& op : *plan) s = step(lsd_env, s, op.op->make_action(s, op.binding));
    if (goal_holds(task.goal, s)) return fail(name, task.id + ": skeleton solved a doored task");
    ++blocked;
    // Door protocol next to the first door.
    const Object door = s0.objects_of_type("door").front();
    State at = s0;
    at.set_feature(robot, "x", s0.get(door, "x") - 0.5);
    const SkillPtr rll = lsd_env.skill(kRunLowLevelAction);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 50; ++i) {
      if (step(lsd_env, at, GroundAction(rll, {}, {u(rng), u(rng)})).get(door, "open") >= 0.5) {
        return fail(name, "a single action opened a door");
      }
    }
    const State latched = step(lsd_env, at, GroundAction(rll, {}, {0.8, 0.0}));
    const State opened = step(lsd_env, latched, GroundAction(rll, {}, {u(rng), 1.0}));
    if (opened.get(door, "open") != 1.0) return fail(name, "latch then push did not open the door");
    if (!(step(lsd_env, edge, GroundAction(rll, {}, {0.8, 1.0})) == edge) && s0.get(door, "x") != 0.5) {
      return fail(name, "low-level action away from doors changed the state");
    }
  }
  const EnvSpec& dk = doorknobs();
  for (const auto& task : sample_tasks(dk, {Split::kEval, seed, dk.eval_ranges, seed}, 10)) {
    const State& s0 = task.initial_state;
    const Object robot = robot_of(dk, s0);
    const auto rooms = s0.objects_of_type("room");
    for (const auto& a : rooms) {
      for (const auto& b : rooms) {
        const double d = std::abs(s0.get(a, "x") - s0.get(b, "x")) + std::abs(s0.get(a, "y") - s0.get(b, "y"));
        const bool here = s0.get(robot, "x") == s0.get(a, "x") && s0.get(robot, "y") == s0.get(a, "y");
        if (here && d == 1.0) continue;
        if (!(step(dk, s0, GroundAction(dk.skill("MoveRobot"), {robot, a, b}, {})) == s0)) {
          return fail(name, "ill-applicable MoveRobot changed the state");
        }
      }
    }
  }
  const EnvSpec& cf = coffee();
  for (const auto& task : sample_tasks(cf, {Split::kEval, seed, cf.eval_ranges, seed}, 5)) {
    const State& s0 = task.initial_state;
    const Object robot = robot_of(cf, s0);
    const Object jug = s0.objects_of_type("jug").front();
    const Object cup = s0.objects_of_type("cup").front();
    const Object machine = s0.objects_of_type("machine").front();
    for (const auto& a : {GroundAction(cf.skill("PickJug"), {robot, jug}, {}),
                          GroundAction(cf.skill("PlaceJugInMachine"), {robot, jug, machine}, {}),
                          GroundAction(cf.skill("TurnMachineOn"), {robot, machine}, {}),
                          GroundAction(cf.skill("PourCoffee"), {robot, jug, cup}, {1.0})}) {
      if (!(step(cf, s0, a) == s0)) return fail(name, a.to_string() + " changed the initial coffee state");
    }
  }
  return pass(name, "no-op safety in 3 envs, door protocol, novelty blocking on " + std::to_string(blocked) +
                        " doored tasks");
}

CheckResult skeleton_determinism(std::uint64_t seed) {
  const std::string name = "skeleton_determinism";
  auto names = [](const Skeleton& k) {
    std::string out;
    for (const auto& op : k) out += op.name() + ";";
    return out;
  };
  int checked = 0;
  for (const auto& task : door_free_instances(30, seed)) {
    const EnvSpec& env = env_of(task);
    const auto a = plan_from_state(env, task.initial_state, task.goal);
    const auto b = plan_from_state(env, task.initial_state, task.goal);
    if (!a || !b || names(*a) != names(*b)) return fail(name, task.id + ": skeletons differ");
    for (Heuristic h : {Heuristic::kHMax, Heuristic::kBlind}) {
      const auto c = plan_from_state(env, task.initial_state, task.goal, {h});
      if (!c || c->size() != a->size()) return fail(name, task.id + ": heuristics disagree on plan length");
    }
    ++checked;
  }
  return pass(name, std::to_string(checked) + " instances: repeated search is identical, lengths agree across heuristics");
}

CheckResult polyak_contraction(std::uint64_t seed) {
  const std::string name = "polyak_contraction";
  std::mt19937_64 rng(seed);
  for (double tau : {0.0025, 0.1, 0.5, 0.9}) {
    const MLPParams t = init_mlp(4, {6}, rng);
    const MLPParams o = init_mlp(4, {6}, rng);
    const MLPParams m = polyak(t, o, tau);
    for (std::size_t l = 0; l < t.layers.size(); ++l) {
      const Eigen::ArrayXXd before = (t.layers[l].weights - o.layers[l].weights).array().abs();
      const Eigen::ArrayXXd after = (m.layers[l].weights - o.layers[l].weights).array().abs();
      if (((after - (1.0 - tau) * before).abs() > 1e-12).any()) return fail(name, "not a (1 - tau) contraction");
    }
  }
  return pass(name, "|target' - online| == (1 - tau) |target - online| elementwise");
}

CheckResult projection_locality(std::uint64_t seed) {
  const std::string name = "projection_locality";
  std::mt19937_64 rng(seed);
  int checked = 0;
  for (const EnvSpec* env : {&light_switch_door(), &doorknobs()}) {
    const auto tasks = sample_tasks(*env, {Split::kEval, seed, env->eval_ranges, seed}, 8);
    for (const auto& task : tasks) {
      const State& s = task.initial_state;
      for (Frame frame : {Frame::kAbsolute, Frame::kRobotRelative}) {
        BridgeSettings settings;
        settings.frame = frame;
        const BridgeMDP mdp = make_bridge_mdp(*env, s, task.goal, settings, task.horizon);
        const auto x = project_state(s, mdp);
        for (const auto& o : s.objects()) {
          if (std::find(mdp.focus_objects.begin(), mdp.focus_objects.end(), o) != mdp.focus_objects.end()) continue;
          State perturbed = s;
          perturbed.set(o, uniform_vector(o.type().dim(), rng, -5.0, 5.0));
          if (project_state(perturbed, mdp) != x) return fail(name, task.id + ": " + o.name() + " leaks into the view");
          ++checked;
        }
      }
    }
  }
  return pass(name, std::to_string(checked) + " non-focus perturbations leave the focused vector unchanged");
}

CheckResult rollout_accounting(std::uint64_t seed) {
  const std::string name = "rollout_accounting";
  std::vector<Task> tasks = door_free_instances(10, seed);
  for (auto& t : doored_instances(10, seed + 1)) tasks.push_back(std::move(t));
  for (const auto& task : tasks) {
    const EnvSpec& env = env_of(task);
    const RolloutResult r = call_planner_rollout(env, task.initial_state, task, 0);
    // Independent replay: run the plan policy until it stops.
    const auto plan = plan_from_state(env, task.initial_state, task.goal);
    PlanPolicy policy(*plan, env);
    State s = task.initial_state;
    int executed = 0;
    while (!goal_holds(task.goal, s) && executed < task.horizon) {
      const PlanOutput out = policy.next(s);
      if (out.status != PlanStatus::kOnTrack) break;
      s = step(env, s, *out.action);
      ++executed;
      if (policy.check_progress(s) == Progress::kStuck) break;
    }
    if (r.steps_consumed != executed || static_cast<int>(r.actions.size()) != executed || !(r.next_state == s)) {
      return fail(name, task.id + ": rollout consumed " + std::to_string(r.steps_consumed) + " vs " +
                            std::to_string(executed) + " replayed transitions");
    }
    const RolloutOutcome expected = goal_holds(task.goal, s) ? RolloutOutcome::kGoal : RolloutOutcome::kStuck;
    if (r.outcome != expected) return fail(name, task.id + ": outcome " + std::string(to_string(r.outcome)));
    // One step of budget left: the rollout stops on the horizon.
    if (executed > 1) {
      const RolloutResult h = call_planner_rollout(env, task.initial_state, task, task.horizon - 1);
      if (h.steps_consumed != 1 || (h.outcome != RolloutOutcome::kHorizon && h.outcome != RolloutOutcome::kGoal)) {
        return fail(name, task.id + ": horizon not enforced");
      }
    }
  }
  return pass(name, std::to_string(tasks.size()) + " rollouts: steps_consumed == replayed transitions; horizon enforced");
}

CheckResult double_dqn_decoupling() {
  const std::string name = "double_dqn_decoupling";
  ActionSpace space;
  space.skills = {make_skill("A", {}, {}), make_skill("B", {}, {})};
  space.call_planner = false;
  LearnerConfig cfg;
  QLearner learner(space, 1, cfg, 0);
  // Hidden units copy the one-hot of A and B; the heads rank them differently.
  auto net = [](double qa, double qb) {
    MLPParams p;
    Eigen::MatrixXd w1 = Eigen::MatrixXd::Zero(2, 4);
    w1(0, 1) = 1.0;
    w1(1, 2) = 1.0;
    p.layers.push_back({w1, Eigen::VectorXd::Zero(2)});
    Eigen::MatrixXd w2(1, 2);
    w2 << qa, qb;
    p.layers.push_back({w2, Eigen::VectorXd::Zero(1)});
    return p;
  };
  learner.online() = net(1.0, 2.0);
  learner.target() = net(5.0, 3.0);
  TransitionRecord r;
  r.state = {0.0};
  r.action = {1.0, 0.0, 0.0};
  r.reward = 0.0;
  r.next_state = {0.0};
  r.terminal = false;
  r.next_mask = {1, 1, 0};
  std::vector<TransitionRecord> batch{r};
  const double y = learner.td_targets(batch)[0];
  // Online picks B (2 > 1); the target scores B at 3.
  const double expected = 0.8 * 3.0;
  batch[0].next_mask = {1, 0, 0};
  const double masked = learner.td_targets(batch)[0];
  if (std::abs(y - expected) > 1e-12) return fail(name, "y=" + std::to_string(y) + ", expected 2.4");
  if (std::abs(masked - 0.8 * 5.0) > 1e-12) return fail(name, "mask ignored: y=" + std::to_string(masked));
  return pass(name, "y = r + gamma Q_target(x', argmax_a Q_online(x', a)) = 2.4; masked slots skipped");
}

CheckResult episode_accounting(std::uint64_t seed) {
  const std::string name = "episode_accounting";
  int episodes = 0;
  for (const EnvSpec* env : {&light_switch_door(), &doorknobs(), &coffee()}) {
    const auto tasks = sample_tasks(*env, {Split::kEval, seed, env->eval_ranges, seed}, 4);
    for (const auto& task : tasks) {
      for (bool cp : {true, false}) {
        SolveOptions opts;
        opts.bridge.call_planner = cp;
        RandomBridge bridge(3);
        auto run = [&] {
          std::mt19937_64 rng(seed);
          return solve_task(*env, task, bridge, opts, rng);
        };
        const EpisodeRecord ep = run();
        if (episode_json(ep) != episode_json(run())) return fail(name, task.id + ": episode not repeatable");
        if (ep.env_steps > task.horizon) return fail(name, task.id + ": horizon exceeded");
        int sum = 0;
        int bridge_segments = 0;
        int bridge_actions = 0;
        for (const auto& seg : ep.segments) {
          sum += seg.env_steps;
          if (seg.kind == SegmentKind::kBridge) {
            ++bridge_segments;
            const int cp_calls = seg.outcome == "call_planner" ? 1 : 0;
            if (static_cast<int>(seg.actions.size()) != seg.env_steps + cp_calls) {
              return fail(name, task.id + ": bridge segment actions do not match its steps");
            }
            bridge_actions += static_cast<int>(seg.actions.size());
          } else if (seg.outcome != "planner_failed" && static_cast<int>(seg.actions.size()) != seg.env_steps) {
            return fail(name, task.id + ": planner segment actions do not match its steps");
          }
        }
        if (sum != ep.env_steps) return fail(name, task.id + ": segments do not partition the steps");
        if (bridge_segments != ep.alternations || bridge_actions != ep.bridge_actions) {
          return fail(name, task.id + ": alternation or bridge action count");
        }
        if (!cp && ep.call_planner_calls != 0) return fail(name, task.id + ": CallPlanner used while disabled");
        ++episodes;
      }
    }
  }
  return pass(name, std::to_string(episodes) + " random-bridge episodes: segments partition steps within the horizon");
}

CheckResult eval_isolation_and_contracts() {
  const std::string name = "eval_isolation_and_contracts";
  const EnvSpec& env = light_switch_door();
  RunConfig c = RunConfig::defaults_for(env.name);
  c.n_eval_tasks = 3;
  for (ApproachKind a : {ApproachKind::kOurs, ApproachKind::kMapleQ, ApproachKind::kOursNoCallPlanner}) {
    c.approach = a;
    PolicyStack stack = build_approach(a, env, c);
    std::mt19937_64 rng(1);
    SolveOptions train = stack.options;
    train.mode = SolveMode::kTrain;
    train.learner = stack.learner.get();
    std::vector<EpisodeRecord> eps;
    for (const auto& t : train_tasks(env, c)) eps.push_back(solve_task(env, t, *stack.train_controller, train, rng));
    const std::size_t replay = stack.learner->buffer().size();
    const std::uint64_t steps = stack.learner->steps();
    if (replay == 0 || steps != replay) return fail(name, std::string(to_string(a)) + ": training left no transitions");
    const auto evals = evaluate(env, stack, eval_tasks(env, c), c.seed, 0);
    if (stack.learner->buffer().size() != replay || stack.learner->steps() != steps) {
      return fail(name, std::string(to_string(a)) + ": evaluation touched replay or epsilon");
    }
    eps.insert(eps.end(), evals.begin(), evals.end());
    for (const auto& e : eps) {
      if (a == ApproachKind::kMapleQ && e.planner_segments != 0) return fail(name, "maple_q used the planner");
      if (a == ApproachKind::kOursNoCallPlanner && e.call_planner_calls != 0) {
        return fail(name, "no_callplanner called the planner");
      }
    }
  }
  return pass(name, "evaluate leaves replay and epsilon unchanged; maple_q plans 0 times; no_callplanner calls 0 times");
}

const std::vector<Suite>& all_suites() {
  static const std::vector<Suite> suites{
      {"worldcore", {[] { return abstraction_matches_enumeration(); }, [] { return world_algebra(); }}},
      {"envs",
       {[] { return task_generator_invariants(); }, [] { return transition_determinism(); },
        [] { return env_protocols(); }}},
      {"planner",
       {[] { return grounding_matches_exhaustive(); }, [] { return planner_optimality(); },
        [] { return heuristic_ordering(); }, [] { return stuck_detection(); }, [] { return skeleton_determinism(); }}},
      {"neural",
       {[] { return gradient_check(); }, [] { return polyak_adam_fixtures(); }, [] { return polyak_contraction(); },
        [] { return forward_product_matches_forward(); }, [] { return checkpoint_roundtrip(); }}},
      {"bridge",
       {[] { return candidate_set_properties(); }, [] { return projection_properties(); },
        [] { return projection_locality(); }, [] { return rollout_accounting(); },
        [] { return double_dqn_decoupling(); }, [] { return epsilon_closed_form(); }, [] { return sanity_mdp_q(); },
        [] { return learner_determinism(); }}},
      {"metapolicy", {[] { return scripted_bridge_solves(); }, [] { return episode_accounting(); }}},
      {"harness",
       {[] { return smooth_and_aggregate_oracles(); }, [] { return tiny_run_determinism(); },
        [] { return eval_isolation_and_contracts(); }}},
      {"cli", {[] { return config_echo_roundtrip(); }}},
  };
  return suites;
}

}  // namespace bpl::testkit
