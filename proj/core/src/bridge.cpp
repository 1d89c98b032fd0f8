#include "bpl/bridge.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json_io.hpp"

namespace bpl {

std::string_view to_string(StateView view) { return view == StateView::kFocused ? "focused" : "full"; }
std::string_view to_string(Frame frame) { return frame == Frame::kAbsolute ? "absolute" : "robot_relative"; }

StateView state_view_from_string(std::string_view s) {
  if (s == "focused") return StateView::kFocused;
  if (s == "full") return StateView::kFull;
  throw Error("unknown state view: " + std::string(s));
}

Frame frame_from_string(std::string_view s) {
  if (s == "absolute") return Frame::kAbsolute;
  if (s == "robot_relative") return Frame::kRobotRelative;
  throw Error("unknown frame: " + std::string(s));
}

std::string_view to_string(RolloutOutcome outcome) {
  switch (outcome) {
    case RolloutOutcome::kGoal: return "goal";
    case RolloutOutcome::kHorizon: return "horizon";
    case RolloutOutcome::kStuck: break;
  }
  return "stuck";
}

ActionSpace make_action_space(const EnvSpec& env, bool call_planner) {
  ActionSpace space;
  space.skills = env.skills;
  space.call_planner = call_planner;
  for (const auto& s : env.skills) space.max_param_dim = std::max(space.max_param_dim, s->param_dim());
  return space;
}

std::string BridgeAction::to_string() const {
  return action ? action->to_string() : std::string(kCallPlanner);
}

BridgeAction call_planner_action(const ActionSpace& space) { return {space.call_planner_index(), std::nullopt}; }

std::vector<double> encode_action(const ActionSpace& space, const BridgeAction& action) {
  std::vector<double> out(space.encoding_dim(), 0.0);
  if (action.skill_index < 0 || action.skill_index > space.call_planner_index()) {
    throw Error("action skill index out of range");
  }
  out[static_cast<std::size_t>(action.skill_index)] = 1.0;
  if (action.action) {
    const auto& p = action.action->params;
    std::copy(p.begin(), p.end(), out.begin() + static_cast<std::ptrdiff_t>(space.skills.size() + 1));
  }
  return out;
}

Object select_focus_object(const State& state, const EnvSpec& env) {
  const auto candidates = interactable_objects(env, state);
  if (candidates.empty()) throw Error("select_focus_object: no interactable objects");
  const Object& robot = robot_of(env, state);
  std::optional<Object> best;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& o : candidates) {
    const double d = object_distance(state, robot, o, env.position_features);
    if (d < best_d) {
      best_d = d;
      best = o;
    }
  }
  return *best;
}

BridgeMDP make_bridge_mdp(const EnvSpec& env, const State& state, const AtomSet& goal,
                          const BridgeSettings& settings, int horizon_remaining) {
  BridgeMDP mdp;
  mdp.env = &env;
  mdp.actions = make_action_space(env, settings.call_planner);
  mdp.view = settings.view;
  mdp.frame = settings.frame;
  mdp.goal = goal;
  mdp.gamma = settings.gamma;
  mdp.horizon_remaining = horizon_remaining;
  if (settings.focus) mdp.focus_objects = {robot_of(env, state), select_focus_object(state, env)};
  return mdp;
}

namespace {

std::size_t max_interactable_dim(const EnvSpec& env) {
  std::size_t d = 0;
  for (const auto& t : env.types) {
    if (env.interactable_types.contains(t->name)) d = std::max(d, env.observed_dim(*t));
  }
  return d;
}

std::size_t robot_dim(const EnvSpec& env) { return env.observed_dim(*env.type(env.robot_type)); }

std::vector<double> observed(const EnvSpec& env, const Object& o, std::vector<double> v) {
  auto it = env.hidden_features.find(o.type().name);
  if (it == env.hidden_features.end()) return v;
  std::vector<double> out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (std::find(it->second.begin(), it->second.end(), k) == it->second.end()) out.push_back(v[k]);
  }
  return out;
}

// Observed object features with position entries shifted into the robot frame.
std::vector<double> framed(const State& state, const Object& o, const std::vector<double>& robot_pos,
                           const BridgeMDP& mdp) {
  std::vector<double> v = state.values(o);
  auto it = mdp.env->position_features.find(o.type().name);
  if (mdp.frame == Frame::kRobotRelative && it != mdp.env->position_features.end()) {
    if (it->second.size() != robot_pos.size()) throw Error("position dims differ from the robot's");
    for (std::size_t k = 0; k < it->second.size(); ++k) v[it->second[k]] -= robot_pos[k];
  }
  return observed(*mdp.env, o, std::move(v));
}

std::vector<Object> binding_pool(const State& state, const BridgeMDP& mdp) {
  std::vector<Object> pool = mdp.focus_objects.empty() ? state.objects() : mdp.focus_objects;
  std::sort(pool.begin(), pool.end());
  return pool;
}

// First binding (in name order, distinct objects) matching the signature.
std::optional<std::vector<Object>> bind(const ParameterizedSkill& skill, const std::vector<Object>& pool) {
  std::vector<Object> out;
  for (const auto& type : skill.object_signature) {
    auto it = std::find_if(pool.begin(), pool.end(), [&](const Object& o) {
      return o.type().name == type->name && std::find(out.begin(), out.end(), o) == out.end();
    });
    if (it == pool.end()) return std::nullopt;
    out.push_back(*it);
  }
  return out;
}

}  // namespace

std::size_t projected_dim(const EnvSpec& env, StateView view) {
  if (view == StateView::kFocused) return robot_dim(env) + max_interactable_dim(env);
  std::size_t d = 0;
  for (const auto& t : env.types) {
    auto it = env.max_objects.find(t->name);
    const int slots = it == env.max_objects.end() ? 0 : it->second;
    d += env.observed_dim(*t) * static_cast<std::size_t>(slots);
  }
  return d;
}

std::vector<double> project_state(const State& state, const BridgeMDP& mdp) {
  const EnvSpec& env = *mdp.env;
  const Object& robot = robot_of(env, state);
  const auto robot_pos = position_of(state, robot, env.position_features);
  std::vector<double> out;
  out.reserve(projected_dim(env, mdp.view));
  if (mdp.view == StateView::kFocused) {
    if (mdp.focus_objects.size() != 2) throw Error("project_state: focused view needs a focus object");
    const Object& focus = mdp.focus_objects[1];
    if (!state.contains(focus)) throw Error("project_state: focus object " + focus.name() + " missing");
    const auto r = framed(state, robot, robot_pos, mdp);
    const auto f = framed(state, focus, robot_pos, mdp);
    out.insert(out.end(), r.begin(), r.end());
    out.insert(out.end(), f.begin(), f.end());
    out.resize(projected_dim(env, mdp.view), 0.0);
    return out;
  }
  for (const auto& t : env.types) {
    auto it = env.max_objects.find(t->name);
    const std::size_t slots = it == env.max_objects.end() ? 0 : static_cast<std::size_t>(it->second);
    const auto objs = state.objects_of_type(t->name);
    if (objs.size() > slots) {
      throw Error("project_state: " + std::to_string(objs.size()) + " objects of type " + t->name +
                  " exceed the " + std::to_string(slots) + " slots");
    }
    for (const auto& o : objs) {
      const auto v = framed(state, o, robot_pos, mdp);
      out.insert(out.end(), v.begin(), v.end());
    }
    out.resize(out.size() + (slots - objs.size()) * env.observed_dim(*t), 0.0);
  }
  return out;
}

std::vector<char> skill_mask(const State& state, const BridgeMDP& mdp) {
  const auto pool = binding_pool(state, mdp);
  std::vector<char> mask(mdp.actions.skills.size() + 1, 0);
  for (std::size_t i = 0; i < mdp.actions.skills.size(); ++i) {
    mask[i] = bind(*mdp.actions.skills[i], pool).has_value() ? 1 : 0;
  }
  mask.back() = mdp.actions.call_planner ? 1 : 0;
  return mask;
}

std::vector<BridgeAction> candidate_actions(const State& state, const BridgeMDP& mdp, int n_sample,
                                            std::mt19937_64& rng) {
  const auto pool = binding_pool(state, mdp);
  std::vector<BridgeAction> out;
  for (std::size_t i = 0; i < mdp.actions.skills.size(); ++i) {
    const SkillPtr& skill = mdp.actions.skills[i];
    auto objects = bind(*skill, pool);
    if (!objects) continue;
    for (int k = 0; k < n_sample; ++k) {
      std::vector<double> params;
      for (const auto& b : skill->param_bounds) params.push_back(std::uniform_real_distribution<double>(b.lo, b.hi)(rng));
      out.push_back({static_cast<int>(i), GroundAction(skill, *objects, std::move(params))});
    }
  }
  if (mdp.actions.call_planner) out.push_back(call_planner_action(mdp.actions));
  return out;
}

RolloutResult call_planner_rollout(const EnvSpec& env, const State& state, const Task& task, int steps_used,
                                   const SearchOptions& search) {
  RolloutResult result;
  result.next_state = state;
  auto plan = plan_from_state(env, state, task.goal, search);
  if (!plan) {
    result.planner_failed = true;
    result.outcome = goal_holds(task.goal, state) ? RolloutOutcome::kGoal : RolloutOutcome::kStuck;
    return result;
  }
  PlanPolicy policy = make_plan_policy(std::move(*plan), env);
  State& x = result.next_state;
  while (true) {
    if (goal_holds(task.goal, x)) {
      result.outcome = RolloutOutcome::kGoal;
      return result;
    }
    if (steps_used + result.steps_consumed >= task.horizon) {
      result.outcome = RolloutOutcome::kHorizon;
      return result;
    }
    auto out = policy.next(x);
    if (!out.action) {
      result.outcome = RolloutOutcome::kStuck;
      return result;
    }
    result.actions.push_back(out.action->to_string());
    x = step(env, x, *out.action);
    ++result.steps_consumed;
    policy.check_progress(x);
  }
}

double bridge_reward(const State& next_state, const AtomSet& goal) {
  return goal_holds(goal, next_state) ? 1.0 : 0.0;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw Error("replay capacity must be positive");
}

void ReplayBuffer::add(TransitionRecord record) {
  ++total_added_;
  if (records_.size() < capacity_) {
    records_.push_back(std::move(record));
    return;
  }
  records_[next_] = std::move(record);
  next_ = (next_ + 1) % capacity_;
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t batch, std::mt19937_64& rng) const {
  if (records_.empty()) throw Error("sampling from an empty replay buffer");
  std::uniform_int_distribution<std::size_t> pick(0, records_.size() - 1);
  std::vector<std::size_t> out(batch);
  for (auto& i : out) i = pick(rng);
  return out;
}

double EpsilonSchedule::value(std::uint64_t t) const {
  return std::max(floor, start - decay * static_cast<double>(t));
}

QLearner::QLearner(ActionSpace space, std::size_t state_dim, LearnerConfig config, std::uint64_t seed)
    : space_(std::move(space)),
      state_dim_(state_dim),
      config_(std::move(config)),
      rng_(seed),
      buffer_(config_.replay_capacity) {
  if (!(config_.gamma > 0.0 && config_.gamma < 1.0)) throw Error("gamma must lie in (0,1)");
  if (config_.n_sample < 1) throw Error("n_sample must be positive");
  if (config_.batch_size < 1) throw Error("batch_size must be positive");
  online_ = init_mlp(state_dim_ + space_.encoding_dim(), config_.hidden, rng_);
  target_ = online_;
  adam_ = init_adam(online_);
}

std::vector<double> QLearner::q_values(std::span<const double> state,
                                       std::span<const BridgeAction> candidates) const {
  if (state.size() != state_dim_) throw DimensionError("q_values: state length mismatch");
  if (candidates.empty()) return {};
  Eigen::MatrixXd x = Eigen::Map<const Eigen::VectorXd>(state.data(), static_cast<Eigen::Index>(state.size()));
  Eigen::MatrixXd a(static_cast<Eigen::Index>(space_.encoding_dim()), static_cast<Eigen::Index>(candidates.size()));
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const auto e = encode_action(space_, candidates[c]);
    a.col(static_cast<Eigen::Index>(c)) = Eigen::Map<const Eigen::VectorXd>(e.data(), static_cast<Eigen::Index>(e.size()));
  }
  const Eigen::MatrixXd q = forward_product(online_, x, a);
  return std::vector<double>(q.data(), q.data() + q.size());
}

Eigen::MatrixXd QLearner::target_candidates() {
  std::vector<std::vector<double>> cols;
  candidate_slots_.clear();
  for (std::size_t i = 0; i < space_.skills.size(); ++i) {
    const SkillPtr& skill = space_.skills[i];
    // Parameterless skills yield identical draws; one column represents them.
    const int draws = skill->param_dim() == 0 ? 1 : config_.n_sample;
    for (int k = 0; k < draws; ++k) {
      std::vector<double> e(space_.encoding_dim(), 0.0);
      e[i] = 1.0;
      for (std::size_t p = 0; p < skill->param_dim(); ++p) {
        const auto& b = skill->param_bounds[p];
        e[space_.skills.size() + 1 + p] = std::uniform_real_distribution<double>(b.lo, b.hi)(rng_);
      }
      cols.push_back(std::move(e));
      candidate_slots_.push_back(static_cast<int>(i));
    }
  }
  if (space_.call_planner) {
    std::vector<double> e(space_.encoding_dim(), 0.0);
    e[space_.skills.size()] = 1.0;
    cols.push_back(std::move(e));
    candidate_slots_.push_back(space_.call_planner_index());
  }
  Eigen::MatrixXd a(static_cast<Eigen::Index>(space_.encoding_dim()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) {
    a.col(static_cast<Eigen::Index>(c)) =
        Eigen::Map<const Eigen::VectorXd>(cols[c].data(), static_cast<Eigen::Index>(cols[c].size()));
  }
  return a;
}

std::vector<double> QLearner::targets_for(const std::vector<const TransitionRecord*>& records) {
  std::vector<double> y(records.size());
  std::vector<std::size_t> live;
  for (std::size_t i = 0; i < records.size(); ++i) {
    y[i] = records[i]->reward;
    if (!records[i]->terminal) live.push_back(i);
  }
  if (live.empty()) return y;

  const Eigen::MatrixXd a = target_candidates();
  const auto n = static_cast<Eigen::Index>(live.size());
  const auto sd = static_cast<Eigen::Index>(state_dim_);
  Eigen::MatrixXd next(sd, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto& ns = records[live[static_cast<std::size_t>(j)]]->next_state;
    if (ns.size() != state_dim_) throw DimensionError("transition next_state length mismatch");
    next.col(j) = Eigen::Map<const Eigen::VectorXd>(ns.data(), sd);
  }
  const Eigen::MatrixXd q_online = forward_product(online_, next, a);

  const auto ed = static_cast<Eigen::Index>(space_.encoding_dim());
  Eigen::MatrixXd eval_inputs(sd + ed, n);
  std::vector<char> has_action(live.size(), 0);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto& mask = records[live[static_cast<std::size_t>(j)]]->next_mask;
    Eigen::Index best = -1;
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
      const auto slot = static_cast<std::size_t>(candidate_slots_[static_cast<std::size_t>(c)]);
      if (slot >= mask.size() || !mask[slot]) continue;
      if (best < 0 || q_online(j, c) > q_online(j, best)) best = c;
    }
    eval_inputs.col(j).head(sd) = next.col(j);
    if (best < 0) {
      eval_inputs.col(j).tail(ed).setZero();
      continue;
    }
    has_action[static_cast<std::size_t>(j)] = 1;
    eval_inputs.col(j).tail(ed) = a.col(best);
  }
  const Eigen::VectorXd q_target = forward_batch(target_, eval_inputs);
  for (std::size_t j = 0; j < live.size(); ++j) {
    if (has_action[j]) y[live[j]] += config_.gamma * q_target(static_cast<Eigen::Index>(j));
  }
  return y;
}

std::vector<double> QLearner::td_targets(std::span<const std::size_t> batch) {
  std::vector<const TransitionRecord*> records;
  for (std::size_t i : batch) records.push_back(&buffer_[i]);
  return targets_for(records);
}

std::vector<double> QLearner::td_targets(std::span<const TransitionRecord> batch) {
  std::vector<const TransitionRecord*> records;
  for (const auto& r : batch) records.push_back(&r);
  return targets_for(records);
}

double QLearner::train_step() {
  if (buffer_.empty()) throw Error("train_step on an empty replay buffer");
  const auto idx = buffer_.sample_indices(static_cast<std::size_t>(config_.batch_size), rng_);
  const std::vector<double> y = td_targets(idx);
  const auto sd = static_cast<Eigen::Index>(state_dim_);
  const auto ed = static_cast<Eigen::Index>(space_.encoding_dim());
  const auto b = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXd inputs(sd + ed, b);
  for (Eigen::Index j = 0; j < b; ++j) {
    const auto& r = buffer_[idx[static_cast<std::size_t>(j)]];
    if (r.state.size() != state_dim_ || r.action.size() != space_.encoding_dim()) {
      throw DimensionError("transition vector length mismatch");
    }
    inputs.col(j).head(sd) = Eigen::Map<const Eigen::VectorXd>(r.state.data(), sd);
    inputs.col(j).tail(ed) = Eigen::Map<const Eigen::VectorXd>(r.action.data(), ed);
  }
  const Eigen::VectorXd q = forward_batch(online_, inputs);
  const Eigen::VectorXd diff = q - Eigen::Map<const Eigen::VectorXd>(y.data(), b);
  const Eigen::VectorXd upstream = (2.0 / static_cast<double>(b)) * diff;
  const MLPGrads grads = backward_batch(online_, inputs, upstream);
  adam_step(online_, grads, adam_, config_.adam);
  polyak_inplace(target_, online_, config_.tau);
  return diff.squaredNorm() / static_cast<double>(b);
}

TrainStatus QLearner::train_cycle() {
  if (buffer_.empty()) return TrainStatus::kEmptyBuffer;
  if (config_.train_iters <= 0) return TrainStatus::kSkipped;
  for (int i = 0; i < config_.train_iters; ++i) train_step();
  return TrainStatus::kTrained;
}

std::string QLearner::checkpoint() const {
  nlohmann::json j{{"format", "bpl-learner-1"},
                   {"state_dim", state_dim_},
                   {"encoding_dim", space_.encoding_dim()},
                   {"steps", steps_},
                   {"replay_size", buffer_.size()},
                   {"replay_added", buffer_.total_added()},
                   {"adam_t", adam_.t},
                   {"online", detail::mlp_json(online_)},
                   {"target", detail::mlp_json(target_)}};
  return j.dump();
}

void QLearner::load_checkpoint(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("format").get<std::string>() != "bpl-learner-1") throw Error("unsupported learner checkpoint");
    if (j.at("state_dim").get<std::size_t>() != state_dim_ ||
        j.at("encoding_dim").get<std::size_t>() != space_.encoding_dim()) {
      throw Error("learner checkpoint dimensions do not match");
    }
    MLPParams online = detail::mlp_from_json(j.at("online"));
    MLPParams target = detail::mlp_from_json(j.at("target"));
    if (!online.same_shape(online_) || !target.same_shape(target_)) throw Error("learner checkpoint shape mismatch");
    online_ = std::move(online);
    target_ = std::move(target);
    adam_ = init_adam(online_);
    steps_ = j.at("steps").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed learner checkpoint: ") + e.what());
  }
}

BridgeAction epsilon_greedy(const QLearner& learner, const State& state, const BridgeMDP& mdp,
                            std::mt19937_64& rng, std::optional<double> epsilon) {
  auto candidates = candidate_actions(state, mdp, learner.config().n_sample, rng);
  if (candidates.empty()) throw Error("epsilon_greedy: empty candidate set");
  const double eps = epsilon.value_or(learner.epsilon());
  if (std::uniform_real_distribution<double>(0.0, 1.0)(rng) < eps) {
    return candidates[std::uniform_int_distribution<std::size_t>(0, candidates.size() - 1)(rng)];
  }
  const auto x = project_state(state, mdp);
  const auto q = learner.q_values(x, candidates);
  const auto best = std::max_element(q.begin(), q.end());
  return candidates[static_cast<std::size_t>(best - q.begin())];
}

}  // namespace bpl
