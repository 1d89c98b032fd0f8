#pragma once

// Bridge MDP built at a stuck state and its Double-DQN learner over
// parameterized skills plus the CallPlanner action.

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bpl/envs.hpp"
#include "bpl/neural.hpp"
#include "bpl/planner.hpp"
#include "bpl/world.hpp"

namespace bpl {

inline constexpr std::string_view kCallPlanner = "CallPlanner";

// kFocused: robot ++ focus object. kFull: every object slot of the
// environment in canonical order, zero-padded.
enum class StateView { kFocused, kFull };
// kRobotRelative expresses every position feature relative to the robot
// (the robot's own position features become zero).
enum class Frame { kAbsolute, kRobotRelative };

std::string_view to_string(StateView view);
std::string_view to_string(Frame frame);
StateView state_view_from_string(std::string_view s);
Frame frame_from_string(std::string_view s);

struct ActionSpace {
  std::vector<SkillPtr> skills;
  bool call_planner = true;
  std::size_t max_param_dim = 0;

  int call_planner_index() const { return static_cast<int>(skills.size()); }
  // One-hot over skills plus the CallPlanner slot, then padded parameters.
  std::size_t encoding_dim() const { return skills.size() + 1 + max_param_dim; }
};

ActionSpace make_action_space(const EnvSpec& env, bool call_planner);

struct BridgeAction {
  int skill_index = 0;
  std::optional<GroundAction> action;  // empty for CallPlanner

  bool is_call_planner() const { return !action.has_value(); }
  std::string to_string() const;
};

BridgeAction call_planner_action(const ActionSpace& space);
std::vector<double> encode_action(const ActionSpace& space, const BridgeAction& action);

struct BridgeMDP {
  const EnvSpec* env = nullptr;
  ActionSpace actions;
  StateView view = StateView::kFocused;
  Frame frame = Frame::kAbsolute;
  // Robot first, then the focus object. Empty means skills bind over all
  // objects of the state (planner-free learning).
  std::vector<Object> focus_objects;
  AtomSet goal;
  double gamma = 0.8;
  int horizon_remaining = 0;
};

struct BridgeSettings {
  StateView view = StateView::kFocused;
  Frame frame = Frame::kAbsolute;
  bool call_planner = true;
  // False for planner-free learning: no focus object, skills bind over all objects.
  bool focus = true;
  double gamma = 0.8;
};

// Nearest interactable object to the robot; ties by name. Throws Error if
// there is none.
Object select_focus_object(const State& state, const EnvSpec& env);

BridgeMDP make_bridge_mdp(const EnvSpec& env, const State& state, const AtomSet& goal,
                          const BridgeSettings& settings, int horizon_remaining);

std::size_t projected_dim(const EnvSpec& env, StateView view);
std::vector<double> project_state(const State& state, const BridgeMDP& mdp);

// Skill slots usable at this state: skill i is bindable from the MDP's object
// pool; the last slot is CallPlanner.
std::vector<char> skill_mask(const State& state, const BridgeMDP& mdp);

// n_sample uniform parameter draws per bindable skill, then CallPlanner
// (if the MDP has it).
std::vector<BridgeAction> candidate_actions(const State& state, const BridgeMDP& mdp, int n_sample,
                                            std::mt19937_64& rng);

enum class RolloutOutcome { kGoal, kHorizon, kStuck };
std::string_view to_string(RolloutOutcome outcome);

struct RolloutResult {
  State next_state;
  int steps_consumed = 0;
  RolloutOutcome outcome = RolloutOutcome::kStuck;
  bool planner_failed = false;
  std::vector<std::string> actions;
};

// Replans from `state` and executes the plan until the goal holds, the task
// horizon is spent or the plan policy is stuck (or exhausted off-goal).
RolloutResult call_planner_rollout(const EnvSpec& env, const State& state, const Task& task, int steps_used,
                                   const SearchOptions& search = {});

double bridge_reward(const State& next_state, const AtomSet& goal);

struct TransitionRecord {
  std::vector<double> state;
  std::vector<double> action;
  double reward = 0.0;
  std::vector<double> next_state;
  bool terminal = false;
  std::vector<char> next_mask;  // skill_mask at the next state
};

class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void add(TransitionRecord record);
  std::size_t size() const { return records_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return records_.empty(); }
  const TransitionRecord& operator[](std::size_t i) const { return records_[i]; }
  // Uniform with replacement.
  std::vector<std::size_t> sample_indices(std::size_t batch, std::mt19937_64& rng) const;
  std::uint64_t total_added() const { return total_added_; }

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::uint64_t total_added_ = 0;
  std::vector<TransitionRecord> records_;
};

struct EpsilonSchedule {
  double start = 1.0;
  double decay = 3.8e-5;
  double floor = 0.05;

  double value(std::uint64_t t) const;
};

struct LearnerConfig {
  double gamma = 0.8;
  int n_sample = 10;
  int batch_size = 128;
  int train_iters = 10'000;
  std::size_t replay_capacity = 1'000'000;
  double tau = 2.5e-3;
  std::vector<std::size_t> hidden = kDefaultHidden;
  AdamConfig adam;
  EpsilonSchedule epsilon;
};

enum class TrainStatus { kTrained, kEmptyBuffer, kSkipped };

class QLearner {
 public:
  QLearner(ActionSpace space, std::size_t state_dim, LearnerConfig config, std::uint64_t seed);

  const ActionSpace& action_space() const { return space_; }
  const LearnerConfig& config() const { return config_; }
  std::size_t state_dim() const { return state_dim_; }
  const MLPParams& online() const { return online_; }
  const MLPParams& target() const { return target_; }
  MLPParams& online() { return online_; }
  MLPParams& target() { return target_; }
  const AdamState& adam() const { return adam_; }
  ReplayBuffer& buffer() { return buffer_; }
  const ReplayBuffer& buffer() const { return buffer_; }

  std::uint64_t steps() const { return steps_; }
  void advance() { ++steps_; }
  double epsilon() const { return config_.epsilon.value(steps_); }

  // Q_online(x, a) for each candidate.
  std::vector<double> q_values(std::span<const double> state, std::span<const BridgeAction> candidates) const;
  std::vector<double> td_targets(std::span<const std::size_t> batch);
  std::vector<double> td_targets(std::span<const TransitionRecord> batch);
  TrainStatus train_cycle();
  // One minibatch gradient step; returns the batch loss.
  double train_step();

  std::string checkpoint() const;
  void load_checkpoint(std::string_view text);

 private:
  Eigen::MatrixXd target_candidates();
  std::vector<double> targets_for(const std::vector<const TransitionRecord*>& records);

  ActionSpace space_;
  std::size_t state_dim_;
  LearnerConfig config_;
  std::mt19937_64 rng_;
  MLPParams online_;
  MLPParams target_;
  AdamState adam_;
  ReplayBuffer buffer_;
  std::uint64_t steps_ = 0;
  // Skill slot of each column produced by target_candidates().
  std::vector<int> candidate_slots_;
};

// With probability epsilon a uniform candidate, else the first argmax of
// Q_online. Does not advance the learner's step counter.
BridgeAction epsilon_greedy(const QLearner& learner, const State& state, const BridgeMDP& mdp,
                            std::mt19937_64& rng, std::optional<double> epsilon = std::nullopt);

}  // namespace bpl
