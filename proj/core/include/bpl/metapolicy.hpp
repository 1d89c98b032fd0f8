#pragma once

// Plan, bridge, replan: the alternation loop that solves one task.

#include <random>
#include <string>
#include <vector>

#include "bpl/bridge.hpp"
#include "bpl/envs.hpp"

namespace bpl {

enum class SolveMode { kTrain, kEval };

class BridgeController {
 public:
  virtual ~BridgeController() = default;
  virtual BridgeAction act(const State& state, const BridgeMDP& mdp, std::mt19937_64& rng) = 0;
};

// Epsilon-greedy on the learner's schedule when exploring, greedy otherwise.
class LearnedBridge : public BridgeController {
 public:
  LearnedBridge(const QLearner& learner, bool explore) : learner_(&learner), explore_(explore) {}
  BridgeAction act(const State& state, const BridgeMDP& mdp, std::mt19937_64& rng) override;

 private:
  const QLearner* learner_;
  bool explore_;
};

// Uniform over the candidate set, CallPlanner included.
class RandomBridge : public BridgeController {
 public:
  explicit RandomBridge(int n_sample) : n_sample_(n_sample) {}
  BridgeAction act(const State& state, const BridgeMDP& mdp, std::mt19937_64& rng) override;

 private:
  int n_sample_;
};

class CallPlannerBridge : public BridgeController {
 public:
  BridgeAction act(const State& state, const BridgeMDP& mdp, std::mt19937_64& rng) override;
};

enum class SegmentKind { kPlanner, kBridge };

struct SegmentLog {
  SegmentKind kind = SegmentKind::kPlanner;
  int env_steps = 0;
  std::vector<std::string> actions;
  // Planner: goal, horizon, stuck or planner_failed. Bridge: call_planner,
  // goal, horizon or budget.
  std::string outcome;
  std::string focus;
  int novelties_before = 0;
  int novelties_after = 0;
};

struct EpisodeRecord {
  std::string task_id;
  bool success = false;
  int env_steps = 0;
  int alternations = 0;  // bridge segments
  int bridge_actions = 0;
  int call_planner_calls = 0;
  int planner_segments = 0;
  double reward = 0.0;
  int novelties_initial = 0;
  int novelties_final = 0;
  std::vector<SegmentLog> segments;
};

struct SolveOptions {
  SolveMode mode = SolveMode::kEval;
  // Bridge actions per training trajectory (CallPlanner counts as one).
  int trajectory_step_budget = 100;
  bool use_planner = true;
  BridgeSettings bridge;
  SearchOptions search;
  // Train mode only: receives transitions and advances its step counter.
  QLearner* learner = nullptr;
};

EpisodeRecord solve_task(const EnvSpec& env, const Task& task, BridgeController& controller,
                         const SolveOptions& options, std::mt19937_64& rng);

}  // namespace bpl
