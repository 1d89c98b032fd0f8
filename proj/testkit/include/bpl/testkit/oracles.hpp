#pragma once

// Independent reference implementations used by tests and the acceptance
// suite. Everything here is written to be obviously correct, not fast.

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "bpl/bridge.hpp"
#include "bpl/metapolicy.hpp"
#include "bpl/neural.hpp"
#include "bpl/planner.hpp"

namespace bpl::testkit {

// Breadth-first search over atom sets. Returns the optimal plan length or
// nullopt if the goal is unreachable within `max_states` expansions.
std::optional<int> bfs_plan_length(const AtomSet& init, const AtomSet& goal, std::span<const GroundOperator> ops,
                                   std::size_t max_states = 200'000);

// Every type-consistent binding of every operator, filtered by the
// preconditions on static predicates; no pruning during enumeration.
std::vector<GroundOperator> ground_exhaustive(std::span<const OperatorPtr> operators,
                                              std::span<const Object> objects, const AtomSet& init_atoms);

// h_max by value iteration to a fixed point over the relaxed problem.
int hmax_fixpoint(const AtomSet& atoms, const AtomSet& goal, std::span<const GroundOperator> ops);

// Cost of the cheapest relaxed plan by exhaustive search over reachable
// relaxed fact sets (exponential; tiny instances only).
std::optional<int> relaxed_optimum(const AtomSet& atoms, const AtomSet& goal, std::span<const GroundOperator> ops,
                                   std::size_t max_states = 200'000);

// Central differences of forward() with respect to every parameter.
MLPGrads finite_difference_grad(const MLPParams& params, std::span<const double> input, double h = 1e-5);

// max |a - b| / max(|a|, |b|, floor) over all entries.
double max_relative_error(const MLPParams& a, const MLPParams& b, double floor = 1e-6);

// Tasks with no novelty: Light Switch Door and Doorknobs with zero doors and
// at most `max_size` cells or rooms, alternating environments.
std::vector<Task> door_free_instances(int count, std::uint64_t seed, int max_size = 6);
// Tasks with `min_doors`..`max_doors` doors, alternating environments.
std::vector<Task> doored_instances(int count, std::uint64_t seed, int max_size = 8, int min_doors = 1,
                                   int max_doors = 2);
// Environment that generated `task`, recognised by its object types.
const EnvSpec& env_of(const Task& task);

// Index of the first skeleton action whose execution leaves the world state
// unchanged, replaying the skeleton open loop from the task's initial state.
std::optional<std::size_t> first_blocked_action(const EnvSpec& env, const Task& task, const Skeleton& skeleton);

// Bridge that knows the door dynamics: opens the nearest closed door with
// the minimal correct low-level actions, then calls the planner.
class ScriptedBridge : public BridgeController {
 public:
  BridgeAction act(const State& state, const BridgeMDP& mdp, std::mt19937_64& rng) override;
  int low_level_actions() const { return low_level_; }

 private:
  int low_level_ = 0;
};

// Two-action, one-step MDP: action 0 earns 1, action 1 earns 0, both
// terminal. Returns the learner's Q estimates after `iters` train steps.
std::pair<double, double> two_action_sanity_q(int iters, std::uint64_t seed);

}  // namespace bpl::testkit
