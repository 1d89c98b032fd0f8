#pragma once

// Property suites shared by the unit tests, the acceptance suite and
// `bpl selftest`. Each check returns a verdict plus a one-line detail.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace bpl::testkit {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

// A* skeleton length equals the BFS optimum on door-free instances.
CheckResult planner_optimality(int instances = 100, std::uint64_t seed = 11);
// 0 <= h_max <= LM-Cut <= h* at the initial state; h_max also matches the
// fixpoint oracle and LM-Cut stays below the relaxed optimum.
CheckResult heuristic_ordering(int instances = 100, std::uint64_t seed = 11);
// No stuck on door-free episodes; stuck at exactly the first blocked move on
// doored ones.
CheckResult stuck_detection(int episodes = 100, std::uint64_t seed = 13);
CheckResult grounding_matches_exhaustive(int instances = 40, std::uint64_t seed = 17);
CheckResult skeleton_determinism(std::uint64_t seed = 71);

// Backward pass against central differences on random nets.
CheckResult gradient_check(int nets = 20, std::uint64_t seed = 19, double tolerance = 1e-4);
CheckResult sanity_mdp_q(double tolerance = 1e-2);
CheckResult epsilon_closed_form();
CheckResult polyak_adam_fixtures(double tolerance = 1e-12);
CheckResult forward_product_matches_forward(std::uint64_t seed = 23);
CheckResult checkpoint_roundtrip(std::uint64_t seed = 29);
CheckResult polyak_contraction(std::uint64_t seed = 73);

CheckResult abstraction_matches_enumeration(std::uint64_t seed = 31);
// Monotonicity and determinism of abstract, goal_holds as subset test,
// symmetry and triangle inequality of object_distance.
CheckResult world_algebra(std::uint64_t seed = 61);
CheckResult task_generator_invariants(int per_split = 30);
CheckResult transition_determinism(std::uint64_t seed = 37);
// No-op safety, door protocol and novelty blocking.
CheckResult env_protocols(std::uint64_t seed = 67);

CheckResult candidate_set_properties(std::uint64_t seed = 41);
CheckResult projection_properties(std::uint64_t seed = 43);
CheckResult learner_determinism(std::uint64_t seed = 47);
// Perturbing a non-focus object leaves the focused projection unchanged.
CheckResult projection_locality(std::uint64_t seed = 79);
// steps_consumed equals the executed transitions of a CallPlanner rollout.
CheckResult rollout_accounting(std::uint64_t seed = 83);
// Online selection and target evaluation in the TD target.
CheckResult double_dqn_decoupling();

CheckResult scripted_bridge_solves(int tasks = 12, std::uint64_t seed = 53);
// Segment logs partition the steps, the horizon holds and eval is repeatable.
CheckResult episode_accounting(std::uint64_t seed = 89);

CheckResult smooth_and_aggregate_oracles(std::uint64_t seed = 59);
CheckResult config_echo_roundtrip();
CheckResult tiny_run_determinism();
// Evaluation leaves replay and epsilon untouched; maple_q never plans and
// no_callplanner never calls the planner.
CheckResult eval_isolation_and_contracts();

struct Suite {
  std::string module;
  std::vector<std::function<CheckResult()>> checks;
};

const std::vector<Suite>& all_suites();

}  // namespace bpl::testkit
