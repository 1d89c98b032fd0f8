#pragma once

// Symbolic planner over ground STRIPS problems: grounding, delete-relaxation
// heuristics (h_max, LM-Cut), A* search, and the executable plan policy with
// effect/precondition monitoring.

#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bpl/envs.hpp"
#include "bpl/operators.hpp"
#include "bpl/world.hpp"

namespace bpl {

class ResourceError : public Error {
 public:
  using Error::Error;
};

inline constexpr int kInfiniteCost = std::numeric_limits<int>::max();

// All type-consistent bindings of each operator over `objects`. Preconditions
// on static predicates (never added or deleted by any operator) are checked
// against `init_atoms` and failing bindings are dropped.
std::vector<GroundOperator> ground(std::span<const OperatorPtr> operators,
                                   std::span<const Object> objects, const AtomSet& init_atoms);

// Integer-indexed form of a ground problem used by search and heuristics.
class StripsProblem {
 public:
  struct Op {
    std::vector<int> pre;
    std::vector<int> add;
    std::vector<int> del;
    int cost = 1;
  };

  StripsProblem(const AtomSet& init, const AtomSet& goal, std::span<const GroundOperator> ops);

  int num_facts() const { return static_cast<int>(facts_.size()); }
  const std::vector<Op>& ops() const { return ops_; }
  const std::vector<int>& init() const { return init_; }
  const std::vector<int>& goal() const { return goal_; }
  const GroundAtom& fact(int id) const { return facts_[static_cast<std::size_t>(id)]; }
  // -1 for atoms that no operator mentions.
  int fact_id(const GroundAtom& atom) const;
  std::vector<int> encode(const AtomSet& atoms) const;

 private:
  int intern(const GroundAtom& atom);

  std::vector<GroundAtom> facts_;
  std::map<GroundAtom, int> index_;
  std::vector<Op> ops_;
  std::vector<int> init_;
  std::vector<int> goal_;
};

// Heuristics evaluated on a sorted fact-id state. Unreachable goals yield
// kInfiniteCost.
class RelaxedHeuristics {
 public:
  explicit RelaxedHeuristics(const StripsProblem& problem);

  int hmax(std::span<const int> state);
  int lmcut(std::span<const int> state);

 private:
  // Fills fact_cost_ using op_cost_; returns the h_max of the goal.
  int compute_hmax(std::span<const int> state);

  const StripsProblem& problem_;
  int goal_fact_;
  int true_fact_;
  std::vector<std::vector<int>> pre_;
  std::vector<std::vector<int>> add_;
  std::vector<int> base_cost_;
  std::vector<std::vector<int>> pre_of_;  // fact -> ops having it as precondition
  std::vector<int> fact_cost_;
  std::vector<int> op_cost_;
  std::vector<int> unsatisfied_;
};

int hmax(const AtomSet& atoms, const AtomSet& goal, std::span<const GroundOperator> ops);
int lmcut(const AtomSet& atoms, const AtomSet& goal, std::span<const GroundOperator> ops);

enum class Heuristic { kLmCut, kHMax, kBlind };

struct SearchOptions {
  Heuristic heuristic = Heuristic::kLmCut;
  std::size_t max_nodes = 1'000'000;
  // Prints the ground problem in list syntax to std::clog before searching.
  bool verbose = false;
};

// Minimum-length skeleton, or nullopt if the goal is unreachable. Throws
// ResourceError once more than max_nodes nodes are generated.
std::optional<Skeleton> astar_plan(const AtomSet& init, const AtomSet& goal,
                                   std::span<const GroundOperator> ops, const SearchOptions& options = {});

// Abstracts the state with environment and planner predicates, grounds the
// environment's operators over the state's objects and searches.
std::optional<Skeleton> plan_from_state(const EnvSpec& env, const State& state, const AtomSet& goal,
                                        const SearchOptions& options = {});

std::string dump_problem(const AtomSet& init, const AtomSet& goal, std::span<const GroundOperator> ops);

enum class PlanStatus { kOnTrack, kStuck, kExhausted };
enum class Progress { kAdvance, kStuck };

struct PlanOutput {
  std::optional<GroundAction> action;  // set iff status == kOnTrack
  PlanStatus status = PlanStatus::kOnTrack;
};

// Executes a skeleton operator by operator. After every executed action the
// caller reports the resulting state through check_progress; a failed check
// latches the policy into the stuck status.
class PlanPolicy {
 public:
  PlanPolicy(Skeleton skeleton, const EnvSpec& env);

  PlanOutput next(const State& state);
  // Throws Error if no action has been emitted since the last check.
  Progress check_progress(const State& resulting_state);

  std::size_t cursor() const { return cursor_; }
  std::size_t size() const { return skeleton_.size(); }
  const Skeleton& skeleton() const { return skeleton_; }
  bool stuck() const { return stuck_; }
  bool exhausted() const { return !stuck_ && cursor_ == skeleton_.size(); }
  // First state in which the monitor failed.
  const std::optional<State>& stuck_state() const { return stuck_state_; }

 private:
  Skeleton skeleton_;
  const EnvSpec* env_;
  std::vector<PredicatePtr> predicates_;
  std::size_t cursor_ = 0;
  bool stuck_ = false;
  bool awaiting_check_ = false;
  std::optional<State> stuck_state_;
};

PlanPolicy make_plan_policy(Skeleton skeleton, const EnvSpec& env);

}  // namespace bpl
