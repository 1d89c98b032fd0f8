#pragma once

// Deterministic simulated environments: Light Switch Door, Doorknobs and
// Coffee. Each environment bundles its object types, skills, predicates,
// planner operators, dynamics and task generator.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "bpl/operators.hpp"
#include "bpl/world.hpp"

namespace bpl {

enum class Split { kTrain, kEval };

std::string_view to_string(Split split);

// Structural ranges of generated tasks. `size` is the number of cells
// (Light Switch Door) or rooms (Doorknobs); `novelty` the number of doors
// (or rotated jugs for Coffee).
struct StructuralRanges {
  int size_min = 0;
  int size_max = 0;
  int novelty_min = 1;
  int novelty_max = 1;
};

struct TaskSampler {
  Split split = Split::kTrain;
  std::uint64_t rng_seed = 0;
  StructuralRanges ranges;
  // Constants of the deployment environment shared by every task drawn for
  // one run (e.g. the doorknob opening angle).
  std::uint64_t world_seed = 0;
};

struct EnvSpec {
  std::string name;
  // Declaration order is the canonical object order of the full-state view.
  std::vector<ObjectTypePtr> types;
  std::vector<SkillPtr> skills;
  std::vector<PredicatePtr> predicates;
  std::vector<PredicatePtr> planner_predicates;
  std::vector<OperatorPtr> operators;
  std::set<std::string, std::less<>> interactable_types;
  PositionMap position_features;
  // Features kept out of bridge projections: geometry the dynamics and focus
  // selection use but the bridge policy does not observe.
  PositionMap hidden_features;
  std::string robot_type = "robot";
  // Object slots per type for the zero-padded full-state view.
  std::map<std::string, int, std::less<>> max_objects;
  int default_cycles = 100;
  int default_eval_tasks = 10;

  std::function<State(const State&, const GroundAction&)> transition;
  // Returns nullopt when the drawn layout cannot be realized.
  std::function<std::optional<Task>(const TaskSampler&, std::mt19937_64&)> generate;
  // Number of novelty instances already overcome in a state (e.g. open doors).
  std::function<int(const State&)> resolved_novelties;

  StructuralRanges train_ranges;
  StructuralRanges eval_ranges;

  std::vector<PredicatePtr> all_predicates() const;
  SkillPtr skill(std::string_view skill_name) const;
  const ObjectTypePtr& type(std::string_view type_name) const;
  // Number of features of a type that bridge projections expose.
  std::size_t observed_dim(const ObjectType& t) const;
  StructuralRanges default_ranges(Split split) const {
    return split == Split::kTrain ? train_ranges : eval_ranges;
  }
};

const EnvSpec& light_switch_door();
const EnvSpec& doorknobs();
const EnvSpec& coffee();

// Throws Error for unknown names.
const EnvSpec& env_by_name(std::string_view name);
std::vector<std::string> env_names();

inline constexpr int kSamplerRetryCap = 100;

// Throws Error if no valid layout is found within kSamplerRetryCap draws.
Task sample_task(const EnvSpec& env, const TaskSampler& sampler);

// `count` tasks from one sampler stream; task i is independent of count.
std::vector<Task> sample_tasks(const EnvSpec& env, const TaskSampler& sampler, int count);

State step(const EnvSpec& env, const State& state, const GroundAction& action);

// Objects whose type is declared interactable, sorted by name.
std::vector<Object> interactable_objects(const EnvSpec& env, const State& state);

const Object& robot_of(const EnvSpec& env, const State& state);

// Light Switch Door constants.
namespace lsd {
inline constexpr double kLatchLow = 0.7;
inline constexpr double kLatchHigh = 0.9;
inline constexpr double kPushThreshold = 0.6;
inline constexpr double kLightOnLevel = 0.5;
// Fewest steps that solve a task when each door is opened by two low-level
// actions before crossing it.
int optimal_steps(int robot_cell, int light_cell, int doors);
}  // namespace lsd

namespace doorknobs_env {
inline constexpr double kKnobTolerance = 0.1;
inline constexpr int kHorizon = 200;
double wrapped_angle_distance(double a, double b);
}  // namespace doorknobs_env

namespace coffee_env {
inline constexpr double kGraspTolerance = 0.1;
inline constexpr int kHorizon = 100;
inline constexpr double kCupFilledLevel = 0.5;
}  // namespace coffee_env

}  // namespace bpl
