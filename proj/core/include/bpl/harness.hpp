#pragma once

// Online learning protocol: approaches, run loop over cycles, evaluation,
// smooth reward and seed aggregation, plus run-record IO.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bpl/bridge.hpp"
#include "bpl/envs.hpp"
#include "bpl/metapolicy.hpp"

namespace bpl {

enum class ApproachKind {
  kOurs,
  kOursNoFeatureSelection,
  kOursNoCallPlanner,
  kRandomBridge,
  kPurePlanning,
  kMapleQ,
};

std::string_view to_string(ApproachKind kind);
// Throws Error for unknown names.
ApproachKind approach_from_string(std::string_view name);
const std::vector<ApproachKind>& all_approaches();
bool is_learning(ApproachKind kind);

struct RunConfig {
  std::string env = "light_switch_door";
  ApproachKind approach = ApproachKind::kOurs;
  std::uint64_t seed = 0;
  int cycles = 100;
  int trajectories_per_cycle = 5;
  int steps_per_trajectory = 100;
  int n_train_tasks = 1;
  int n_eval_tasks = 10;
  int smooth_window = 25;
  StructuralRanges train_ranges;
  StructuralRanges eval_ranges;
  Frame frame = Frame::kRobotRelative;
  LearnerConfig learner;

  // Filled with the environment's cycles, eval task count and ranges.
  static RunConfig defaults_for(std::string_view env);
  // Throws Error naming the offending field.
  void validate() const;
  std::string run_key() const;
};

// Canonical `key = value` text of a resolved config (keys of module config).
std::string config_echo(const RunConfig& config);

struct PolicyStack {
  SolveOptions options;
  std::unique_ptr<QLearner> learner;
  std::unique_ptr<BridgeController> train_controller;
  std::unique_ptr<BridgeController> eval_controller;
};

// Throws Error for unknown environments.
PolicyStack build_approach(ApproachKind approach, const EnvSpec& env, const RunConfig& config);

struct CycleRecord {
  int cycle = 0;
  double train_reward = 0.0;
  double eval_reward = 0.0;
  double smooth_train = 0.0;
  double smooth_eval = 0.0;
  long long env_steps = 0;  // cumulative training env steps
  double eval_env_steps = 0.0;
  double epsilon = 0.0;
  std::uint64_t replay_size = 0;
  std::string train_status;
};

struct RunRecord {
  RunConfig config;
  std::string config_echo;
  std::vector<CycleRecord> cycles;
  std::vector<EpisodeRecord> train_episodes;
  std::vector<std::vector<EpisodeRecord>> eval_episodes;  // per cycle
  std::string checkpoint;  // file name of the final learner checkpoint, if any
  std::string final_learner_checkpoint;  // in-memory text, not serialized in records
  double wall_clock_seconds = 0.0;       // not serialized in records
};

struct RunHooks {
  // Called after every cycle; useful for progress output.
  std::function<void(const RunConfig&, const CycleRecord&)> on_cycle;
  bool keep_episodes = true;
};

std::vector<Task> train_tasks(const EnvSpec& env, const RunConfig& config);
std::vector<Task> eval_tasks(const EnvSpec& env, const RunConfig& config);

// Greedy evaluation of one policy stack on a frozen task set; never touches
// the learner's replay buffer or step counter.
std::vector<EpisodeRecord> evaluate(const EnvSpec& env, PolicyStack& stack, const std::vector<Task>& tasks,
                                    std::uint64_t seed, int cycle);

RunRecord run_online_learning(const RunConfig& config, const RunHooks& hooks = {});

std::vector<double> smooth_reward(const std::vector<double>& series, int window = 25);

struct AggregateRow {
  std::string env;
  std::string approach;
  int cycle = 0;
  double mean_smooth_train = 0.0;
  double var_smooth_train = 0.0;
  double mean_smooth_eval = 0.0;
  double var_smooth_eval = 0.0;
  double mean_env_steps = 0.0;
};

// Per-cycle sample mean and variance across seeds. Throws Error when the
// records differ in anything but the seed.
std::vector<AggregateRow> aggregate_seeds(const std::vector<RunRecord>& records);

// Serialization. Run records are JSON lines: one "run" header, one "cycle"
// line per cycle, "episode" lines, then a "summary" line.
void write_run_record(std::ostream& out, const RunRecord& record);
RunRecord read_run_record(std::istream& in);
std::string episode_json(const EpisodeRecord& episode);

inline constexpr std::string_view kAggregateHeader =
    "env,approach,cycle,mean_smooth_train,var_smooth_train,mean_smooth_eval,var_smooth_eval,mean_env_steps";
void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows);
// One figure panel: env, approach, cycle, split, mean_smooth, var_smooth.
void write_panel_csv(std::ostream& out, const std::vector<AggregateRow>& rows, Split split);
// cycle<TAB>mean<TAB>lower<TAB>upper for one curve (mean -/+ one standard deviation).
void write_plot_tsv(std::ostream& out, const std::vector<AggregateRow>& rows, Split split);

// Runs configs on up to `workers` threads; results come back in input order.
// A run that throws yields a record with no cycles and the message in `errors`.
std::vector<RunRecord> run_all(const std::vector<RunConfig>& configs, int workers,
                               std::vector<std::string>* errors = nullptr, const RunHooks& hooks = {});

}  // namespace bpl
