#include "bpl/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <chrono>
#include <istream>
#include <mutex>
#include <ostream>
#include <thread>

#include "bpl/config.hpp"
#include "json_io.hpp"

namespace bpl {

namespace {

const std::vector<std::pair<ApproachKind, std::string_view>> kApproachNames{
    {ApproachKind::kOurs, "ours"},
    {ApproachKind::kOursNoFeatureSelection, "ours_no_feature_selection"},
    {ApproachKind::kOursNoCallPlanner, "ours_no_callplanner"},
    {ApproachKind::kRandomBridge, "random_bridge"},
    {ApproachKind::kPurePlanning, "pure_planning"},
    {ApproachKind::kMapleQ, "maple_q"},
};

std::mt19937_64 derived_rng(std::uint64_t seed, std::uint32_t stream, std::uint64_t a = 0, std::uint64_t b = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream,
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)};
  return std::mt19937_64(seq);
}

std::uint64_t derived_seed(std::uint64_t seed, std::uint32_t stream) { return derived_rng(seed, stream)(); }

std::string format_real(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

}  // namespace

std::string_view to_string(ApproachKind kind) {
  for (const auto& [k, n] : kApproachNames) {
    if (k == kind) return n;
  }
  return "unknown";
}

ApproachKind approach_from_string(std::string_view name) {
  for (const auto& [k, n] : kApproachNames) {
    if (n == name) return k;
  }
  throw Error("unknown approach '" + std::string(name) + "'");
}

const std::vector<ApproachKind>& all_approaches() {
  static const std::vector<ApproachKind> all = [] {
    std::vector<ApproachKind> v;
    for (const auto& [k, n] : kApproachNames) v.push_back(k);
    return v;
  }();
  return all;
}

bool is_learning(ApproachKind kind) {
  return kind == ApproachKind::kOurs || kind == ApproachKind::kOursNoFeatureSelection ||
         kind == ApproachKind::kOursNoCallPlanner || kind == ApproachKind::kMapleQ;
}

RunConfig RunConfig::defaults_for(std::string_view env_name) {
  const EnvSpec& env = env_by_name(env_name);
  RunConfig c;
  c.env = env.name;
  c.cycles = env.default_cycles;
  c.n_eval_tasks = env.default_eval_tasks;
  c.train_ranges = env.train_ranges;
  c.eval_ranges = env.eval_ranges;
  return c;
}

void RunConfig::validate() const {
  auto fail = [](const std::string& key, const std::string& why) { throw Error(key + ": " + why); };
  env_by_name(env);
  if (cycles < 1) fail("cycles", "must be >= 1");
  if (trajectories_per_cycle < 1) fail("protocol.trajectories_per_cycle", "must be >= 1");
  if (steps_per_trajectory < 1) fail("protocol.steps_per_trajectory", "must be >= 1");
  if (n_train_tasks < 1) fail("protocol.n_train_tasks", "must be >= 1");
  if (n_eval_tasks < 1) fail("protocol.n_eval_tasks", "must be >= 1");
  if (smooth_window < 1) fail("protocol.smooth_window", "must be >= 1");
  for (const auto& [name, r] : {std::pair{"tasks.train", train_ranges}, std::pair{"tasks.eval", eval_ranges}}) {
    if (r.size_min < 0 || r.size_max < r.size_min) fail(std::string(name) + ".size_max", "must be >= size_min >= 0");
    if (r.novelty_min < 0 || r.novelty_max < r.novelty_min) {
      fail(std::string(name) + ".novelty_max", "must be >= novelty_min >= 0");
    }
  }
  const auto& l = learner;
  if (!(l.gamma > 0.0 && l.gamma < 1.0)) fail("learner.gamma", "must lie in (0,1)");
  if (!(l.adam.lr > 0.0)) fail("learner.lr", "must be > 0");
  if (!(l.adam.beta1 >= 0.0 && l.adam.beta1 < 1.0)) fail("learner.beta1", "must lie in [0,1)");
  if (!(l.adam.beta2 >= 0.0 && l.adam.beta2 < 1.0)) fail("learner.beta2", "must lie in [0,1)");
  if (!(l.adam.eps > 0.0)) fail("learner.adam_eps", "must be > 0");
  if (!(l.adam.weight_decay >= 0.0)) fail("learner.weight_decay", "must be >= 0");
  if (l.batch_size < 1) fail("learner.batch_size", "must be >= 1");
  if (l.train_iters < 0) fail("learner.train_iters", "must be >= 0");
  if (l.replay_capacity < 1) fail("learner.replay_capacity", "must be >= 1");
  if (!(l.tau >= 0.0 && l.tau <= 1.0)) fail("learner.polyak", "must lie in [0,1]");
  if (l.hidden.empty() || std::any_of(l.hidden.begin(), l.hidden.end(), [](std::size_t h) { return h == 0; })) {
    fail("learner.hidden", "needs at least one positive width");
  }
  if (l.n_sample < 1) fail("bridge.n_sample", "must be >= 1");
  if (!(l.epsilon.start >= 0.0 && l.epsilon.start <= 1.0)) fail("learner.epsilon_start", "must lie in [0,1]");
  if (!(l.epsilon.decay >= 0.0)) fail("learner.epsilon_decay", "must be >= 0");
  if (!(l.epsilon.floor >= 0.0 && l.epsilon.floor <= 1.0)) fail("learner.epsilon_floor", "must lie in [0,1]");
}

std::string RunConfig::run_key() const {
  return env + "__" + std::string(to_string(approach)) + "__seed" + std::to_string(seed);
}

PolicyStack build_approach(ApproachKind approach, const EnvSpec& env, const RunConfig& config) {
  PolicyStack stack;
  SolveOptions& o = stack.options;
  o.trajectory_step_budget = config.steps_per_trajectory;
  o.bridge.frame = config.frame;
  o.bridge.gamma = config.learner.gamma;
  switch (approach) {
    case ApproachKind::kOurs: break;
    case ApproachKind::kOursNoFeatureSelection: o.bridge.view = StateView::kFull; break;
    case ApproachKind::kOursNoCallPlanner: o.bridge.call_planner = false; break;
    case ApproachKind::kRandomBridge:
      stack.train_controller = std::make_unique<RandomBridge>(config.learner.n_sample);
      stack.eval_controller = std::make_unique<RandomBridge>(config.learner.n_sample);
      return stack;
    case ApproachKind::kPurePlanning:
      stack.train_controller = std::make_unique<CallPlannerBridge>();
      stack.eval_controller = std::make_unique<CallPlannerBridge>();
      return stack;
    case ApproachKind::kMapleQ:
      o.use_planner = false;
      o.bridge.focus = false;
      o.bridge.view = StateView::kFull;
      o.bridge.call_planner = false;
      break;
  }
  stack.learner = std::make_unique<QLearner>(make_action_space(env, o.bridge.call_planner),
                                             projected_dim(env, o.bridge.view), config.learner,
                                             derived_seed(config.seed, 1));
  stack.train_controller = std::make_unique<LearnedBridge>(*stack.learner, true);
  stack.eval_controller = std::make_unique<LearnedBridge>(*stack.learner, false);
  return stack;
}

std::vector<Task> train_tasks(const EnvSpec& env, const RunConfig& config) {
  return sample_tasks(env, {Split::kTrain, config.seed, config.train_ranges, config.seed}, config.n_train_tasks);
}

std::vector<Task> eval_tasks(const EnvSpec& env, const RunConfig& config) {
  return sample_tasks(env, {Split::kEval, config.seed, config.eval_ranges, config.seed}, config.n_eval_tasks);
}

std::vector<EpisodeRecord> evaluate(const EnvSpec& env, PolicyStack& stack, const std::vector<Task>& tasks,
                                    std::uint64_t seed, int cycle) {
  SolveOptions o = stack.options;
  o.mode = SolveMode::kEval;
  o.learner = nullptr;
  std::vector<EpisodeRecord> out;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    auto rng = derived_rng(seed, 3, static_cast<std::uint64_t>(cycle), i);
    out.push_back(solve_task(env, tasks[i], *stack.eval_controller, o, rng));
  }
  return out;
}

RunRecord run_online_learning(const RunConfig& config, const RunHooks& hooks) {
  const auto started = std::chrono::steady_clock::now();
  config.validate();
  const EnvSpec& env = env_by_name(config.env);
  RunRecord rec;
  rec.config = config;
  rec.config_echo = config_echo(config);

  const auto train = train_tasks(env, config);
  const auto evals = eval_tasks(env, config);
  PolicyStack stack = build_approach(config.approach, env, config);
  SolveOptions train_options = stack.options;
  train_options.mode = SolveMode::kTrain;
  train_options.learner = stack.learner.get();
  auto act_rng = derived_rng(config.seed, 2);

  std::vector<double> train_series;
  std::vector<double> eval_series;
  long long env_steps = 0;
  for (int c = 0; c < config.cycles; ++c) {
    CycleRecord cr;
    cr.cycle = c;
    double successes = 0.0;
    for (int k = 0; k < config.trajectories_per_cycle; ++k) {
      const Task& task = train[static_cast<std::size_t>(k) % train.size()];
      EpisodeRecord ep = solve_task(env, task, *stack.train_controller, train_options, act_rng);
      successes += ep.reward;
      env_steps += ep.env_steps;
      if (hooks.keep_episodes) rec.train_episodes.push_back(std::move(ep));
    }
    cr.train_reward = successes / config.trajectories_per_cycle;

    if (stack.learner) {
      switch (stack.learner->train_cycle()) {
        case TrainStatus::kTrained: cr.train_status = "trained"; break;
        case TrainStatus::kEmptyBuffer: cr.train_status = "empty_buffer"; break;
        case TrainStatus::kSkipped: cr.train_status = "skipped"; break;
      }
      cr.epsilon = stack.learner->epsilon();
      cr.replay_size = stack.learner->buffer().size();
    } else {
      cr.train_status = "no_learning";
    }

    auto eval_eps = evaluate(env, stack, evals, config.seed, c);
    double eval_success = 0.0;
    double eval_steps = 0.0;
    for (const auto& ep : eval_eps) {
      eval_success += ep.reward;
      eval_steps += ep.env_steps;
    }
    cr.eval_reward = eval_success / static_cast<double>(eval_eps.size());
    cr.eval_env_steps = eval_steps / static_cast<double>(eval_eps.size());
    cr.env_steps = env_steps;
    if (hooks.keep_episodes) rec.eval_episodes.push_back(std::move(eval_eps));

    train_series.push_back(cr.train_reward);
    eval_series.push_back(cr.eval_reward);
    cr.smooth_train = smooth_reward(train_series, config.smooth_window).back();
    cr.smooth_eval = smooth_reward(eval_series, config.smooth_window).back();
    rec.cycles.push_back(cr);
    if (hooks.on_cycle) hooks.on_cycle(config, cr);
  }
  if (stack.learner) {
    rec.final_learner_checkpoint = stack.learner->checkpoint();
    rec.checkpoint = config.run_key() + ".ckpt.json";
  }
  rec.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return rec;
}

std::vector<double> smooth_reward(const std::vector<double>& series, int window) {
  if (window < 1) throw Error("smooth_reward: window must be >= 1");
  std::vector<double> out;
  out.reserve(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    const std::size_t lo = i + 1 >= static_cast<std::size_t>(window) ? i + 1 - static_cast<std::size_t>(window) : 0;
    double sum = 0.0;
    for (std::size_t j = lo; j <= i; ++j) sum += series[j];
    out.push_back(sum / static_cast<double>(i - lo + 1));
  }
  return out;
}

namespace {

std::string echo_without_seed(const std::string& echo) {
  std::string out;
  std::size_t pos = 0;
  while (pos < echo.size()) {
    std::size_t nl = echo.find('\n', pos);
    if (nl == std::string::npos) nl = echo.size();
    const std::string_view line(echo.data() + pos, nl - pos);
    if (!line.starts_with("seed ")) {
      out.append(line);
      out.push_back('\n');
    }
    pos = nl + 1;
  }
  return out;
}

// Shifted by the first sample so identical inputs give exactly zero variance.
std::pair<double, double> mean_var(const std::vector<double>& v) {
  const double shift = v.front();
  double m = 0.0;
  for (double x : v) m += x - shift;
  m /= static_cast<double>(v.size());
  if (v.size() < 2) return {shift + m, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - shift - m) * (x - shift - m);
  return {shift + m, ss / static_cast<double>(v.size() - 1)};
}

}  // namespace

std::vector<AggregateRow> aggregate_seeds(const std::vector<RunRecord>& records) {
  if (records.empty()) return {};
  const std::string reference = echo_without_seed(records.front().config_echo);
  for (const auto& r : records) {
    if (echo_without_seed(r.config_echo) != reference) {
      throw Error("aggregate_seeds: run " + r.config.run_key() + " differs from " +
                  records.front().config.run_key() + " in more than the seed");
    }
    if (r.cycles.size() != records.front().cycles.size()) {
      throw Error("aggregate_seeds: run " + r.config.run_key() + " has a different number of cycles");
    }
  }
  std::vector<AggregateRow> rows;
  for (std::size_t c = 0; c < records.front().cycles.size(); ++c) {
    std::vector<double> tr, ev, steps;
    for (const auto& r : records) {
      tr.push_back(r.cycles[c].smooth_train);
      ev.push_back(r.cycles[c].smooth_eval);
      steps.push_back(static_cast<double>(r.cycles[c].env_steps));
    }
    AggregateRow row;
    row.env = records.front().config.env;
    row.approach = std::string(to_string(records.front().config.approach));
    row.cycle = static_cast<int>(c);
    std::tie(row.mean_smooth_train, row.var_smooth_train) = mean_var(tr);
    std::tie(row.mean_smooth_eval, row.var_smooth_eval) = mean_var(ev);
    row.mean_env_steps = mean_var(steps).first;
    rows.push_back(row);
  }
  return rows;
}

namespace {

nlohmann::json segment_json(const SegmentLog& s) {
  return {{"kind", s.kind == SegmentKind::kPlanner ? "planner" : "bridge"},
          {"env_steps", s.env_steps},
          {"outcome", s.outcome},
          {"focus", s.focus},
          {"novelties_before", s.novelties_before},
          {"novelties_after", s.novelties_after},
          {"actions", s.actions}};
}

SegmentLog segment_from(const nlohmann::json& j) {
  SegmentLog s;
  s.kind = j.at("kind").get<std::string>() == "planner" ? SegmentKind::kPlanner : SegmentKind::kBridge;
  s.env_steps = j.at("env_steps").get<int>();
  s.outcome = j.at("outcome").get<std::string>();
  s.focus = j.at("focus").get<std::string>();
  s.novelties_before = j.at("novelties_before").get<int>();
  s.novelties_after = j.at("novelties_after").get<int>();
  s.actions = j.at("actions").get<std::vector<std::string>>();
  return s;
}

nlohmann::json episode_to_json(const EpisodeRecord& e) {
  nlohmann::json segs = nlohmann::json::array();
  for (const auto& s : e.segments) segs.push_back(segment_json(s));
  return {{"task", e.task_id},
          {"success", e.success},
          {"env_steps", e.env_steps},
          {"alternations", e.alternations},
          {"bridge_actions", e.bridge_actions},
          {"call_planner_calls", e.call_planner_calls},
          {"planner_segments", e.planner_segments},
          {"reward", e.reward},
          {"novelties_initial", e.novelties_initial},
          {"novelties_final", e.novelties_final},
          {"segments", segs}};
}

EpisodeRecord episode_from(const nlohmann::json& j) {
  EpisodeRecord e;
  e.task_id = j.at("task").get<std::string>();
  e.success = j.at("success").get<bool>();
  e.env_steps = j.at("env_steps").get<int>();
  e.alternations = j.at("alternations").get<int>();
  e.bridge_actions = j.at("bridge_actions").get<int>();
  e.call_planner_calls = j.at("call_planner_calls").get<int>();
  e.planner_segments = j.at("planner_segments").get<int>();
  e.reward = j.at("reward").get<double>();
  e.novelties_initial = j.at("novelties_initial").get<int>();
  e.novelties_final = j.at("novelties_final").get<int>();
  for (const auto& s : j.at("segments")) e.segments.push_back(segment_from(s));
  return e;
}

nlohmann::json cycle_json(const CycleRecord& c) {
  return {{"type", "cycle"},
          {"cycle", c.cycle},
          {"train_reward", c.train_reward},
          {"eval_reward", c.eval_reward},
          {"smooth_train", c.smooth_train},
          {"smooth_eval", c.smooth_eval},
          {"env_steps", c.env_steps},
          {"eval_env_steps", c.eval_env_steps},
          {"epsilon", c.epsilon},
          {"replay_size", c.replay_size},
          {"train_status", c.train_status}};
}

CycleRecord cycle_from(const nlohmann::json& j) {
  CycleRecord c;
  c.cycle = j.at("cycle").get<int>();
  c.train_reward = j.at("train_reward").get<double>();
  c.eval_reward = j.at("eval_reward").get<double>();
  c.smooth_train = j.at("smooth_train").get<double>();
  c.smooth_eval = j.at("smooth_eval").get<double>();
  c.env_steps = j.at("env_steps").get<long long>();
  c.eval_env_steps = j.at("eval_env_steps").get<double>();
  c.epsilon = j.at("epsilon").get<double>();
  c.replay_size = j.at("replay_size").get<std::uint64_t>();
  c.train_status = j.at("train_status").get<std::string>();
  return c;
}

}  // namespace

std::string episode_json(const EpisodeRecord& episode) { return episode_to_json(episode).dump(); }

void write_run_record(std::ostream& out, const RunRecord& record) {
  out << nlohmann::json{{"type", "run"},
                        {"run_key", record.config.run_key()},
                        {"env", record.config.env},
                        {"approach", to_string(record.config.approach)},
                        {"seed", record.config.seed},
                        {"config", record.config_echo}}
             .dump()
      << '\n';
  for (const auto& c : record.cycles) out << cycle_json(c).dump() << '\n';
  for (const auto& e : record.train_episodes) {
    auto j = episode_to_json(e);
    j["type"] = "episode";
    j["phase"] = "train";
    out << j.dump() << '\n';
  }
  for (std::size_t c = 0; c < record.eval_episodes.size(); ++c) {
    for (const auto& e : record.eval_episodes[c]) {
      auto j = episode_to_json(e);
      j["type"] = "episode";
      j["phase"] = "eval";
      j["cycle"] = c;
      out << j.dump() << '\n';
    }
  }
  const double final_eval = record.cycles.empty() ? 0.0 : record.cycles.back().smooth_eval;
  out << nlohmann::json{{"type", "summary"},
                        {"cycles", record.cycles.size()},
                        {"final_smooth_eval", final_eval},
                        {"checkpoint", record.checkpoint}}
             .dump()
      << '\n';
}

RunRecord read_run_record(std::istream& in) {
  RunRecord rec;
  bool have_header = false;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      const auto type = j.at("type").get<std::string>();
      if (type == "run") {
        rec.config_echo = j.at("config").get<std::string>();
        rec.config = config_from_echo(rec.config_echo);
        have_header = true;
      } else if (type == "cycle") {
        rec.cycles.push_back(cycle_from(j));
      } else if (type == "episode") {
        EpisodeRecord e = episode_from(j);
        if (j.at("phase").get<std::string>() == "train") {
          rec.train_episodes.push_back(std::move(e));
        } else {
          const auto c = j.at("cycle").get<std::size_t>();
          if (rec.eval_episodes.size() <= c) rec.eval_episodes.resize(c + 1);
          rec.eval_episodes[c].push_back(std::move(e));
        }
      } else if (type == "summary") {
        rec.checkpoint = j.at("checkpoint").get<std::string>();
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error("run record line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (!have_header) throw Error("run record has no header line");
  return rec;
}

void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows) {
  out << kAggregateHeader << '\n';
  for (const auto& r : rows) {
    out << r.env << ',' << r.approach << ',' << r.cycle << ',' << format_real(r.mean_smooth_train) << ','
        << format_real(r.var_smooth_train) << ',' << format_real(r.mean_smooth_eval) << ','
        << format_real(r.var_smooth_eval) << ',' << format_real(r.mean_env_steps) << '\n';
  }
}

void write_panel_csv(std::ostream& out, const std::vector<AggregateRow>& rows, Split split) {
  out << "env,approach,cycle,split,mean_smooth,var_smooth\n";
  const bool tr = split == Split::kTrain;
  for (const auto& r : rows) {
    out << r.env << ',' << r.approach << ',' << r.cycle << ',' << to_string(split) << ','
        << format_real(tr ? r.mean_smooth_train : r.mean_smooth_eval) << ','
        << format_real(tr ? r.var_smooth_train : r.var_smooth_eval) << '\n';
  }
}

void write_plot_tsv(std::ostream& out, const std::vector<AggregateRow>& rows, Split split) {
  out << "cycle\tmean\tlower\tupper\n";
  const bool tr = split == Split::kTrain;
  for (const auto& r : rows) {
    const double m = tr ? r.mean_smooth_train : r.mean_smooth_eval;
    const double sd = std::sqrt(tr ? r.var_smooth_train : r.var_smooth_eval);
    out << r.cycle << '\t' << format_real(m) << '\t' << format_real(m - sd) << '\t' << format_real(m + sd) << '\n';
  }
}

std::vector<RunRecord> run_all(const std::vector<RunConfig>& configs, int workers, std::vector<std::string>* errors,
                               const RunHooks& hooks) {
  std::vector<RunRecord> out(configs.size());
  std::vector<std::string> errs(configs.size());
  std::atomic<std::size_t> next{0};
  std::mutex hook_mutex;
  RunHooks guarded = hooks;
  if (hooks.on_cycle) {
    guarded.on_cycle = [&](const RunConfig& c, const CycleRecord& r) {
      std::lock_guard<std::mutex> lock(hook_mutex);
      hooks.on_cycle(c, r);
    };
  }
  auto work = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      try {
        out[i] = run_online_learning(configs[i], guarded);
      } catch (const std::exception& e) {
        out[i] = RunRecord{};
        out[i].config = configs[i];
        errs[i] = configs[i].run_key() + ": " + e.what();
      }
    }
  };
  const int n = std::clamp(workers, 1, static_cast<int>(std::max<std::size_t>(configs.size(), 1)));
  std::vector<std::thread> threads;
  for (int t = 1; t < n; ++t) threads.emplace_back(work);
  work();
  for (auto& t : threads) t.join();
  if (errors) {
    errors->clear();
    for (auto& e : errs) {
      if (!e.empty()) errors->push_back(std::move(e));
    }
  }
  return out;
}

}  // namespace bpl
