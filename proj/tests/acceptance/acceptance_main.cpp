// Acceptance suite: one PASS/FAIL line per criterion.
//
// Long runs are cached under --runs-dir in the layout `bpl run` writes
// (<run_key>.jsonl, <run_key>.ckpt.json, <run_key>.timing.json). A cached
// record is reused only when its config echo equals the requested config
// byte for byte; criterion 9 re-executes a prefix of a cached run to confirm
// the cache was produced by this build.

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "bpl/config.hpp"
#include "bpl/harness.hpp"
#include "bpl/testkit/properties.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace bpl;

namespace {

// Pinned thresholds.
constexpr int kConvergenceCycles = 60;
constexpr double kConvergedReward = 0.9;
constexpr int kConvergenceSeeds = 8;
constexpr int kConvergedSeedsRequired = 6;
constexpr double kSeedBudgetSeconds = 15 * 60;
constexpr int kSeparationSeeds = 3;
constexpr int kGeneralizationTasks = 10;
constexpr int kGeneralizationRequired = 9;
constexpr std::uint64_t kGeneralizationSeed = 1000;
constexpr int kMaxDoorsOpenedWithoutPlanner = 1;
constexpr int kPrefixCycles = 3;

struct Verdict {
  bool passed = false;
  std::string detail;
};

struct Cache {
  fs::path dir;
  int workers = 1;
  bool quiet = false;

  fs::path path(const RunConfig& c, const std::string& ext) const { return dir / (c.run_key() + ext); }

  std::optional<RunRecord> load(const RunConfig& c) const {
    std::ifstream in(path(c, ".jsonl"), std::ios::binary);
    if (!in) return std::nullopt;
    RunRecord rec;
    try {
      rec = read_run_record(in);
    } catch (const Error&) {
      return std::nullopt;
    }
    if (rec.config_echo != config_echo(c) || static_cast<int>(rec.cycles.size()) != c.cycles) return std::nullopt;
    std::ifstream ck(path(c, ".ckpt.json"), std::ios::binary);
    if (ck) {
      std::stringstream ss;
      ss << ck.rdbuf();
      rec.final_learner_checkpoint = ss.str();
    }
    std::ifstream tm(path(c, ".timing.json"));
    if (tm) {
      try {
        rec.wall_clock_seconds = nlohmann::json::parse(tm).at("wall_clock_seconds").get<double>();
      } catch (const std::exception&) {
        rec.wall_clock_seconds = 0.0;
      }
    }
    return rec;
  }

  void store(const RunRecord& rec) const {
    fs::create_directories(dir);
    {
      std::ofstream out(path(rec.config, ".jsonl"), std::ios::binary);
      write_run_record(out, rec);
    }
    if (!rec.final_learner_checkpoint.empty()) {
      std::ofstream out(path(rec.config, ".ckpt.json"), std::ios::binary);
      out << rec.final_learner_checkpoint;
    }
    std::ofstream t(path(rec.config, ".timing.json"));
    t << nlohmann::json{{"run_key", rec.config.run_key()}, {"wall_clock_seconds", rec.wall_clock_seconds}}.dump()
      << "\n";
  }

  std::vector<RunRecord> get(const std::vector<RunConfig>& configs) const {
    std::vector<RunRecord> out(configs.size());
    std::vector<RunConfig> missing;
    std::vector<std::size_t> slots;
    for (std::size_t i = 0; i < configs.size(); ++i) {
      if (auto rec = load(configs[i])) {
        out[i] = std::move(*rec);
      } else {
        missing.push_back(configs[i]);
        slots.push_back(i);
      }
    }
    if (missing.empty()) return out;
    RunHooks hooks;
    if (!quiet) {
      hooks.on_cycle = [](const RunConfig& c, const CycleRecord& r) {
        if (r.cycle % 10 == 9) std::cerr << "  " << c.run_key() << " cycle " << r.cycle + 1 << "\n";
      };
    }
    std::vector<std::string> errors;
    auto fresh = run_all(missing, workers, &errors, hooks);
    for (const auto& e : errors) throw Error("run failed: " + e);
    for (std::size_t k = 0; k < fresh.size(); ++k) {
      store(fresh[k]);
      out[slots[k]] = std::move(fresh[k]);
    }
    return out;
  }
};

RunConfig make_config(const std::string& env, ApproachKind approach, std::uint64_t seed, int cycles) {
  RunConfig c = RunConfig::defaults_for(env);
  c.approach = approach;
  c.seed = seed;
  c.cycles = cycles;
  return c;
}

std::vector<RunConfig> seeds_of(const std::string& env, ApproachKind approach, int seeds, int cycles) {
  std::vector<RunConfig> out;
  for (int s = 0; s < seeds; ++s) out.push_back(make_config(env, approach, static_cast<std::uint64_t>(s), cycles));
  return out;
}

double final_smooth_eval(const RunRecord& r) { return r.cycles.back().smooth_eval; }

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string fmt(double x) {
  std::ostringstream s;
  s << x;
  return s.str();
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (double x : v) out += (out.empty() ? "" : ",") + fmt(x);
  return out;
}

int doors_in(const Task& t) { return static_cast<int>(t.initial_state.objects_of_type("door").size()); }

Verdict convergence(const Cache& cache) {
  const auto runs = cache.get(seeds_of("light_switch_door", ApproachKind::kOurs, kConvergenceSeeds, kConvergenceCycles));
  int converged = 0;
  std::vector<double> first;
  double slowest = 0.0;
  bool timed = true;
  for (const auto& r : runs) {
    int at = -1;
    for (const auto& c : r.cycles) {
      if (c.smooth_eval >= kConvergedReward) {
        at = c.cycle;
        break;
      }
    }
    converged += at >= 0;
    first.push_back(at);
    if (r.wall_clock_seconds <= 0.0) timed = false;
    slowest = std::max(slowest, r.wall_clock_seconds);
  }
  const bool runtime_ok = !timed || slowest <= kSeedBudgetSeconds;
  std::string detail = std::to_string(converged) + "/" + std::to_string(runs.size()) +
                       " seeds reach smooth eval >= 0.9 within 60 cycles (first cycle per seed: " + join(first) +
                       "; -1 = never)";
  detail += timed ? "; slowest seed " + fmt(std::round(slowest)) + " s" : "; runtime not recorded";
  return {converged >= kConvergedSeedsRequired && runtime_ok, detail};
}

Verdict baseline_separation(const Cache& cache) {
  std::string detail;
  bool ok = true;
  const auto pure = cache.get(seeds_of("light_switch_door", ApproachKind::kPurePlanning, kConvergenceSeeds,
                                       kConvergenceCycles));
  int doored = 0;
  int solved = 0;
  for (const auto& r : pure) {
    const auto tasks = eval_tasks(light_switch_door(), r.config);
    for (const auto& cycle : r.eval_episodes) {
      for (std::size_t i = 0; i < cycle.size(); ++i) {
        if (doors_in(tasks[i]) == 0) continue;
        ++doored;
        solved += cycle[i].success;
      }
    }
    for (const auto& c : r.cycles) ok = ok && c.eval_reward == 0.0;
  }
  ok = ok && doored > 0 && solved == 0;
  detail = "pure_planning solved " + std::to_string(solved) + "/" + std::to_string(doored) + " doored eval episodes";
  for (const std::string env : {"light_switch_door", "doorknobs", "coffee"}) {
    const bool lsd = env == "light_switch_door";
    const int seeds = lsd ? kConvergenceSeeds : kSeparationSeeds;
    const int cycles = lsd ? kConvergenceCycles : RunConfig::defaults_for(env).cycles;
    std::vector<double> ours, random;
    for (const auto& r : cache.get(seeds_of(env, ApproachKind::kOurs, seeds, cycles))) ours.push_back(final_smooth_eval(r));
    for (const auto& r : cache.get(seeds_of(env, ApproachKind::kRandomBridge, seeds, cycles))) {
      random.push_back(final_smooth_eval(r));
    }
    const double mo = median(ours);
    const double mr = median(random);
    ok = ok && mo > mr;
    detail += "; " + env + " median ours " + fmt(mo) + " vs random_bridge " + fmt(mr);
  }
  return {ok, detail};
}

// Door counts are taken from the final ablated policy: its last in-run
// evaluation plus the fresh generalization tasks. Earlier cycles are
// reported but not gated, since an untrained greedy net can act arbitrarily.
Verdict ablation_separation(const Cache& cache) {
  const auto ours = cache.get(seeds_of("light_switch_door", ApproachKind::kOurs, kSeparationSeeds, kConvergenceCycles));
  const auto ablated =
      cache.get(seeds_of("light_switch_door", ApproachKind::kOursNoCallPlanner, kSeparationSeeds, kConvergenceCycles));
  std::vector<double> o, a;
  for (const auto& r : ours) o.push_back(final_smooth_eval(r));
  for (const auto& r : ablated) a.push_back(final_smooth_eval(r));
  const EnvSpec& env = light_switch_door();
  const auto fresh = sample_tasks(env, {Split::kEval, kGeneralizationSeed, env.eval_ranges, kGeneralizationSeed},
                                  kGeneralizationTasks);
  int most_opened = 0;
  int episodes = 0;
  int multi = 0;
  int all_episodes = 0;
  int all_multi = 0;
  auto count = [&](const std::vector<Task>& tasks, const std::vector<EpisodeRecord>& eps, int& n, int& over) {
    for (std::size_t i = 0; i < eps.size(); ++i) {
      if (doors_in(tasks[i]) < 2) continue;
      const int opened = eps[i].novelties_final - eps[i].novelties_initial;
      over += opened > kMaxDoorsOpenedWithoutPlanner;
      ++n;
    }
  };
  bool checkpoints = true;
  for (const auto& r : ablated) {
    const auto tasks = eval_tasks(env, r.config);
    for (const auto& cycle : r.eval_episodes) count(tasks, cycle, all_episodes, all_multi);
    std::vector<EpisodeRecord> final_eps;
    if (!r.eval_episodes.empty()) final_eps = r.eval_episodes.back();
    std::vector<Task> final_tasks = tasks;
    if (r.final_learner_checkpoint.empty()) {
      checkpoints = false;
    } else {
      PolicyStack stack = build_approach(ApproachKind::kOursNoCallPlanner, env, r.config);
      stack.learner->load_checkpoint(r.final_learner_checkpoint);
      for (auto& e : evaluate(env, stack, fresh, kGeneralizationSeed, 0)) final_eps.push_back(std::move(e));
      final_tasks.insert(final_tasks.end(), fresh.begin(), fresh.end());
    }
    count(final_tasks, final_eps, episodes, multi);
    for (std::size_t i = 0; i < final_eps.size(); ++i) {
      if (doors_in(final_tasks[i]) >= 2) {
        most_opened = std::max(most_opened, final_eps[i].novelties_final - final_eps[i].novelties_initial);
      }
    }
  }
  const bool ok = median(a) < median(o) && checkpoints && most_opened <= kMaxDoorsOpenedWithoutPlanner && episodes > 0;
  return {ok, "median final smooth eval ours_no_callplanner " + fmt(median(a)) + " vs ours " + fmt(median(o)) +
                  "; final ablated policy opened at most " + std::to_string(most_opened) + " door(s) per episode (" +
                  std::to_string(multi) + "/" + std::to_string(episodes) +
                  " episodes opened more than one; last cycle plus fresh tasks); over all cycles " +
                  std::to_string(all_multi) + "/" + std::to_string(all_episodes) +
                  (checkpoints ? "" : "; missing ablation checkpoint")};
}

Verdict generalization(const Cache& cache) {
  const auto runs = cache.get(seeds_of("light_switch_door", ApproachKind::kOurs, kConvergenceSeeds, kConvergenceCycles));
  const RunRecord* best = nullptr;
  for (const auto& r : runs) {
    if (!best || final_smooth_eval(r) > final_smooth_eval(*best)) best = &r;
  }
  if (!best || best->final_learner_checkpoint.empty()) return {false, "no learner checkpoint available"};
  const EnvSpec& env = light_switch_door();
  PolicyStack stack = build_approach(ApproachKind::kOurs, env, best->config);
  stack.learner->load_checkpoint(best->final_learner_checkpoint);
  const auto train = train_tasks(env, best->config);
  const auto tasks = sample_tasks(env, {Split::kEval, kGeneralizationSeed, env.eval_ranges, kGeneralizationSeed},
                                  kGeneralizationTasks);
  const auto episodes = evaluate(env, stack, tasks, kGeneralizationSeed, 0);
  int solved = 0;
  int under_alternating = 0;
  std::string doors;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    doors += (doors.empty() ? "" : ",") + std::to_string(doors_in(tasks[i]));
    if (!episodes[i].success) continue;
    ++solved;
    under_alternating += episodes[i].alternations < doors_in(tasks[i]);
  }
  const bool ok = train.size() == 1 && doors_in(train.front()) == 1 && solved >= kGeneralizationRequired &&
                  under_alternating == 0;
  return {ok, "policy of " + best->config.run_key() + " (trained on one 1-door task) solved " +
                  std::to_string(solved) + "/" + std::to_string(tasks.size()) + " fresh eval tasks with doors {" +
                  doors + "}; successes with fewer alternations than doors: " + std::to_string(under_alternating)};
}

Verdict from_checks(const std::vector<testkit::CheckResult>& checks) {
  Verdict v{true, ""};
  for (const auto& c : checks) {
    v.passed = v.passed && c.passed;
    v.detail += (v.detail.empty() ? "" : "; ") + c.name + (c.passed ? "" : " FAILED") + ": " + c.detail;
  }
  return v;
}

std::vector<std::string> cycle_lines(const RunRecord& rec, int count) {
  std::ostringstream out;
  write_run_record(out, rec);
  std::istringstream in(out.str());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line) && static_cast<int>(lines.size()) < count) {
    if (line.find("\"type\":\"cycle\"") != std::string::npos) lines.push_back(line);
  }
  return lines;
}

Verdict determinism(const Cache& cache) {
  std::vector<RunConfig> configs;
  for (const std::string env : {"light_switch_door", "doorknobs", "coffee"}) {
    for (ApproachKind a : all_approaches()) {
      RunConfig c = make_config(env, a, 7, 3);
      c.n_eval_tasks = std::min(c.n_eval_tasks, 3);
      c.learner.train_iters = 50;
      configs.push_back(c);
    }
  }
  auto render = [&](const std::vector<RunRecord>& recs) {
    std::string jsonl;
    for (const auto& r : recs) {
      std::ostringstream o;
      write_run_record(o, r);
      jsonl += o.str();
    }
    std::vector<AggregateRow> rows;
    for (const auto& r : recs) {
      auto a = aggregate_seeds({r});
      rows.insert(rows.end(), a.begin(), a.end());
    }
    std::ostringstream csv;
    write_aggregate_csv(csv, rows);
    return std::pair{jsonl, csv.str()};
  };
  const auto first = render(run_all(configs, 1));
  const auto second = render(run_all(configs, 1));
  const bool fresh_ok = first == second;

  // A prefix of a long cached run must reproduce exactly.
  const RunConfig full = make_config("light_switch_door", ApproachKind::kOurs, 0, kConvergenceCycles);
  const RunRecord cached = cache.get({full}).front();
  RunConfig prefix = full;
  prefix.cycles = kPrefixCycles;
  const RunRecord rerun = run_online_learning(prefix);
  const bool prefix_ok = cycle_lines(cached, kPrefixCycles) == cycle_lines(rerun, kPrefixCycles) &&
                         static_cast<int>(cycle_lines(rerun, kPrefixCycles).size()) == kPrefixCycles;
  return {fresh_ok && prefix_ok, std::to_string(configs.size()) + " short runs " +
                                     (fresh_ok ? "byte-identical" : "DIFFER") + " across repeats (" +
                                     std::to_string(first.first.size()) + " bytes JSONL, aggregate CSV " +
                                     (first.second == second.second ? "identical" : "differs") + "); first " +
                                     std::to_string(kPrefixCycles) + " cycles of " + full.run_key() +
                                     (prefix_ok ? " reproduce the cached record" : " DIFFER from the cached record")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria for bridge policy learning"};
  Cache cache;
  std::string dir = "acceptance_runs";
  std::vector<int> only;
  app.add_option("--runs-dir", dir, "cache of run records");
  app.add_option("--criteria", only, "subset of criteria to check")->delimiter(',');
  app.add_option("-j,--workers", cache.workers, "concurrent runs")->check(CLI::PositiveNumber);
  app.add_flag("-q,--quiet", cache.quiet, "no progress output");
  CLI11_PARSE(app, argc, argv);
  cache.dir = dir;

  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"convergence", [&] { return convergence(cache); }},
      {"baseline separation", [&] { return baseline_separation(cache); }},
      {"ablation separation", [&] { return ablation_separation(cache); }},
      {"generalization", [&] { return generalization(cache); }},
      {"planner optimality", [] { return from_checks({testkit::planner_optimality(100, 11)}); }},
      {"heuristic ordering", [] { return from_checks({testkit::heuristic_ordering(100, 11)}); }},
      {"stuck detection", [] { return from_checks({testkit::stuck_detection(100, 13)}); }},
      {"numeric correctness",
       [] {
         return from_checks({testkit::gradient_check(20, 19, 1e-4), testkit::sanity_mdp_q(1e-2),
                             testkit::epsilon_closed_form(), testkit::polyak_adam_fixtures(1e-12)});
       }},
      {"determinism", [&] { return determinism(cache); }},
  };

  const std::set<int> wanted(only.begin(), only.end());
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!wanted.empty() && !wanted.contains(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !v.passed;
    std::cout << (v.passed ? "PASS" : "FAIL") << " criterion " << id << " (" << criteria[i].first
              << "): " << v.detail << " [" << fmt(std::round(secs * 10) / 10) << " s]" << std::endl;
  }
  std::cout << (failed ? "acceptance failed: " : "acceptance passed: ") << failed << " failing criteria" << std::endl;
  return failed ? 1 : 0;
}
