// bpl: run, evaluate, aggregate and reproduce bridge policy learning experiments.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "bpl/config.hpp"
#include "bpl/harness.hpp"
#include "bpl/testkit/selftest.hpp"

namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kConfigError = 1, kRunFailure = 2, kSelftestFailure = 3 };

std::string default_output_dir() {
  const char* env = std::getenv("BPL_OUTPUT_DIR");
  return env && *env ? env : "bpl_out";
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw bpl::Error("cannot write " + path.string());
  out << text;
}

void write_run_files(const fs::path& dir, const bpl::RunRecord& rec) {
  const std::string key = rec.config.run_key();
  {
    std::ofstream out(dir / (key + ".jsonl"), std::ios::binary);
    bpl::write_run_record(out, rec);
  }
  if (!rec.final_learner_checkpoint.empty()) write_text(dir / rec.checkpoint, rec.final_learner_checkpoint);
  std::ostringstream t;
  t << "{\"run_key\":\"" << key << "\",\"wall_clock_seconds\":" << rec.wall_clock_seconds << "}\n";
  write_text(dir / (key + ".timing.json"), t.str());
}

// Groups records by (env, approach) in first-appearance order.
std::vector<std::vector<bpl::RunRecord>> group_runs(const std::vector<bpl::RunRecord>& records) {
  std::vector<std::vector<bpl::RunRecord>> groups;
  std::map<std::string, std::size_t> index;
  for (const auto& r : records) {
    if (r.cycles.empty()) continue;
    const std::string k = r.config.env + "/" + std::string(bpl::to_string(r.config.approach));
    auto [it, fresh] = index.emplace(k, groups.size());
    if (fresh) groups.emplace_back();
    groups[it->second].push_back(r);
  }
  for (auto& g : groups) {
    std::sort(g.begin(), g.end(), [](const auto& a, const auto& b) { return a.config.seed < b.config.seed; });
  }
  return groups;
}

std::vector<bpl::AggregateRow> aggregate_all(const std::vector<bpl::RunRecord>& records) {
  std::vector<bpl::AggregateRow> rows;
  for (const auto& g : group_runs(records)) {
    auto r = bpl::aggregate_seeds(g);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  return rows;
}

bpl::RunHooks progress_hooks(bool quiet) {
  bpl::RunHooks hooks;
  if (!quiet) {
    hooks.on_cycle = [](const bpl::RunConfig& c, const bpl::CycleRecord& r) {
      std::cerr << c.run_key() << " cycle " << r.cycle << " train " << r.train_reward << " eval " << r.eval_reward
                << " smooth_eval " << r.smooth_eval << " eps " << r.epsilon << "\n";
    };
  }
  return hooks;
}

int finish_runs(const fs::path& dir, const std::vector<bpl::RunRecord>& records,
                const std::vector<std::string>& errors) {
  for (const auto& r : records) {
    if (!r.cycles.empty()) write_run_files(dir, r);
  }
  {
    std::ofstream out(dir / "aggregate.csv", std::ios::binary);
    bpl::write_aggregate_csv(out, aggregate_all(records));
  }
  for (const auto& e : errors) std::cerr << "run failed: " << e << "\n";
  return errors.empty() ? kOk : kRunFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bridge policy learning experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir = default_output_dir();
  int workers = 1;
  bool quiet = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "key = value config file");
    sub->add_option("-s,--set", overrides, "override as key=value (repeatable)");
    sub->add_option("-o,--out", out_dir, "output directory (default $BPL_OUTPUT_DIR or bpl_out)");
  };

  auto* run = app.add_subcommand("run", "run the configured matrix of experiments");
  add_common(run);
  run->add_option("-j,--workers", workers, "concurrent runs")->check(CLI::PositiveNumber);
  run->add_flag("-q,--quiet", quiet, "no per-cycle progress");

  std::string checkpoint;
  auto* eval = app.add_subcommand("eval", "evaluate a learner checkpoint greedily on the eval tasks of a config");
  add_common(eval);
  eval->add_option("--checkpoint", checkpoint, "learner checkpoint file")->required();

  std::vector<std::string> inputs;
  auto* agg = app.add_subcommand("aggregate", "aggregate run records into a CSV");
  agg->add_option("inputs", inputs, "run record .jsonl files or directories")->required();
  std::string agg_out;
  agg->add_option("-o,--out", agg_out, "CSV path (default stdout)");

  int seeds = 8;
  auto* rep = app.add_subcommand("reproduce", "run the full env x approach x seed matrix and write figure data");
  add_common(rep);
  rep->add_option("--seeds", seeds, "seeds per approach")->check(CLI::PositiveNumber);
  rep->add_option("-j,--workers", workers, "concurrent runs")->check(CLI::PositiveNumber);
  rep->add_flag("-q,--quiet", quiet, "no per-cycle progress");

  auto* self = app.add_subcommand("selftest", "run the property suites of every module");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*self) {
      return bpl::testkit::run_selftest(std::cout) ? kOk : kSelftestFailure;
    }

    if (*agg) {
      std::vector<bpl::RunRecord> records;
      for (const auto& in : inputs) {
        std::vector<fs::path> files;
        if (fs::is_directory(in)) {
          for (const auto& e : fs::directory_iterator(in)) {
            if (e.path().extension() == ".jsonl") files.push_back(e.path());
          }
          std::sort(files.begin(), files.end());
        } else {
          files.emplace_back(in);
        }
        for (const auto& f : files) {
          std::ifstream is(f, std::ios::binary);
          if (!is) throw bpl::Error("cannot read " + f.string());
          records.push_back(bpl::read_run_record(is));
        }
      }
      const auto rows = aggregate_all(records);
      if (agg_out.empty()) {
        bpl::write_aggregate_csv(std::cout, rows);
      } else {
        std::ofstream out(agg_out, std::ios::binary);
        bpl::write_aggregate_csv(out, rows);
      }
      return kOk;
    }

    std::vector<bpl::RunConfig> configs;
    try {
      if (*rep) {
        bpl::ConfigValues values = config_path.empty() ? bpl::ConfigValues{} : bpl::parse_config_file(config_path);
        values["env"] = "all";
        values["approach"] = "all";
        values["seeds"] = std::to_string(seeds);
        bpl::apply_overrides(values, overrides);
        for (auto& c : bpl::expand_configs(values)) {
          if (c.env == "doorknobs" && c.approach == bpl::ApproachKind::kOursNoFeatureSelection) continue;
          configs.push_back(std::move(c));
        }
      } else {
        configs = bpl::parse_config(config_path, overrides);
      }
    } catch (const bpl::Error& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return kConfigError;
    }

    fs::create_directories(out_dir);

    if (*eval) {
      std::ifstream is(checkpoint, std::ios::binary);
      if (!is) throw bpl::Error("cannot read checkpoint " + checkpoint);
      std::stringstream text;
      text << is.rdbuf();
      int status = kOk;
      for (const auto& c : configs) {
        const bpl::EnvSpec& env = bpl::env_by_name(c.env);
        auto stack = bpl::build_approach(c.approach, env, c);
        if (!stack.learner) throw bpl::Error(std::string(bpl::to_string(c.approach)) + " has no learner to load");
        stack.learner->load_checkpoint(text.str());
        const auto tasks = bpl::eval_tasks(env, c);
        const auto eps = bpl::evaluate(env, stack, tasks, c.seed, 0);
        double success = 0.0;
        std::ofstream out(fs::path(out_dir) / (c.run_key() + ".eval.jsonl"), std::ios::binary);
        for (const auto& e : eps) {
          out << bpl::episode_json(e) << "\n";
          success += e.reward;
        }
        std::cout << c.run_key() << " eval_reward " << success / static_cast<double>(eps.size()) << "\n";
      }
      return status;
    }

    std::vector<std::string> errors;
    const auto records = bpl::run_all(configs, workers, &errors, progress_hooks(quiet));
    const int status = finish_runs(out_dir, records, errors);
    if (*rep) {
      const auto rows = aggregate_all(records);
      for (const auto& env : bpl::env_names()) {
        std::vector<bpl::AggregateRow> env_rows;
        for (const auto& r : rows) {
          if (r.env == env) env_rows.push_back(r);
        }
        for (auto split : {bpl::Split::kTrain, bpl::Split::kEval}) {
          const std::string stem = env + "_" + std::string(bpl::to_string(split));
          std::ofstream csv(fs::path(out_dir) / (stem + ".csv"), std::ios::binary);
          bpl::write_panel_csv(csv, env_rows, split);
          for (auto a : bpl::all_approaches()) {
            std::vector<bpl::AggregateRow> curve;
            for (const auto& r : env_rows) {
              if (r.approach == bpl::to_string(a)) curve.push_back(r);
            }
            if (curve.empty()) continue;
            std::ofstream tsv(fs::path(out_dir) / (stem + "_" + std::string(bpl::to_string(a)) + ".tsv"),
                              std::ios::binary);
            bpl::write_plot_tsv(tsv, curve, split);
          }
        }
      }
    }
    return status;
  } catch (const bpl::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRunFailure;
  }
}
