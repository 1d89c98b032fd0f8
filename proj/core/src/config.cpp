#include "bpl/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

namespace bpl {

namespace {

using Getter = std::function<std::string(const RunConfig&)>;
using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value)>;

struct Field {
  ConfigKey key;
  Getter get;
  Setter set;
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

long long parse_int(const std::string& key, const std::string& v) {
  long long out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  }
  return out;
}

double parse_real(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double out = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size()) throw ConfigError(key + ": expected a real number, got '" + v + "'");
  return out;
}

std::string fmt_real(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

template <typename T>
Field int_field(std::string name, std::string description, T RunConfig::*member) {
  return {{name, "int", std::move(description)},
          [member](const RunConfig& c) { return std::to_string(c.*member); },
          [member](RunConfig& c, const std::string& k, const std::string& v) {
            c.*member = static_cast<T>(parse_int(k, v));
          }};
}

Field learner_int(std::string name, std::string description, int LearnerConfig::*member) {
  return {{name, "int", std::move(description)},
          [member](const RunConfig& c) { return std::to_string(c.learner.*member); },
          [member](RunConfig& c, const std::string& k, const std::string& v) {
            c.learner.*member = static_cast<int>(parse_int(k, v));
          }};
}

Field real_field(std::string name, std::string description, std::function<double&(RunConfig&)> ref) {
  return {{name, "real", std::move(description)},
          [ref](const RunConfig& c) { return fmt_real(ref(const_cast<RunConfig&>(c))); },
          [ref](RunConfig& c, const std::string& k, const std::string& v) { ref(c) = parse_real(k, v); }};
}

Field range_field(std::string name, std::string description, bool train, int StructuralRanges::*member) {
  auto pick = [train](RunConfig& c) -> StructuralRanges& { return train ? c.train_ranges : c.eval_ranges; };
  return {{name, "int", std::move(description)},
          [pick, member](const RunConfig& c) { return std::to_string(pick(const_cast<RunConfig&>(c)).*member); },
          [pick, member](RunConfig& c, const std::string& k, const std::string& v) {
            pick(c).*member = static_cast<int>(parse_int(k, v));
          }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> f = [] {
    std::vector<Field> v;
    v.push_back({{"env", "string", "environment name"},
                 [](const RunConfig& c) { return c.env; },
                 [](RunConfig& c, const std::string&, const std::string& s) { c.env = s; }});
    v.push_back({{"approach", "string", "approach name"},
                 [](const RunConfig& c) { return std::string(to_string(c.approach)); },
                 [](RunConfig& c, const std::string& k, const std::string& s) {
                   try {
                     c.approach = approach_from_string(s);
                   } catch (const Error& e) {
                     throw ConfigError(k + ": " + e.what());
                   }
                 }});
    v.push_back({{"seed", "int", "run seed (base seed of a matrix)"},
                 [](const RunConfig& c) { return std::to_string(c.seed); },
                 [](RunConfig& c, const std::string& k, const std::string& s) {
                   const long long x = parse_int(k, s);
                   if (x < 0) throw ConfigError(k + ": must be >= 0");
                   c.seed = static_cast<std::uint64_t>(x);
                 }});
    v.push_back(int_field("cycles", "online learning cycles", &RunConfig::cycles));
    v.push_back(int_field("protocol.trajectories_per_cycle", "training trajectories per cycle",
                          &RunConfig::trajectories_per_cycle));
    v.push_back(int_field("protocol.steps_per_trajectory", "bridge actions per training trajectory",
                          &RunConfig::steps_per_trajectory));
    v.push_back(int_field("protocol.n_train_tasks", "training tasks", &RunConfig::n_train_tasks));
    v.push_back(int_field("protocol.n_eval_tasks", "evaluation tasks", &RunConfig::n_eval_tasks));
    v.push_back(int_field("protocol.smooth_window", "smoothing window in cycles", &RunConfig::smooth_window));
    for (bool train : {true, false}) {
      const std::string p = train ? "tasks.train." : "tasks.eval.";
      v.push_back(range_field(p + "size_min", "minimum cells or rooms", train, &StructuralRanges::size_min));
      v.push_back(range_field(p + "size_max", "maximum cells or rooms", train, &StructuralRanges::size_max));
      v.push_back(range_field(p + "novelty_min", "minimum doors", train, &StructuralRanges::novelty_min));
      v.push_back(range_field(p + "novelty_max", "maximum doors", train, &StructuralRanges::novelty_max));
    }
    v.push_back({{"bridge.frame", "string", "absolute or robot_relative position features"},
                 [](const RunConfig& c) { return std::string(to_string(c.frame)); },
                 [](RunConfig& c, const std::string& k, const std::string& s) {
                   try {
                     c.frame = frame_from_string(s);
                   } catch (const Error& e) {
                     throw ConfigError(k + ": " + e.what());
                   }
                 }});
    v.push_back(learner_int("bridge.n_sample", "parameter draws per skill", &LearnerConfig::n_sample));
    v.push_back(real_field("learner.gamma", "discount", [](RunConfig& c) -> double& { return c.learner.gamma; }));
    v.push_back(real_field("learner.lr", "Adam learning rate",
                           [](RunConfig& c) -> double& { return c.learner.adam.lr; }));
    v.push_back(real_field("learner.beta1", "Adam beta1",
                           [](RunConfig& c) -> double& { return c.learner.adam.beta1; }));
    v.push_back(real_field("learner.beta2", "Adam beta2",
                           [](RunConfig& c) -> double& { return c.learner.adam.beta2; }));
    v.push_back(real_field("learner.adam_eps", "Adam epsilon",
                           [](RunConfig& c) -> double& { return c.learner.adam.eps; }));
    v.push_back(real_field("learner.weight_decay", "L2 weight decay",
                           [](RunConfig& c) -> double& { return c.learner.adam.weight_decay; }));
    v.push_back(learner_int("learner.batch_size", "minibatch size", &LearnerConfig::batch_size));
    v.push_back(learner_int("learner.train_iters", "gradient steps per cycle", &LearnerConfig::train_iters));
    v.push_back({{"learner.replay_capacity", "int", "replay buffer capacity"},
                 [](const RunConfig& c) { return std::to_string(c.learner.replay_capacity); },
                 [](RunConfig& c, const std::string& k, const std::string& s) {
                   const long long x = parse_int(k, s);
                   if (x < 1) throw ConfigError(k + ": must be >= 1");
                   c.learner.replay_capacity = static_cast<std::size_t>(x);
                 }});
    v.push_back(real_field("learner.polyak", "target network averaging rate",
                           [](RunConfig& c) -> double& { return c.learner.tau; }));
    v.push_back({{"learner.hidden", "list", "hidden layer widths"},
                 [](const RunConfig& c) {
                   std::string s;
                   for (std::size_t i = 0; i < c.learner.hidden.size(); ++i) {
                     if (i) s += ",";
                     s += std::to_string(c.learner.hidden[i]);
                   }
                   return s;
                 },
                 [](RunConfig& c, const std::string& k, const std::string& s) {
                   c.learner.hidden.clear();
                   for (const auto& item : split_list(s)) {
                     const long long x = parse_int(k, item);
                     if (x < 1) throw ConfigError(k + ": widths must be >= 1");
                     c.learner.hidden.push_back(static_cast<std::size_t>(x));
                   }
                 }});
    v.push_back(real_field("learner.epsilon_start", "initial exploration rate",
                           [](RunConfig& c) -> double& { return c.learner.epsilon.start; }));
    v.push_back(real_field("learner.epsilon_decay", "exploration decrement per bridge action",
                           [](RunConfig& c) -> double& { return c.learner.epsilon.decay; }));
    v.push_back(real_field("learner.epsilon_floor", "minimum exploration rate",
                           [](RunConfig& c) -> double& { return c.learner.epsilon.floor; }));
    return v;
  }();
  return f;
}

const std::string kSeedsKey = "seeds";

std::string resolve_key(const std::string& raw) {
  if (raw == kSeedsKey) return raw;
  std::vector<std::string> matches;
  for (const auto& f : fields()) {
    const auto& n = f.key.name;
    if (n == raw) return n;
    if (n.size() > raw.size() && n.ends_with(raw) && n[n.size() - raw.size() - 1] == '.') matches.push_back(n);
  }
  if (matches.size() == 1) return matches.front();
  if (matches.empty()) throw ConfigError("unknown config key '" + raw + "'");
  std::string list;
  for (const auto& m : matches) list += (list.empty() ? "" : ", ") + m;
  throw ConfigError("ambiguous config key '" + raw + "' (" + list + ")");
}

void assign(ConfigValues& values, const std::string& raw_key, const std::string& value, const std::string& where) {
  const std::string key = trim(raw_key);
  if (key.empty()) throw ConfigError(where + ": missing key");
  try {
    values[resolve_key(key)] = trim(value);
  } catch (const ConfigError& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

}  // namespace

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> k;
    for (const auto& f : fields()) k.push_back(f.key);
    k.push_back({kSeedsKey, "int", "number of consecutive seeds starting at `seed`"});
    return k;
  }();
  return keys;
}

ConfigValues parse_config_text(std::string_view text) {
  ConfigValues values;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    const std::string where = "line " + std::to_string(lineno);
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    assign(values, line.substr(0, eq), line.substr(eq + 1), where);
  }
  return values;
}

ConfigValues parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config_text(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void apply_overrides(ConfigValues& values, const std::vector<std::string>& overrides) {
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + o + "': expected key=value");
    assign(values, o.substr(0, eq), o.substr(eq + 1), "override '" + o + "'");
  }
}

std::vector<RunConfig> expand_configs(const ConfigValues& values) {
  auto get = [&](const std::string& k, const std::string& fallback) {
    auto it = values.find(k);
    return it == values.end() ? fallback : it->second;
  };
  std::vector<std::string> envs = split_list(get("env", "light_switch_door"));
  if (envs.size() == 1 && envs.front() == "all") envs = env_names();
  std::vector<std::string> approaches = split_list(get("approach", "ours"));
  if (approaches.size() == 1 && approaches.front() == "all") {
    approaches.clear();
    for (auto a : all_approaches()) approaches.emplace_back(to_string(a));
  }
  const long long seeds = parse_int(kSeedsKey, get(kSeedsKey, "1"));
  if (seeds < 1) throw ConfigError("seeds: must be >= 1");
  if (envs.empty()) throw ConfigError("env: no environment given");
  if (approaches.empty()) throw ConfigError("approach: no approach given");

  std::vector<RunConfig> out;
  for (const auto& env : envs) {
    RunConfig base;
    try {
      base = RunConfig::defaults_for(env);
    } catch (const Error& e) {
      throw ConfigError(std::string("env: ") + e.what());
    }
    for (const auto& f : fields()) {
      if (f.key.name == "env" || f.key.name == "approach") continue;
      auto it = values.find(f.key.name);
      if (it != values.end()) f.set(base, f.key.name, it->second);
    }
    for (const auto& a : approaches) {
      RunConfig c = base;
      fields()[1].set(c, "approach", a);
      for (long long s = 0; s < seeds; ++s) {
        RunConfig r = c;
        r.seed = base.seed + static_cast<std::uint64_t>(s);
        try {
          r.validate();
        } catch (const ConfigError&) {
          throw;
        } catch (const Error& e) {
          throw ConfigError(e.what());
        }
        out.push_back(r);
      }
    }
  }
  return out;
}

std::vector<RunConfig> parse_config(const std::string& path, const std::vector<std::string>& overrides) {
  ConfigValues values = path.empty() ? ConfigValues{} : parse_config_file(path);
  apply_overrides(values, overrides);
  return expand_configs(values);
}

std::string config_echo(const RunConfig& config) {
  std::string out;
  for (const auto& f : fields()) out += f.key.name + " = " + f.get(config) + "\n";
  return out;
}

RunConfig config_from_echo(std::string_view echo) {
  auto configs = expand_configs(parse_config_text(echo));
  if (configs.size() != 1) throw ConfigError("config echo must describe exactly one run");
  return configs.front();
}

}  // namespace bpl
