#include <algorithm>

#include "bpl/envs.hpp"

namespace bpl {

std::string_view to_string(Split split) { return split == Split::kTrain ? "train" : "eval"; }

std::vector<PredicatePtr> EnvSpec::all_predicates() const {
  std::vector<PredicatePtr> out = predicates;
  out.insert(out.end(), planner_predicates.begin(), planner_predicates.end());
  return out;
}

SkillPtr EnvSpec::skill(std::string_view skill_name) const {
  for (const auto& s : skills) {
    if (s->name == skill_name) return s;
  }
  throw Error(name + " has no skill " + std::string(skill_name));
}

const ObjectTypePtr& EnvSpec::type(std::string_view type_name) const {
  for (const auto& t : types) {
    if (t->name == type_name) return t;
  }
  throw Error(name + " has no object type " + std::string(type_name));
}

std::size_t EnvSpec::observed_dim(const ObjectType& t) const {
  auto it = hidden_features.find(t.name);
  return t.dim() - (it == hidden_features.end() ? 0 : it->second.size());
}

const EnvSpec& env_by_name(std::string_view name) {
  if (name == "light_switch_door") return light_switch_door();
  if (name == "doorknobs") return doorknobs();
  if (name == "coffee") return coffee();
  throw Error("unknown environment '" + std::string(name) + "'");
}

std::vector<std::string> env_names() { return {"light_switch_door", "doorknobs", "coffee"}; }

Task sample_task(const EnvSpec& env, const TaskSampler& sampler) {
  std::seed_seq seq{static_cast<std::uint32_t>(sampler.rng_seed),
                    static_cast<std::uint32_t>(sampler.rng_seed >> 32),
                    static_cast<std::uint32_t>(sampler.split == Split::kTrain ? 0x7a1 : 0xe7a)};
  std::mt19937_64 rng(seq);
  for (int attempt = 0; attempt < kSamplerRetryCap; ++attempt) {
    if (auto task = env.generate(sampler, rng)) {
      task->validate();
      return *std::move(task);
    }
  }
  throw Error(env.name + ": no solvable " + std::string(to_string(sampler.split)) +
              " layout within the structural ranges after " + std::to_string(kSamplerRetryCap) +
              " attempts");
}

std::vector<Task> sample_tasks(const EnvSpec& env, const TaskSampler& sampler, int count) {
  std::vector<Task> out;
  out.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int i = 0; i < count; ++i) {
    TaskSampler s = sampler;
    s.rng_seed = sampler.rng_seed * 1000003ULL + static_cast<std::uint64_t>(i);
    Task t = sample_task(env, s);
    t.id = env.name + "-" + std::string(to_string(sampler.split)) + "-" +
           std::to_string(sampler.rng_seed) + "-" + std::to_string(i);
    out.push_back(std::move(t));
  }
  return out;
}

State step(const EnvSpec& env, const State& state, const GroundAction& action) {
  for (const auto& o : action.objects) {
    if (!state.contains(o)) {
      throw Error("action " + action.to_string() + " references an object outside the state");
    }
  }
  return env.transition(state, action);
}

std::vector<Object> interactable_objects(const EnvSpec& env, const State& state) {
  std::vector<Object> out;
  for (const auto& o : state.objects()) {
    if (env.interactable_types.contains(o.type().name)) out.push_back(o);
  }
  return out;
}

const Object& robot_of(const EnvSpec& env, const State& state) {
  const Object* found = nullptr;
  for (const auto& o : state.objects()) {
    if (o.is_a(env.robot_type)) {
      if (found) throw Error(env.name + ": state has more than one robot");
      found = &state.object(o.name());
    }
  }
  if (!found) throw Error(env.name + ": state has no robot");
  return *found;
}

}  // namespace bpl
