#include <benchmark/benchmark.h>

#include <random>

#include "bpl/bridge.hpp"
#include "bpl/planner.hpp"

namespace {

using namespace bpl;

void BM_PlanLightSwitchDoor(benchmark::State& st) {
  const EnvSpec& env = light_switch_door();
  const auto cells = static_cast<int>(st.range(0));
  Task task = sample_task(env, {Split::kEval, 1, {cells, cells, 0, 0}, 1});
  const SearchOptions opts{static_cast<Heuristic>(st.range(1))};
  for (auto _ : st) benchmark::DoNotOptimize(plan_from_state(env, task.initial_state, task.goal, opts));
}
BENCHMARK(BM_PlanLightSwitchDoor)->ArgsProduct({{6, 20}, {0, 1, 2}});

void BM_PlanDoorknobs(benchmark::State& st) {
  const EnvSpec& env = doorknobs();
  const auto rooms = static_cast<int>(st.range(0));
  Task task = sample_task(env, {Split::kEval, 1, {rooms, rooms, 0, 0}, 1});
  for (auto _ : st) benchmark::DoNotOptimize(plan_from_state(env, task.initial_state, task.goal));
}
BENCHMARK(BM_PlanDoorknobs)->Arg(9)->Arg(25);

void BM_ForwardProduct(benchmark::State& st) {
  std::mt19937_64 rng(1);
  const auto batch = st.range(0);
  const auto candidates = st.range(1);
  const MLPParams p = init_mlp(5 + 7, kDefaultHidden, rng);
  const Eigen::MatrixXd states = Eigen::MatrixXd::Random(5, batch);
  const Eigen::MatrixXd actions = Eigen::MatrixXd::Random(7, candidates);
  for (auto _ : st) benchmark::DoNotOptimize(forward_product(p, states, actions));
  st.SetItemsProcessed(st.iterations() * batch * candidates);
}
BENCHMARK(BM_ForwardProduct)->Args({128, 23})->Args({128, 41});

void BM_TrainStep(benchmark::State& st) {
  const EnvSpec& env = light_switch_door();
  const ActionSpace space = make_action_space(env, true);
  const std::size_t dim = projected_dim(env, StateView::kFocused);
  QLearner learner(space, dim, {}, 3);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    TransitionRecord r;
    for (std::size_t k = 0; k < dim; ++k) r.state.push_back(u(rng));
    r.action.assign(space.encoding_dim(), 0.0);
    r.action[static_cast<std::size_t>(i % 5)] = 1.0;
    r.next_state = r.state;
    r.terminal = i % 10 == 0;
    r.reward = r.terminal ? 1.0 : 0.0;
    r.next_mask.assign(space.skills.size() + 1, 1);
    learner.buffer().add(std::move(r));
  }
  for (auto _ : st) benchmark::DoNotOptimize(learner.train_step());
}
BENCHMARK(BM_TrainStep);

}  // namespace

BENCHMARK_MAIN();
