#include "bpl/metapolicy.hpp"

namespace bpl {

BridgeAction LearnedBridge::act(const State& state, const BridgeMDP& mdp, std::mt19937_64& rng) {
  return epsilon_greedy(*learner_, state, mdp, rng, explore_ ? std::nullopt : std::optional<double>(0.0));
}

BridgeAction RandomBridge::act(const State& state, const BridgeMDP& mdp, std::mt19937_64& rng) {
  auto candidates = candidate_actions(state, mdp, n_sample_, rng);
  if (candidates.empty()) throw Error("random bridge: empty candidate set");
  return candidates[std::uniform_int_distribution<std::size_t>(0, candidates.size() - 1)(rng)];
}

BridgeAction CallPlannerBridge::act(const State&, const BridgeMDP& mdp, std::mt19937_64&) {
  if (!mdp.actions.call_planner) throw Error("CallPlanner is not in the action space");
  return call_planner_action(mdp.actions);
}

namespace {

SegmentLog planner_segment(const RolloutResult& r, int before, int after) {
  SegmentLog seg;
  seg.kind = SegmentKind::kPlanner;
  seg.env_steps = r.planner_failed ? 0 : r.steps_consumed;
  seg.actions = r.actions;
  seg.outcome = r.planner_failed ? "planner_failed" : std::string(to_string(r.outcome));
  seg.novelties_before = before;
  seg.novelties_after = after;
  return seg;
}

}  // namespace

EpisodeRecord solve_task(const EnvSpec& env, const Task& task, BridgeController& controller,
                         const SolveOptions& options, std::mt19937_64& rng) {
  EpisodeRecord rec;
  rec.task_id = task.id;
  const bool train = options.mode == SolveMode::kTrain;
  QLearner* learner = train ? options.learner : nullptr;
  auto novelties = [&](const State& s) { return env.resolved_novelties ? env.resolved_novelties(s) : 0; };

  State x = task.initial_state;
  int steps = 0;
  rec.novelties_initial = novelties(x);

  auto finish = [&]() {
    rec.env_steps = steps;
    rec.success = goal_holds(task.goal, x);
    rec.reward = rec.success ? 1.0 : 0.0;
    rec.novelties_final = novelties(x);
    return rec;
  };

  if (options.use_planner) {
    const int before = novelties(x);
    RolloutResult r = call_planner_rollout(env, x, task, steps, options.search);
    steps += r.steps_consumed;
    x = r.next_state;
    rec.segments.push_back(planner_segment(r, before, novelties(x)));
    ++rec.planner_segments;
  }

  int bridge_steps = 0;
  while (!goal_holds(task.goal, x) && steps < task.horizon) {
    BridgeMDP mdp = make_bridge_mdp(env, x, task.goal, options.bridge, task.horizon - steps);
    SegmentLog seg;
    seg.kind = SegmentKind::kBridge;
    seg.novelties_before = novelties(x);
    if (mdp.focus_objects.size() > 1) seg.focus = mdp.focus_objects[1].name();
    ++rec.alternations;

    bool episode_over = false;
    bool logged = false;
    while (true) {
      if (train && bridge_steps >= options.trajectory_step_budget) {
        seg.outcome = "budget";
        episode_over = true;
        break;
      }
      const BridgeAction a = controller.act(x, mdp, rng);
      ++bridge_steps;
      ++rec.bridge_actions;
      TransitionRecord tr;
      if (learner) {
        tr.state = project_state(x, mdp);
        tr.action = encode_action(mdp.actions, a);
      }

      if (a.is_call_planner()) {
        ++rec.call_planner_calls;
        seg.actions.emplace_back(kCallPlanner);
        seg.outcome = "call_planner";
        seg.novelties_after = novelties(x);
        rec.segments.push_back(seg);
        logged = true;

        const int before = novelties(x);
        RolloutResult r = call_planner_rollout(env, x, task, steps, options.search);
        // A failed replan still costs a step so every decision advances time.
        steps += r.planner_failed ? 1 : r.steps_consumed;
        x = r.next_state;
        rec.segments.push_back(planner_segment(r, before, novelties(x)));
        if (r.planner_failed) rec.segments.back().env_steps = 1;
        ++rec.planner_segments;
        const bool goal = goal_holds(task.goal, x);
        const bool terminal = goal || steps >= task.horizon;
        if (learner) {
          tr.reward = bridge_reward(x, task.goal);
          tr.terminal = terminal;
          if (terminal) {
            tr.next_state = project_state(x, mdp);
            tr.next_mask = skill_mask(x, mdp);
          } else {
            // The next bridge segment re-selects its focus at the new stuck state.
            const BridgeMDP next = make_bridge_mdp(env, x, task.goal, options.bridge, task.horizon - steps);
            tr.next_state = project_state(x, next);
            tr.next_mask = skill_mask(x, next);
          }
          learner->buffer().add(std::move(tr));
          learner->advance();
        }
        break;
      }

      x = step(env, x, *a.action);
      ++steps;
      ++seg.env_steps;
      seg.actions.push_back(a.to_string());
      const bool goal = goal_holds(task.goal, x);
      const bool terminal = goal || steps >= task.horizon;
      if (learner) {
        tr.reward = bridge_reward(x, task.goal);
        tr.terminal = terminal;
        tr.next_state = project_state(x, mdp);
        tr.next_mask = skill_mask(x, mdp);
        learner->buffer().add(std::move(tr));
        learner->advance();
      }
      if (terminal) {
        seg.outcome = goal ? "goal" : "horizon";
        episode_over = true;
        break;
      }
    }
    if (!logged) {
      seg.novelties_after = novelties(x);
      rec.segments.push_back(std::move(seg));
    }
    if (episode_over) break;
  }
  return finish();
}

}  // namespace bpl
