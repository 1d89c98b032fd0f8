#include <algorithm>

#include "bpl/planner.hpp"

namespace bpl {

PlanPolicy::PlanPolicy(Skeleton skeleton, const EnvSpec& env)
    : skeleton_(std::move(skeleton)), env_(&env), predicates_(env.all_predicates()) {}

PlanOutput PlanPolicy::next(const State& state) {
  if (stuck_) return {std::nullopt, PlanStatus::kStuck};
  if (cursor_ == skeleton_.size()) return {std::nullopt, PlanStatus::kExhausted};
  const GroundOperator& op = skeleton_[cursor_];
  awaiting_check_ = true;
  return {op.op->make_action(state, op.binding), PlanStatus::kOnTrack};
}

Progress PlanPolicy::check_progress(const State& resulting_state) {
  if (!awaiting_check_) throw Error("check_progress called without a pending plan action");
  awaiting_check_ = false;
  const GroundOperator& op = skeleton_[cursor_];
  auto holds = [&](const GroundAtom& a) { return a.holds(resulting_state); };
  bool ok = std::all_of(op.add_effects.begin(), op.add_effects.end(), holds) &&
            std::none_of(op.delete_effects.begin(), op.delete_effects.end(), holds);
  if (ok && cursor_ + 1 < skeleton_.size()) {
    const auto& pre = skeleton_[cursor_ + 1].preconditions;
    ok = std::all_of(pre.begin(), pre.end(), holds);
  }
  if (!ok) {
    stuck_ = true;
    stuck_state_ = resulting_state;
    return Progress::kStuck;
  }
  ++cursor_;
  return Progress::kAdvance;
}

PlanPolicy make_plan_policy(Skeleton skeleton, const EnvSpec& env) { return PlanPolicy(std::move(skeleton), env); }

}  // namespace bpl
