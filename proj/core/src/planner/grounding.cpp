#include <algorithm>
#include <set>

#include "bpl/planner.hpp"

namespace bpl {

namespace {

std::set<std::string> fluent_predicates(std::span<const OperatorPtr> operators) {
  std::set<std::string> out;
  for (const auto& op : operators) {
    for (const auto& t : op->add_effects) out.insert(t.predicate->name);
    for (const auto& t : op->delete_effects) out.insert(t.predicate->name);
  }
  return out;
}

struct Grounder {
  const Operator& op;
  const OperatorPtr& op_ptr;
  const std::vector<std::vector<Object>>& pools;
  const AtomSet& init;
  // Static precondition templates indexed by the last slot they need bound.
  std::vector<std::vector<const AtomTemplate*>> checks_at;
  std::vector<GroundOperator>& out;
  std::vector<Object> binding;

  bool statics_hold(std::size_t depth) const {
    for (const AtomTemplate* t : checks_at[depth]) {
      if (!init.contains(instantiate(*t, binding))) return false;
    }
    return true;
  }

  void run(std::size_t depth) {
    if (depth == pools.size()) {
      GroundOperator g;
      g.op = op_ptr;
      g.binding = binding;
      for (const auto& t : op.preconditions) g.preconditions.insert(instantiate(t, binding));
      for (const auto& t : op.add_effects) g.add_effects.insert(instantiate(t, binding));
      for (const auto& t : op.delete_effects) g.delete_effects.insert(instantiate(t, binding));
      out.push_back(std::move(g));
      return;
    }
    for (const auto& o : pools[depth]) {
      binding.push_back(o);
      if (statics_hold(depth)) run(depth + 1);
      binding.pop_back();
    }
  }
};

}  // namespace

std::vector<GroundOperator> ground(std::span<const OperatorPtr> operators, std::span<const Object> objects,
                                   const AtomSet& init_atoms) {
  const auto fluents = fluent_predicates(operators);
  std::vector<Object> sorted(objects.begin(), objects.end());
  std::sort(sorted.begin(), sorted.end());

  std::vector<GroundOperator> out;
  for (const auto& op_ptr : operators) {
    const Operator& op = *op_ptr;
    std::vector<std::vector<Object>> pools;
    bool empty = false;
    for (const auto& p : op.parameters) {
      std::vector<Object> pool;
      for (const auto& o : sorted) {
        if (o.type().name == p.type->name) pool.push_back(o);
      }
      if (pool.empty()) empty = true;
      pools.push_back(std::move(pool));
    }
    if (empty) continue;
    std::vector<std::vector<const AtomTemplate*>> checks(op.parameters.size());
    for (const auto& t : op.preconditions) {
      if (fluents.contains(t.predicate->name)) continue;
      const int last = t.slots.empty() ? 0 : *std::max_element(t.slots.begin(), t.slots.end());
      checks[static_cast<std::size_t>(last)].push_back(&t);
    }
    if (op.parameters.empty()) {
      // Nullary operator: static preconditions are ground already.
      bool ok = true;
      for (const auto& t : op.preconditions) {
        if (!fluents.contains(t.predicate->name) && !init_atoms.contains(instantiate(t, {}))) ok = false;
      }
      if (!ok) continue;
    }
    Grounder g{op, op_ptr, pools, init_atoms, std::move(checks), out, {}};
    g.run(0);
  }
  return out;
}

}  // namespace bpl
