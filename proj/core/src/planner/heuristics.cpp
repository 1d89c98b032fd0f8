#include <algorithm>
#include <queue>

#include "bpl/planner.hpp"

namespace bpl {

StripsProblem::StripsProblem(const AtomSet& init, const AtomSet& goal, std::span<const GroundOperator> ops) {
  for (const auto& a : init) intern(a);
  for (const auto& a : goal) intern(a);
  for (const auto& g : ops) {
    Op op;
    for (const auto& a : g.preconditions) op.pre.push_back(intern(a));
    for (const auto& a : g.add_effects) op.add.push_back(intern(a));
    for (const auto& a : g.delete_effects) op.del.push_back(intern(a));
    std::sort(op.pre.begin(), op.pre.end());
    std::sort(op.add.begin(), op.add.end());
    std::sort(op.del.begin(), op.del.end());
    op.cost = g.cost;
    ops_.push_back(std::move(op));
  }
  init_ = encode(init);
  goal_ = encode(goal);
}

int StripsProblem::intern(const GroundAtom& atom) {
  auto it = index_.find(atom);
  if (it != index_.end()) return it->second;
  const int id = static_cast<int>(facts_.size());
  facts_.push_back(atom);
  index_.emplace(atom, id);
  return id;
}

int StripsProblem::fact_id(const GroundAtom& atom) const {
  auto it = index_.find(atom);
  return it == index_.end() ? -1 : it->second;
}

std::vector<int> StripsProblem::encode(const AtomSet& atoms) const {
  std::vector<int> out;
  for (const auto& a : atoms) {
    const int id = fact_id(a);
    if (id >= 0) out.push_back(id);
  }
  std::sort(out.begin(), out.end());
  return out;
}

RelaxedHeuristics::RelaxedHeuristics(const StripsProblem& problem) : problem_(problem) {
  const int n = problem.num_facts();
  true_fact_ = n;
  goal_fact_ = n + 1;
  for (const auto& op : problem.ops()) {
    pre_.push_back(op.pre.empty() ? std::vector<int>{true_fact_} : op.pre);
    add_.push_back(op.add);
    base_cost_.push_back(op.cost);
  }
  pre_.push_back(problem.goal().empty() ? std::vector<int>{true_fact_} : problem.goal());
  add_.push_back({goal_fact_});
  base_cost_.push_back(0);

  pre_of_.resize(static_cast<std::size_t>(n + 2));
  for (std::size_t o = 0; o < pre_.size(); ++o) {
    for (int f : pre_[o]) pre_of_[static_cast<std::size_t>(f)].push_back(static_cast<int>(o));
  }
  fact_cost_.resize(static_cast<std::size_t>(n + 2));
  unsatisfied_.resize(pre_.size());
}

int RelaxedHeuristics::compute_hmax(std::span<const int> state) {
  std::fill(fact_cost_.begin(), fact_cost_.end(), kInfiniteCost);
  for (std::size_t o = 0; o < pre_.size(); ++o) unsatisfied_[o] = static_cast<int>(pre_[o].size());

  using Entry = std::pair<int, int>;  // (cost, fact)
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  auto reach = [&](int f, int c) {
    if (c < fact_cost_[static_cast<std::size_t>(f)]) {
      fact_cost_[static_cast<std::size_t>(f)] = c;
      queue.emplace(c, f);
    }
  };
  reach(true_fact_, 0);
  for (int f : state) reach(f, 0);

  while (!queue.empty()) {
    const auto [c, f] = queue.top();
    queue.pop();
    if (c > fact_cost_[static_cast<std::size_t>(f)]) continue;
    for (int o : pre_of_[static_cast<std::size_t>(f)]) {
      if (--unsatisfied_[static_cast<std::size_t>(o)] != 0) continue;
      // Facts pop in cost order, so the last precondition carries the max.
      const int next = c + op_cost_[static_cast<std::size_t>(o)];
      for (int g : add_[static_cast<std::size_t>(o)]) reach(g, next);
    }
  }
  return fact_cost_[static_cast<std::size_t>(goal_fact_)];
}

int RelaxedHeuristics::hmax(std::span<const int> state) {
  op_cost_ = base_cost_;
  return compute_hmax(state);
}

int RelaxedHeuristics::lmcut(std::span<const int> state) {
  op_cost_ = base_cost_;
  const std::size_t num_ops = pre_.size();
  const std::size_t num_facts = fact_cost_.size();
  std::vector<int> pcf(num_ops, -1);
  std::vector<std::vector<int>> adders(num_facts);
  std::vector<std::vector<int>> by_pcf(num_facts);
  std::vector<char> in_zone(num_facts);
  std::vector<char> in_v0(num_facts);
  std::vector<int> cut;
  std::vector<int> stack;

  int h = 0;
  while (true) {
    const int hm = compute_hmax(state);
    if (hm == kInfiniteCost) return kInfiniteCost;
    if (hm == 0) return h;

    for (auto& v : adders) v.clear();
    for (auto& v : by_pcf) v.clear();
    for (std::size_t o = 0; o < num_ops; ++o) {
      int best = -1;
      int best_cost = -1;
      for (int f : pre_[o]) {
        const int c = fact_cost_[static_cast<std::size_t>(f)];
        if (c == kInfiniteCost) {
          best = -1;
          break;
        }
        if (c > best_cost) {
          best_cost = c;
          best = f;
        }
      }
      pcf[o] = best;
      if (best < 0) continue;
      by_pcf[static_cast<std::size_t>(best)].push_back(static_cast<int>(o));
      for (int g : add_[o]) adders[static_cast<std::size_t>(g)].push_back(static_cast<int>(o));
    }

    // Goal zone: facts reaching the goal through zero-cost justification edges.
    std::fill(in_zone.begin(), in_zone.end(), 0);
    in_zone[static_cast<std::size_t>(goal_fact_)] = 1;
    stack.assign(1, goal_fact_);
    while (!stack.empty()) {
      const int f = stack.back();
      stack.pop_back();
      for (int o : adders[static_cast<std::size_t>(f)]) {
        if (op_cost_[static_cast<std::size_t>(o)] != 0) continue;
        const int p = pcf[static_cast<std::size_t>(o)];
        if (!in_zone[static_cast<std::size_t>(p)]) {
          in_zone[static_cast<std::size_t>(p)] = 1;
          stack.push_back(p);
        }
      }
    }

    // Facts reachable from the state without entering the goal zone.
    std::fill(in_v0.begin(), in_v0.end(), 0);
    cut.clear();
    stack.clear();
    auto visit = [&](int f) {
      if (!in_v0[static_cast<std::size_t>(f)] && !in_zone[static_cast<std::size_t>(f)]) {
        in_v0[static_cast<std::size_t>(f)] = 1;
        stack.push_back(f);
      }
    };
    visit(true_fact_);
    for (int f : state) visit(f);
    while (!stack.empty()) {
      const int f = stack.back();
      stack.pop_back();
      for (int o : by_pcf[static_cast<std::size_t>(f)]) {
        bool into_zone = false;
        for (int g : add_[static_cast<std::size_t>(o)]) {
          if (in_zone[static_cast<std::size_t>(g)]) {
            into_zone = true;
          } else {
            visit(g);
          }
        }
        if (into_zone) cut.push_back(o);
      }
    }
    std::sort(cut.begin(), cut.end());
    cut.erase(std::unique(cut.begin(), cut.end()), cut.end());
    if (cut.empty()) throw Error("lmcut: empty landmark cut");
    int cost = kInfiniteCost;
    for (int o : cut) cost = std::min(cost, op_cost_[static_cast<std::size_t>(o)]);
    h += cost;
    for (int o : cut) op_cost_[static_cast<std::size_t>(o)] -= cost;
  }
}

int hmax(const AtomSet& atoms, const AtomSet& goal, std::span<const GroundOperator> ops) {
  StripsProblem problem(atoms, goal, ops);
  RelaxedHeuristics h(problem);
  return h.hmax(problem.init());
}

int lmcut(const AtomSet& atoms, const AtomSet& goal, std::span<const GroundOperator> ops) {
  StripsProblem problem(atoms, goal, ops);
  RelaxedHeuristics h(problem);
  return h.lmcut(problem.init());
}

}  // namespace bpl
