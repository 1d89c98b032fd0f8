#include <algorithm>
#include <cstdint>
#include <iostream>
#include <queue>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include "bpl/planner.hpp"

namespace bpl {

namespace {

using Bits = std::vector<std::uint64_t>;

struct BitsHash {
  std::size_t operator()(const Bits& b) const {
    std::uint64_t h = 1469598103934665603ULL;
    for (std::uint64_t w : b) {
      h ^= w;
      h *= 1099511628211ULL;
      h ^= h >> 29;
    }
    return static_cast<std::size_t>(h);
  }
};

bool test(const Bits& b, int f) { return (b[static_cast<std::size_t>(f) / 64] >> (f % 64)) & 1U; }
void set(Bits& b, int f) { b[static_cast<std::size_t>(f) / 64] |= std::uint64_t{1} << (f % 64); }
void clear(Bits& b, int f) { b[static_cast<std::size_t>(f) / 64] &= ~(std::uint64_t{1} << (f % 64)); }

std::vector<int> facts_of(const Bits& b, int n) {
  std::vector<int> out;
  for (int f = 0; f < n; ++f) {
    if (test(b, f)) out.push_back(f);
  }
  return out;
}

struct Node {
  Bits state;
  int g = 0;
  int h = 0;
  int parent = -1;
  int op = -1;
};

std::string list_atom(const GroundAtom& a) {
  std::string out = "(" + a.predicate().name;
  for (const auto& o : a.args()) out += " " + o.name();
  return out + ")";
}

}  // namespace

std::optional<Skeleton> astar_plan(const AtomSet& init, const AtomSet& goal, std::span<const GroundOperator> ops,
                                   const SearchOptions& options) {
  if (options.verbose) std::clog << dump_problem(init, goal, ops);
  StripsProblem problem(init, goal, ops);
  RelaxedHeuristics heuristics(problem);
  const int n = problem.num_facts();
  const std::size_t words = static_cast<std::size_t>(n) / 64 + 1;

  auto evaluate = [&](const Bits& s) -> int {
    switch (options.heuristic) {
      case Heuristic::kLmCut: return heuristics.lmcut(facts_of(s, n));
      case Heuristic::kHMax: return heuristics.hmax(facts_of(s, n));
      case Heuristic::kBlind: break;
    }
    return 0;
  };
  auto is_goal = [&](const Bits& s) {
    return std::all_of(problem.goal().begin(), problem.goal().end(), [&](int f) { return test(s, f); });
  };

  std::vector<Node> nodes;
  std::unordered_map<Bits, int, BitsHash> index;
  using Entry = std::tuple<long long, int, long long, int>;  // (f, h, insertion, node)
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  long long counter = 0;

  Bits start(words, 0);
  for (int f : problem.init()) set(start, f);
  const int h0 = evaluate(start);
  if (h0 == kInfiniteCost) return std::nullopt;
  nodes.push_back({start, 0, h0, -1, -1});
  index.emplace(start, 0);
  open.emplace(h0, h0, counter++, 0);

  const auto& sops = problem.ops();
  while (!open.empty()) {
    const auto [f, h, ins, id] = open.top();
    open.pop();
    if (f != static_cast<long long>(nodes[static_cast<std::size_t>(id)].g) + nodes[static_cast<std::size_t>(id)].h) {
      continue;  // stale entry superseded by a cheaper path
    }
    if (is_goal(nodes[static_cast<std::size_t>(id)].state)) {
      Skeleton plan;
      for (int cur = id; nodes[static_cast<std::size_t>(cur)].parent >= 0;
           cur = nodes[static_cast<std::size_t>(cur)].parent) {
        plan.push_back(ops[static_cast<std::size_t>(nodes[static_cast<std::size_t>(cur)].op)]);
      }
      std::reverse(plan.begin(), plan.end());
      return plan;
    }
    const Bits state = nodes[static_cast<std::size_t>(id)].state;
    const int g = nodes[static_cast<std::size_t>(id)].g;
    for (std::size_t o = 0; o < sops.size(); ++o) {
      const auto& op = sops[o];
      if (!std::all_of(op.pre.begin(), op.pre.end(), [&](int p) { return test(state, p); })) continue;
      Bits next = state;
      for (int d : op.del) clear(next, d);
      for (int a : op.add) set(next, a);
      const int g2 = g + op.cost;
      auto it = index.find(next);
      if (it != index.end()) {
        Node& known = nodes[static_cast<std::size_t>(it->second)];
        if (g2 >= known.g || known.h == kInfiniteCost) continue;
        known.g = g2;
        known.parent = id;
        known.op = static_cast<int>(o);
        open.emplace(static_cast<long long>(g2) + known.h, known.h, counter++, it->second);
        continue;
      }
      if (nodes.size() >= options.max_nodes) {
        throw ResourceError("astar_plan: search node cap of " + std::to_string(options.max_nodes) +
                            " exceeded");
      }
      const int h2 = evaluate(next);
      const int nid = static_cast<int>(nodes.size());
      nodes.push_back({next, g2, h2, id, static_cast<int>(o)});
      index.emplace(std::move(next), nid);
      if (h2 == kInfiniteCost) continue;
      open.emplace(static_cast<long long>(g2) + h2, h2, counter++, nid);
    }
  }
  return std::nullopt;
}

std::optional<Skeleton> plan_from_state(const EnvSpec& env, const State& state, const AtomSet& goal,
                                        const SearchOptions& options) {
  const auto predicates = env.all_predicates();
  const AtomSet atoms = abstract(state, predicates);
  const auto objects = state.objects();
  const auto ops = ground(env.operators, objects, atoms);
  return astar_plan(atoms, goal, ops, options);
}

std::string dump_problem(const AtomSet& init, const AtomSet& goal, std::span<const GroundOperator> ops) {
  std::ostringstream out;
  out << "(problem\n  (:init";
  for (const auto& a : init) out << "\n    " << list_atom(a);
  out << ")\n  (:goal (and";
  for (const auto& a : goal) out << " " << list_atom(a);
  out << "))\n  (:actions";
  for (const auto& op : ops) {
    out << "\n    (" << op.name() << "\n      :pre (and";
    for (const auto& a : op.preconditions) out << " " << list_atom(a);
    out << ")\n      :add (and";
    for (const auto& a : op.add_effects) out << " " << list_atom(a);
    out << ")\n      :del (and";
    for (const auto& a : op.delete_effects) out << " " << list_atom(a);
    out << "))";
  }
  out << "))\n";
  return out.str();
}

}  // namespace bpl
