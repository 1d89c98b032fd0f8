#include "bpl/operators.hpp"

#include <algorithm>

namespace bpl {

namespace {

void check_slots(const Operator& op, const std::vector<AtomTemplate>& templates) {
  for (const auto& t : templates) {
    if (!t.predicate) throw Error("operator " + op.name + " has a template without predicate");
    if (t.slots.size() != t.predicate->arity()) {
      throw Error("operator " + op.name + ": arity mismatch for " + t.predicate->name);
    }
    for (std::size_t i = 0; i < t.slots.size(); ++i) {
      const int s = t.slots[i];
      if (s < 0 || static_cast<std::size_t>(s) >= op.parameters.size()) {
        throw Error("operator " + op.name + ": template " + t.predicate->name +
                    " references an undeclared parameter");
      }
      if (op.parameters[s].type->name != t.predicate->arg_types[i]->name) {
        throw Error("operator " + op.name + ": type mismatch in " + t.predicate->name);
      }
    }
  }
}

}  // namespace

void Operator::validate() const {
  check_slots(*this, preconditions);
  check_slots(*this, add_effects);
  check_slots(*this, delete_effects);
  if (!linked_skill && !choose_skill) throw Error("operator " + name + " has no linked skill");
  for (int s : skill_args) {
    if (s < 0 || static_cast<std::size_t>(s) >= parameters.size()) {
      throw Error("operator " + name + ": skill argument out of range");
    }
  }
  if (linked_skill) {
    if (linked_skill->object_signature.size() != skill_args.size()) {
      throw Error("operator " + name + ": skill " + linked_skill->name + " signature mismatch");
    }
    for (std::size_t i = 0; i < skill_args.size(); ++i) {
      if (linked_skill->object_signature[i]->name != parameters[skill_args[i]].type->name) {
        throw Error("operator " + name + ": skill argument type mismatch");
      }
    }
  }
}

GroundAction Operator::make_action(const State& state, std::span<const Object> binding) const {
  SkillPtr skill = choose_skill ? choose_skill(state, binding) : linked_skill;
  std::vector<Object> objects;
  objects.reserve(skill_args.size());
  for (int s : skill_args) objects.push_back(binding[s]);
  std::vector<double> params = parameter_policy ? parameter_policy(state, binding) : std::vector<double>{};
  return GroundAction(std::move(skill), std::move(objects), std::move(params));
}

std::string GroundOperator::name() const {
  std::string out = op->name + "(";
  for (std::size_t i = 0; i < binding.size(); ++i) {
    if (i) out += ",";
    out += binding[i].name();
  }
  return out + ")";
}

GroundAtom instantiate(const AtomTemplate& tmpl, std::span<const Object> binding) {
  std::vector<Object> args;
  args.reserve(tmpl.slots.size());
  for (int s : tmpl.slots) args.push_back(binding[s]);
  return GroundAtom(tmpl.predicate, std::move(args));
}

bool applicable(const GroundOperator& op, const AtomSet& atoms) {
  return std::includes(atoms.begin(), atoms.end(), op.preconditions.begin(), op.preconditions.end());
}

AtomSet apply(const GroundOperator& op, const AtomSet& atoms) {
  AtomSet out;
  std::set_difference(atoms.begin(), atoms.end(), op.delete_effects.begin(), op.delete_effects.end(),
                      std::inserter(out, out.end()));
  out.insert(op.add_effects.begin(), op.add_effects.end());
  return out;
}

}  // namespace bpl
