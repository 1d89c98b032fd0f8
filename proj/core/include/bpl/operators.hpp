#pragma once

// Lifted symbolic operators and their ground instances.

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bpl/world.hpp"

namespace bpl {

// Predicate applied to operator parameter slots.
struct AtomTemplate {
  PredicatePtr predicate;
  std::vector<int> slots;
};

using ParameterPolicy =
    std::function<std::vector<double>(const State&, std::span<const Object> binding)>;
using SkillChooser = std::function<SkillPtr(const State&, std::span<const Object> binding)>;

struct Parameter {
  std::string name;
  ObjectTypePtr type;
};

struct Operator {
  std::string name;
  std::vector<Parameter> parameters;
  std::vector<AtomTemplate> preconditions;
  std::vector<AtomTemplate> add_effects;
  std::vector<AtomTemplate> delete_effects;

  // Skill executed for this operator; `skill_args` picks the operator
  // parameters passed as skill objects. `choose_skill`, when set, overrides
  // `linked_skill` (e.g. a move operator that maps onto MoveLeft/MoveRight).
  SkillPtr linked_skill;
  std::vector<int> skill_args;
  SkillChooser choose_skill;
  ParameterPolicy parameter_policy;

  // Throws Error when a template slot or skill argument is out of range.
  void validate() const;

  GroundAction make_action(const State& state, std::span<const Object> binding) const;
};
using OperatorPtr = std::shared_ptr<const Operator>;

struct GroundOperator {
  OperatorPtr op;
  std::vector<Object> binding;
  AtomSet preconditions;
  AtomSet add_effects;
  AtomSet delete_effects;
  int cost = 1;

  // "MoveRobot(robby,cell0,cell1)"
  std::string name() const;

  friend bool operator==(const GroundOperator& a, const GroundOperator& b) {
    return a.op->name == b.op->name && a.binding == b.binding;
  }
};

using Skeleton = std::vector<GroundOperator>;

// Ground one template against an operator binding.
GroundAtom instantiate(const AtomTemplate& tmpl, std::span<const Object> binding);

// STRIPS successor of an atom set.
AtomSet apply(const GroundOperator& op, const AtomSet& atoms);

bool applicable(const GroundOperator& op, const AtomSet& atoms);

}  // namespace bpl
