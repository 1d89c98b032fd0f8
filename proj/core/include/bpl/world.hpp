#pragma once

// Object-oriented world model: typed objects, states, predicates, skills and
// tasks. Shared by the environments, the planner and the learner.

#include <compare>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace bpl {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ObjectType {
  ObjectType(std::string name, std::vector<std::string> feature_names);

  std::size_t dim() const { return feature_names.size(); }
  std::size_t feature_index(std::string_view feature) const;

  std::string name;
  std::vector<std::string> feature_names;
};
using ObjectTypePtr = std::shared_ptr<const ObjectType>;

ObjectTypePtr make_type(std::string name, std::vector<std::string> features);

// Objects are identified by name; the type travels along for validation.
class Object {
 public:
  Object(std::string name, ObjectTypePtr type);

  const std::string& name() const { return name_; }
  const ObjectType& type() const { return *type_; }
  const ObjectTypePtr& type_ptr() const { return type_; }
  bool is_a(std::string_view type_name) const { return type_->name == type_name; }

  friend bool operator==(const Object& a, const Object& b) { return a.name_ == b.name_; }
  friend std::strong_ordering operator<=>(const Object& a, const Object& b) {
    return a.name_ <=> b.name_;
  }

 private:
  std::string name_;
  ObjectTypePtr type_;
};

class State {
 public:
  void set(const Object& object, std::vector<double> values);
  void set_feature(const Object& object, std::string_view feature, double value);

  const std::vector<double>& values(const Object& object) const;
  double get(const Object& object, std::string_view feature) const;

  bool contains(const Object& object) const { return values_.contains(object); }
  const Object& object(std::string_view name) const;
  std::optional<Object> find(std::string_view name) const;

  // Sorted by object name.
  std::vector<Object> objects() const;
  std::vector<Object> objects_of_type(std::string_view type_name) const;
  std::size_t size() const { return values_.size(); }

  friend bool operator==(const State& a, const State& b);

 private:
  std::map<Object, std::vector<double>, std::less<>> values_;
};

using Classifier = std::function<bool(const State&, std::span<const Object>)>;

struct Predicate {
  std::string name;
  std::vector<ObjectTypePtr> arg_types;
  Classifier classifier;

  std::size_t arity() const { return arg_types.size(); }
};
using PredicatePtr = std::shared_ptr<const Predicate>;

PredicatePtr make_predicate(std::string name, std::vector<ObjectTypePtr> arg_types,
                            Classifier classifier);

class GroundAtom {
 public:
  GroundAtom(PredicatePtr predicate, std::vector<Object> args);

  const Predicate& predicate() const { return *predicate_; }
  const PredicatePtr& predicate_ptr() const { return predicate_; }
  const std::vector<Object>& args() const { return args_; }

  bool holds(const State& state) const;
  // "Pred(obj1,obj2)"
  std::string to_string() const;

  friend bool operator==(const GroundAtom& a, const GroundAtom& b);
  friend std::strong_ordering operator<=>(const GroundAtom& a, const GroundAtom& b);

 private:
  PredicatePtr predicate_;
  std::vector<Object> args_;
};
using AtomSet = std::set<GroundAtom>;

struct ParamBound {
  double lo = 0.0;
  double hi = 0.0;
};

struct ParameterizedSkill {
  std::string name;
  std::vector<ObjectTypePtr> object_signature;
  std::vector<ParamBound> param_bounds;

  std::size_t param_dim() const { return param_bounds.size(); }
};
using SkillPtr = std::shared_ptr<const ParameterizedSkill>;

inline constexpr std::string_view kRunLowLevelAction = "RunLowLevelAction";

SkillPtr make_skill(std::string name, std::vector<ObjectTypePtr> signature,
                    std::vector<ParamBound> bounds);

struct GroundAction {
  GroundAction(SkillPtr skill, std::vector<Object> objects, std::vector<double> params);

  std::string to_string() const;

  SkillPtr skill;
  std::vector<Object> objects;
  std::vector<double> params;
};

struct Task {
  std::string id;
  std::vector<Object> objects;
  State initial_state;
  AtomSet goal;
  int horizon = 1;

  // Throws Error when the invariants (goal over task objects, horizon >= 1,
  // state covering exactly the object set) are violated.
  void validate() const;
};

// Every well-typed ground atom over the state's objects whose classifier holds.
AtomSet abstract(const State& state, std::span<const PredicatePtr> predicates);

bool goal_holds(const AtomSet& goal, const State& state);

// Feature indices that hold an object's position, keyed by type name.
using PositionMap = std::map<std::string, std::vector<std::size_t>, std::less<>>;

std::vector<double> position_of(const State& state, const Object& object,
                                const PositionMap& positions);

double object_distance(const State& state, const Object& a, const Object& b,
                       const PositionMap& positions);

}  // namespace bpl
