#include "bpl/world.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

namespace bpl {

ObjectType::ObjectType(std::string type_name, std::vector<std::string> features)
    : name(std::move(type_name)), feature_names(std::move(features)) {
  std::unordered_set<std::string> seen;
  for (const auto& f : feature_names) {
    if (!seen.insert(f).second) {
      throw Error("duplicate feature '" + f + "' in type '" + name + "'");
    }
  }
}

std::size_t ObjectType::feature_index(std::string_view feature) const {
  for (std::size_t i = 0; i < feature_names.size(); ++i) {
    if (feature_names[i] == feature) return i;
  }
  throw Error("type '" + name + "' has no feature '" + std::string(feature) + "'");
}

ObjectTypePtr make_type(std::string name, std::vector<std::string> features) {
  return std::make_shared<const ObjectType>(std::move(name), std::move(features));
}

Object::Object(std::string name, ObjectTypePtr type) : name_(std::move(name)), type_(std::move(type)) {
  if (!type_) throw Error("object '" + name_ + "' has no type");
}

void State::set(const Object& object, std::vector<double> values) {
  if (values.size() != object.type().dim()) {
    throw Error("object '" + object.name() + "' expects " + std::to_string(object.type().dim()) +
                " features, got " + std::to_string(values.size()));
  }
  values_.insert_or_assign(object, std::move(values));
}

void State::set_feature(const Object& object, std::string_view feature, double value) {
  auto it = values_.find(object);
  if (it == values_.end()) throw Error("state has no object '" + object.name() + "'");
  it->second[object.type().feature_index(feature)] = value;
}

const std::vector<double>& State::values(const Object& object) const {
  auto it = values_.find(object);
  if (it == values_.end()) throw Error("state has no object '" + object.name() + "'");
  return it->second;
}

double State::get(const Object& object, std::string_view feature) const {
  return values(object)[object.type().feature_index(feature)];
}

std::optional<Object> State::find(std::string_view name) const {
  for (const auto& [obj, _] : values_) {
    if (obj.name() == name) return obj;
  }
  return std::nullopt;
}

const Object& State::object(std::string_view name) const {
  for (const auto& [obj, _] : values_) {
    if (obj.name() == name) return obj;
  }
  throw Error("state has no object '" + std::string(name) + "'");
}

std::vector<Object> State::objects() const {
  std::vector<Object> out;
  out.reserve(values_.size());
  for (const auto& [obj, _] : values_) out.push_back(obj);
  return out;
}

std::vector<Object> State::objects_of_type(std::string_view type_name) const {
  std::vector<Object> out;
  for (const auto& [obj, _] : values_) {
    if (obj.is_a(type_name)) out.push_back(obj);
  }
  return out;
}

bool operator==(const State& a, const State& b) {
  if (a.values_.size() != b.values_.size()) return false;
  auto ia = a.values_.begin();
  auto ib = b.values_.begin();
  for (; ia != a.values_.end(); ++ia, ++ib) {
    if (!(ia->first == ib->first) || ia->first.type().name != ib->first.type().name) return false;
    if (ia->second != ib->second) return false;
  }
  return true;
}

PredicatePtr make_predicate(std::string name, std::vector<ObjectTypePtr> arg_types,
                            Classifier classifier) {
  return std::make_shared<const Predicate>(
      Predicate{std::move(name), std::move(arg_types), std::move(classifier)});
}

GroundAtom::GroundAtom(PredicatePtr predicate, std::vector<Object> args)
    : predicate_(std::move(predicate)), args_(std::move(args)) {
  if (!predicate_) throw Error("ground atom without predicate");
  if (args_.size() != predicate_->arity()) {
    throw Error("predicate " + predicate_->name + " expects " +
                std::to_string(predicate_->arity()) + " arguments");
  }
  for (std::size_t i = 0; i < args_.size(); ++i) {
    if (args_[i].type().name != predicate_->arg_types[i]->name) {
      throw Error("argument '" + args_[i].name() + "' of " + predicate_->name + " must have type " +
                  predicate_->arg_types[i]->name);
    }
  }
}

bool GroundAtom::holds(const State& state) const {
  return predicate_->classifier(state, args_);
}

std::string GroundAtom::to_string() const {
  std::string out = predicate_->name + "(";
  for (std::size_t i = 0; i < args_.size(); ++i) {
    if (i) out += ",";
    out += args_[i].name();
  }
  return out + ")";
}

bool operator==(const GroundAtom& a, const GroundAtom& b) {
  return a.predicate_->name == b.predicate_->name && a.args_ == b.args_;
}

std::strong_ordering operator<=>(const GroundAtom& a, const GroundAtom& b) {
  if (auto c = a.predicate_->name <=> b.predicate_->name; c != 0) return c;
  return std::lexicographical_compare_three_way(a.args_.begin(), a.args_.end(), b.args_.begin(),
                                                b.args_.end());
}

SkillPtr make_skill(std::string name, std::vector<ObjectTypePtr> signature,
                    std::vector<ParamBound> bounds) {
  for (const auto& b : bounds) {
    if (!(b.lo <= b.hi)) throw Error("skill " + name + " has an empty parameter interval");
  }
  return std::make_shared<const ParameterizedSkill>(
      ParameterizedSkill{std::move(name), std::move(signature), std::move(bounds)});
}

GroundAction::GroundAction(SkillPtr s, std::vector<Object> objs, std::vector<double> ps)
    : skill(std::move(s)), objects(std::move(objs)), params(std::move(ps)) {
  if (!skill) throw Error("ground action without skill");
  if (objects.size() != skill->object_signature.size()) {
    throw Error("skill " + skill->name + " expects " +
                std::to_string(skill->object_signature.size()) + " objects");
  }
  for (std::size_t i = 0; i < objects.size(); ++i) {
    if (objects[i].type().name != skill->object_signature[i]->name) {
      throw Error("object '" + objects[i].name() + "' does not match the signature of " +
                  skill->name);
    }
  }
  if (params.size() != skill->param_dim()) {
    throw Error("skill " + skill->name + " expects " + std::to_string(skill->param_dim()) +
                " parameters");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& b = skill->param_bounds[i];
    if (!(params[i] >= b.lo && params[i] <= b.hi)) {
      throw Error("parameter " + std::to_string(i) + " of " + skill->name + " out of bounds");
    }
  }
}

std::string GroundAction::to_string() const {
  std::ostringstream os;
  os.precision(6);
  os << skill->name << "(";
  for (std::size_t i = 0; i < objects.size(); ++i) {
    if (i) os << ",";
    os << objects[i].name();
  }
  if (!params.empty()) {
    os << (objects.empty() ? "[" : ",[");
    for (std::size_t i = 0; i < params.size(); ++i) {
      if (i) os << ",";
      os << params[i];
    }
    os << "]";
  }
  os << ")";
  return os.str();
}

void Task::validate() const {
  if (horizon < 1) throw Error("task " + id + ": horizon must be >= 1");
  std::set<std::string> names;
  for (const auto& o : objects) {
    if (!names.insert(o.name()).second) throw Error("task " + id + ": duplicate object " + o.name());
    if (!initial_state.contains(o)) throw Error("task " + id + ": initial state lacks " + o.name());
  }
  if (initial_state.size() != objects.size()) {
    throw Error("task " + id + ": initial state has objects outside the task");
  }
  for (const auto& atom : goal) {
    for (const auto& arg : atom.args()) {
      if (!names.contains(arg.name())) {
        throw Error("task " + id + ": goal atom " + atom.to_string() + " uses unknown object");
      }
    }
  }
}

namespace {

void enumerate_tuples(const State& state, const Predicate& pred,
                      const std::vector<std::vector<Object>>& pools, std::vector<Object>& tuple,
                      std::size_t depth, const PredicatePtr& ptr, AtomSet& out) {
  if (depth == pools.size()) {
    if (pred.classifier(state, tuple)) out.emplace(ptr, tuple);
    return;
  }
  for (const auto& o : pools[depth]) {
    tuple.push_back(o);
    enumerate_tuples(state, pred, pools, tuple, depth + 1, ptr, out);
    tuple.pop_back();
  }
}

}  // namespace

AtomSet abstract(const State& state, std::span<const PredicatePtr> predicates) {
  AtomSet out;
  std::map<std::string, std::vector<Object>, std::less<>> by_type;
  for (const auto& o : state.objects()) by_type[o.type().name].push_back(o);
  for (const auto& pred : predicates) {
    std::vector<std::vector<Object>> pools;
    bool empty_pool = false;
    for (const auto& t : pred->arg_types) {
      auto it = by_type.find(t->name);
      if (it == by_type.end()) {
        empty_pool = true;
        break;
      }
      pools.push_back(it->second);
    }
    if (empty_pool) continue;
    std::vector<Object> tuple;
    enumerate_tuples(state, *pred, pools, tuple, 0, pred, out);
  }
  return out;
}

bool goal_holds(const AtomSet& goal, const State& state) {
  return std::all_of(goal.begin(), goal.end(), [&](const GroundAtom& g) { return g.holds(state); });
}

std::vector<double> position_of(const State& state, const Object& object,
                                const PositionMap& positions) {
  auto it = positions.find(object.type().name);
  if (it == positions.end() || it->second.empty()) {
    throw Error("type '" + object.type().name + "' declares no position features");
  }
  const auto& values = state.values(object);
  std::vector<double> out;
  out.reserve(it->second.size());
  for (auto idx : it->second) out.push_back(values.at(idx));
  return out;
}

double object_distance(const State& state, const Object& a, const Object& b,
                       const PositionMap& positions) {
  const auto pa = position_of(state, a, positions);
  const auto pb = position_of(state, b, positions);
  if (pa.size() != pb.size()) {
    throw Error("objects '" + a.name() + "' and '" + b.name() + "' have positions of different dimension");
  }
  double sq = 0.0;
  for (std::size_t i = 0; i < pa.size(); ++i) sq += (pa[i] - pb[i]) * (pa[i] - pb[i]);
  return std::sqrt(sq);
}

}  // namespace bpl
