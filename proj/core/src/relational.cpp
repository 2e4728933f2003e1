// Copyright 2026 The joinsynth Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "joinsynth/relational.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <utility>

#include "joinsynth/error.hpp"
#include "joinsynth/noise.hpp"

namespace joinsynth {

int PopCount(std::uint64_t mask) { return std::popcount(mask); }

std::vector<std::size_t> Members(std::uint64_t mask) {
  std::vector<std::size_t> out;
  while (mask != 0) {
    out.push_back(static_cast<std::size_t>(std::countr_zero(mask)));
    mask &= mask - 1;
  }
  return out;
}

JoinQuery::JoinQuery(std::vector<Attribute> attributes,
                     const std::vector<std::vector<std::string>>& relations)
    : attributes_(std::move(attributes)) {
  for (const auto& names : relations) {
    std::vector<std::size_t> schema;
    for (const auto& name : names) schema.push_back(attribute_index(name));
    schemas_.push_back(std::move(schema));
  }
  Validate();
}

JoinQuery::JoinQuery(std::vector<Attribute> attributes,
                     std::vector<std::vector<std::size_t>> relations)
    : attributes_(std::move(attributes)), schemas_(std::move(relations)) {
  Validate();
}

void JoinQuery::Validate() {
  if (attributes_.empty() || attributes_.size() > kMaxAttributes) {
    throw Error(ErrorCode::kInvalidArgument,
                "a join query needs between 1 and 64 attributes");
  }
  if (schemas_.empty() || schemas_.size() > kMaxRelations) {
    throw Error(ErrorCode::kInvalidArgument,
                "a join query needs between 1 and 64 relations");
  }
  for (std::size_t x = 0; x < attributes_.size(); ++x) {
    if (attributes_[x].domain_size < 1) {
      throw Error(ErrorCode::kInvalidArgument,
                  "attribute " + attributes_[x].name + " has an empty domain");
    }
    for (std::size_t z = 0; z < x; ++z) {
      if (attributes_[z].name == attributes_[x].name) {
        throw Error(ErrorCode::kInvalidArgument,
                    "duplicate attribute name " + attributes_[x].name);
      }
    }
  }
  schema_sets_.clear();
  atoms_.assign(attributes_.size(), 0);
  for (std::size_t i = 0; i < schemas_.size(); ++i) {
    auto& schema = schemas_[i];
    if (schema.empty()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "relation " + std::to_string(i) + " has an empty schema");
    }
    AttributeSet set = 0;
    for (std::size_t x : schema) {
      if (x >= attributes_.size()) {
        throw Error(ErrorCode::kAttributeNotInSchema,
                    "relation " + std::to_string(i) + " names attribute #" +
                        std::to_string(x));
      }
      if (set & (AttributeSet{1} << x)) {
        throw Error(ErrorCode::kInvalidArgument,
                    "relation " + std::to_string(i) + " repeats attribute " +
                        attributes_[x].name);
      }
      set |= AttributeSet{1} << x;
      atoms_[x] |= Singleton(i);
    }
    std::sort(schema.begin(), schema.end());
    schema_sets_.push_back(set);
  }
  for (std::size_t x = 0; x < attributes_.size(); ++x) {
    if (atoms_[x] == 0) {
      throw Error(ErrorCode::kInvalidArgument,
                  "attribute " + attributes_[x].name +
                      " is not covered by any relation");
    }
  }
}

std::size_t JoinQuery::attribute_index(std::string_view name) const {
  for (std::size_t x = 0; x < attributes_.size(); ++x) {
    if (attributes_[x].name == name) return x;
  }
  throw Error(ErrorCode::kAttributeNotInSchema,
              "unknown attribute " + std::string(name));
}

AttributeSet JoinQuery::attribute_set(const std::vector<std::string>& names) const {
  AttributeSet set = 0;
  for (const auto& name : names) set |= AttributeSet{1} << attribute_index(name);
  return set;
}

RelationSet JoinQuery::all_relations() const {
  return schemas_.size() == 64 ? ~RelationSet{0}
                               : (RelationSet{1} << schemas_.size()) - 1;
}

AttributeSet JoinQuery::all_attributes() const {
  return attributes_.size() == 64 ? ~AttributeSet{0}
                                  : (AttributeSet{1} << attributes_.size()) - 1;
}

AttributeSet JoinQuery::union_of(RelationSet relations) const {
  AttributeSet out = 0;
  for (std::size_t i : Members(relations)) out |= schema_sets_.at(i);
  return out;
}

AttributeSet JoinQuery::intersection_of(RelationSet relations) const {
  if (relations == 0) return 0;
  AttributeSet out = all_attributes();
  for (std::size_t i : Members(relations)) out &= schema_sets_.at(i);
  return out;
}

AttributeSet JoinQuery::boundary(RelationSet relations) const {
  return union_of(relations) & union_of(all_relations() & ~relations);
}

std::vector<RelationSet> JoinQuery::components(RelationSet relations,
                                               AttributeSet removed) const {
  std::vector<RelationSet> out;
  RelationSet remaining = relations;
  while (remaining != 0) {
    RelationSet component = remaining & (~remaining + 1);
    AttributeSet reach = union_of(component) & ~removed;
    bool grew = true;
    while (grew) {
      grew = false;
      for (std::size_t j : Members(remaining & ~component)) {
        if (schema_sets_[j] & reach) {
          component |= Singleton(j);
          reach |= schema_sets_[j] & ~removed;
          grew = true;
        }
      }
    }
    out.push_back(component);
    remaining &= ~component;
  }
  return out;
}

std::uint64_t JoinQuery::relation_domain_size(std::size_t i) const {
  std::uint64_t size = 1;
  for (std::size_t x : schema(i)) {
    const std::uint64_t u = attributes_[x].domain_size;
    if (size > std::numeric_limits<std::uint64_t>::max() / u) {
      throw Error(ErrorCode::kDomainTooLarge,
                  "relation " + std::to_string(i) + " domain overflows 64 bits");
    }
    size *= u;
  }
  return size;
}

double JoinQuery::joined_domain_size() const {
  double size = 1.0;
  for (const auto& a : attributes_) size *= static_cast<double>(a.domain_size);
  return size;
}

std::uint64_t JoinQuery::relation_index(std::size_t i,
                                        std::span<const Value> tuple) const {
  const auto& s = schema(i);
  std::uint64_t index = 0;
  for (std::size_t p = 0; p < s.size(); ++p) {
    index = index * attributes_[s[p]].domain_size + tuple[p];
  }
  return index;
}

Tuple JoinQuery::relation_tuple(std::size_t i, std::uint64_t index) const {
  const auto& s = schema(i);
  Tuple t(s.size());
  for (std::size_t p = s.size(); p-- > 0;) {
    const std::uint64_t u = attributes_[s[p]].domain_size;
    t[p] = static_cast<Value>(index % u);
    index /= u;
  }
  return t;
}

std::string JoinQuery::attribute_names(AttributeSet set) const {
  std::string out;
  for (std::size_t x : Members(set)) {
    if (!out.empty()) out += ",";
    out += attributes_.at(x).name;
  }
  return out;
}

Tuple Project(std::span<const Value> tuple, AttributeSet from, AttributeSet to) {
  Tuple out;
  out.reserve(static_cast<std::size_t>(PopCount(to)));
  std::size_t p = 0;
  for (std::size_t x : Members(from)) {
    if (to & (AttributeSet{1} << x)) out.push_back(tuple[p]);
    ++p;
  }
  return out;
}

Tuple ProjectAssignment(std::span<const Value> assignment, AttributeSet to) {
  Tuple out;
  out.reserve(static_cast<std::size_t>(PopCount(to)));
  for (std::size_t x : Members(to)) out.push_back(assignment[x]);
  return out;
}

Frequency Relation::frequency(const Tuple& t) const {
  auto it = support_.find(t);
  return it == support_.end() ? 0 : it->second;
}

void Relation::add(const Tuple& t, Frequency delta) {
  if (delta == 0) return;
  auto it = support_.find(t);
  const Frequency current = it == support_.end() ? 0 : it->second;
  const Frequency next = current + delta;
  if (next < 0) {
    throw Error(ErrorCode::kInvalidArgument, "frequency would become negative");
  }
  if (next == 0) {
    support_.erase(it);
  } else if (it == support_.end()) {
    support_.emplace(t, next);
  } else {
    it->second = next;
  }
  total_ += delta;
}

Instance::Instance(JoinQuery query)
    : query_(std::move(query)), relations_(query_.num_relations()) {}

Instance::Instance(JoinQuery query, std::vector<Relation> relations)
    : query_(std::move(query)), relations_(std::move(relations)) {
  if (relations_.size() != query_.num_relations()) {
    throw Error(ErrorCode::kWrongArity,
                "instance has " + std::to_string(relations_.size()) +
                    " relations, query has " +
                    std::to_string(query_.num_relations()));
  }
  for (std::size_t i = 0; i < relations_.size(); ++i) {
    for (const auto& [t, f] : relations_[i].support()) {
      CheckTuple(i, t);
      if (f < 1) {
        throw Error(ErrorCode::kInvalidArgument, "non-positive frequency");
      }
    }
  }
}

void Instance::CheckTuple(std::size_t i, const Tuple& t) const {
  const auto& s = query_.schema(i);
  if (t.size() != s.size()) {
    throw Error(ErrorCode::kWrongArity,
                "tuple arity " + std::to_string(t.size()) + " for relation " +
                    std::to_string(i) + " of arity " + std::to_string(s.size()));
  }
  for (std::size_t p = 0; p < s.size(); ++p) {
    if (t[p] >= query_.attribute(s[p]).domain_size) {
      throw Error(ErrorCode::kInvalidArgument,
                  "value " + std::to_string(t[p]) + " outside dom(" +
                      query_.attribute(s[p]).name + ")");
    }
  }
}

void Instance::add(std::size_t i, const Tuple& t, Frequency delta) {
  if (i >= relations_.size()) {
    throw Error(ErrorCode::kWrongArity, "relation index out of range");
  }
  CheckTuple(i, t);
  relations_[i].add(t, delta);
}

Frequency Instance::input_size() const {
  Frequency n = 0;
  for (const auto& r : relations_) n += r.total();
  return n;
}

namespace {

struct TupleHash {
  std::size_t operator()(const Tuple& t) const noexcept {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ t.size();
    for (Value v : t) {
      h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
  }
};

struct Entry {
  const Tuple* tuple;
  Frequency frequency;
};

// One step of the backtracking join: relation `relation` is probed with the
// values of `key_positions` (positions in its schema that are already bound).
struct JoinStep {
  std::size_t relation;
  std::vector<std::size_t> key_positions;
  std::vector<std::size_t> key_attributes;
  std::vector<std::size_t> new_positions;
  std::vector<std::size_t> new_attributes;
  std::unordered_map<Tuple, std::vector<Entry>, TupleHash> index;
};

std::vector<JoinStep> PlanJoin(const Instance& instance, RelationSet relations) {
  const JoinQuery& q = instance.query();
  std::vector<JoinStep> steps;
  RelationSet pending = relations;
  AttributeSet bound = 0;
  while (pending != 0) {
    std::size_t best = 0;
    int best_shared = -1;
    std::size_t best_size = 0;
    for (std::size_t i : Members(pending)) {
      const int shared = PopCount(q.schema_set(i) & bound);
      const std::size_t size = instance.relation(i).size();
      const bool connected = shared > 0;
      const bool best_connected = best_shared > 0;
      if (best_shared < 0 || (connected && !best_connected) ||
          (connected == best_connected && size < best_size)) {
        best = i;
        best_shared = shared;
        best_size = size;
      }
    }
    JoinStep step;
    step.relation = best;
    const auto& schema = q.schema(best);
    for (std::size_t p = 0; p < schema.size(); ++p) {
      if (bound & (AttributeSet{1} << schema[p])) {
        step.key_positions.push_back(p);
        step.key_attributes.push_back(schema[p]);
      } else {
        step.new_positions.push_back(p);
        step.new_attributes.push_back(schema[p]);
      }
    }
    for (const auto& [t, f] : instance.relation(best).support()) {
      Tuple key;
      key.reserve(step.key_positions.size());
      for (std::size_t p : step.key_positions) key.push_back(t[p]);
      step.index[key].push_back(Entry{&t, f});
    }
    bound |= q.schema_set(best);
    pending &= ~Singleton(best);
    steps.push_back(std::move(step));
  }
  return steps;
}

void Descend(const std::vector<JoinStep>& steps, std::size_t depth,
             std::vector<Value>& assignment, Frequency frequency, Tuple& key,
             const std::function<void(std::span<const Value>, Frequency)>& visit) {
  if (depth == steps.size()) {
    visit(assignment, frequency);
    return;
  }
  const JoinStep& step = steps[depth];
  key.clear();
  for (std::size_t x : step.key_attributes) key.push_back(assignment[x]);
  auto it = step.index.find(key);
  if (it == step.index.end()) return;
  for (const Entry& e : it->second) {
    for (std::size_t k = 0; k < step.new_positions.size(); ++k) {
      assignment[step.new_attributes[k]] = (*e.tuple)[step.new_positions[k]];
    }
    Descend(steps, depth + 1, assignment, frequency * e.frequency, key, visit);
  }
}

}  // namespace

void VisitJoin(const Instance& instance, RelationSet relations,
               const std::function<void(std::span<const Value>, Frequency)>& visit) {
  std::vector<Value> assignment(instance.query().num_attributes(), 0);
  if (relations == 0) {
    visit(assignment, 1);
    return;
  }
  const auto steps = PlanJoin(instance, relations);
  Tuple key;
  Descend(steps, 0, assignment, 1, key, visit);
}

JoinTable join_relations(const Instance& instance, RelationSet relations,
                         std::size_t cap) {
  JoinTable table;
  table.attributes = instance.query().union_of(relations);
  VisitJoin(instance, relations, [&](std::span<const Value> a, Frequency f) {
    table.entries.emplace(ProjectAssignment(a, table.attributes), f);
    table.total += f;
    if (table.entries.size() > cap) {
      throw Error(ErrorCode::kSupportTooLarge,
                  "join support exceeds cap of " + std::to_string(cap) +
                      " entries");
    }
  });
  return table;
}

JoinTable join_materialize(const Instance& instance, std::size_t cap) {
  return join_relations(instance, instance.query().all_relations(), cap);
}

Frequency count(const Instance& instance) {
  Frequency total = 0;
  VisitJoin(instance, instance.query().all_relations(),
            [&](std::span<const Value>, Frequency f) { total += f; });
  return total;
}

Frequency degree(const Instance& instance, std::size_t i, AttributeSet y,
                 const Tuple& value) {
  const JoinQuery& q = instance.query();
  const AttributeSet schema = q.schema_set(i);
  if ((y & ~schema) != 0) {
    throw Error(ErrorCode::kAttributeNotInSchema,
                "{" + q.attribute_names(y & ~schema) + "} not in relation " +
                    std::to_string(i));
  }
  Frequency total = 0;
  for (const auto& [t, f] : instance.relation(i).support()) {
    if (Project(t, schema, y) == value) total += f;
  }
  return total;
}

std::map<Tuple, Frequency> degree_map(const Instance& instance, std::size_t i,
                                      AttributeSet y) {
  const JoinQuery& q = instance.query();
  const AttributeSet schema = q.schema_set(i);
  if ((y & ~schema) != 0) {
    throw Error(ErrorCode::kAttributeNotInSchema,
                "{" + q.attribute_names(y & ~schema) + "} not in relation " +
                    std::to_string(i));
  }
  std::map<Tuple, Frequency> out;
  for (const auto& [t, f] : instance.relation(i).support()) {
    out[Project(t, schema, y)] += f;
  }
  return out;
}

Frequency boundary_query(const Instance& instance, RelationSet relations,
                         std::size_t cap) {
  const JoinQuery& q = instance.query();
  if ((relations & ~q.all_relations()) != 0) {
    throw Error(ErrorCode::kInvalidArgument, "relation set out of range");
  }
  if (relations == 0) return 1;
  // Components of E share no attributes, so the boundary splits across them
  // and the maximum factorizes.
  Frequency product = 1;
  for (RelationSet component : q.components(relations)) {
    const AttributeSet boundary = q.boundary(component);
    std::unordered_map<Tuple, Frequency, TupleHash> groups;
    VisitJoin(instance, component, [&](std::span<const Value> a, Frequency f) {
      groups[ProjectAssignment(a, boundary)] += f;
      if (groups.size() > cap) {
        throw Error(ErrorCode::kSupportTooLarge,
                    "boundary groups exceed cap of " + std::to_string(cap));
      }
    });
    Frequency best = 0;
    for (const auto& [key, total] : groups) best = std::max(best, total);
    product *= best;
    if (product == 0) return 0;
  }
  return product;
}

Instance neighbor(const Instance& instance, std::uint64_t seed) {
  RngStream rng(seed, /*stream_id=*/0x6e65696768626f72ULL);
  const JoinQuery& q = instance.query();
  Instance out = instance;
  const std::size_t i = static_cast<std::size_t>(rng.uniform_index(q.num_relations()));
  const Relation& r = instance.relation(i);
  const bool remove = !r.empty() && rng.uniform_index(2) == 0;
  if (remove) {
    auto it = r.support().begin();
    std::advance(it, static_cast<std::ptrdiff_t>(rng.uniform_index(r.size())));
    out.add(i, it->first, -1);
  } else {
    Tuple t;
    for (std::size_t x : q.schema(i)) {
      t.push_back(static_cast<Value>(rng.uniform_index(q.attribute(x).domain_size)));
    }
    out.add(i, t, +1);
  }
  return out;
}

}  // namespace joinsynth
