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

#ifndef JOINSYNTH_RELATIONAL_HPP_
#define JOINSYNTH_RELATIONAL_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace joinsynth {

using Value = std::uint32_t;
// Tuples over an attribute set list values in ascending attribute-index order.
using Tuple = std::vector<Value>;
using Frequency = std::int64_t;
// Bitmasks over relation indices and attribute indices respectively.
using RelationSet = std::uint64_t;
using AttributeSet = std::uint64_t;

inline constexpr std::size_t kDefaultSupportCap = std::size_t{1} << 22;
inline constexpr std::size_t kMaxRelations = 64;
inline constexpr std::size_t kMaxAttributes = 64;

constexpr RelationSet Singleton(std::size_t i) { return RelationSet{1} << i; }
int PopCount(std::uint64_t mask);
std::vector<std::size_t> Members(std::uint64_t mask);

struct Attribute {
  std::string name;
  std::uint32_t domain_size = 1;

  bool operator==(const Attribute&) const = default;
};

// Hypergraph join schema. Every attribute has a dense domain {0, ..., u-1} and
// must be covered by at least one relation. Relation schemas are stored in
// ascending attribute-index order regardless of the order they were given in.
class JoinQuery {
 public:
  JoinQuery() = default;
  JoinQuery(std::vector<Attribute> attributes,
            const std::vector<std::vector<std::string>>& relations);
  JoinQuery(std::vector<Attribute> attributes,
            std::vector<std::vector<std::size_t>> relations);

  std::size_t num_attributes() const { return attributes_.size(); }
  std::size_t num_relations() const { return schemas_.size(); }
  const std::vector<Attribute>& attributes() const { return attributes_; }
  const Attribute& attribute(std::size_t x) const { return attributes_.at(x); }
  std::size_t attribute_index(std::string_view name) const;
  AttributeSet attribute_set(const std::vector<std::string>& names) const;

  const std::vector<std::size_t>& schema(std::size_t i) const {
    return schemas_.at(i);
  }
  AttributeSet schema_set(std::size_t i) const { return schema_sets_.at(i); }

  RelationSet all_relations() const;
  AttributeSet all_attributes() const;
  RelationSet atom(std::size_t x) const { return atoms_.at(x); }
  AttributeSet union_of(RelationSet relations) const;
  AttributeSet intersection_of(RelationSet relations) const;
  // Attributes belonging to relations both inside and outside `relations`.
  AttributeSet boundary(RelationSet relations) const;
  // Splits a relation set into components connected by shared attributes
  // outside `removed`.
  std::vector<RelationSet> components(RelationSet relations,
                                      AttributeSet removed = 0) const;

  std::uint64_t relation_domain_size(std::size_t i) const;
  // Product of all attribute domain sizes; may exceed 2^64, hence double.
  double joined_domain_size() const;
  // Dense row-major index of a tuple over relation i's schema.
  std::uint64_t relation_index(std::size_t i, std::span<const Value> tuple) const;
  Tuple relation_tuple(std::size_t i, std::uint64_t index) const;

  std::string attribute_names(AttributeSet set) const;

  bool operator==(const JoinQuery&) const = default;

 private:
  void Validate();

  std::vector<Attribute> attributes_;
  std::vector<std::vector<std::size_t>> schemas_;
  std::vector<AttributeSet> schema_sets_;
  std::vector<RelationSet> atoms_;
};

// Projects `tuple` (over attribute set `from`) onto `to`, which must be a
// subset of `from`.
Tuple Project(std::span<const Value> tuple, AttributeSet from, AttributeSet to);
// Projects a full assignment (indexed by attribute) onto `to`.
Tuple ProjectAssignment(std::span<const Value> assignment, AttributeSet to);

class Relation {
 public:
  using Support = std::map<Tuple, Frequency>;

  const Support& support() const { return support_; }
  Frequency frequency(const Tuple& t) const;
  // Adds `delta` to t's frequency; zero-frequency tuples are erased. Throws if
  // the result would be negative.
  void add(const Tuple& t, Frequency delta);
  Frequency total() const { return total_; }
  std::size_t size() const { return support_.size(); }
  bool empty() const { return support_.empty(); }

  bool operator==(const Relation&) const = default;

 private:
  Support support_;
  Frequency total_ = 0;
};

class Instance {
 public:
  Instance() = default;
  explicit Instance(JoinQuery query);
  Instance(JoinQuery query, std::vector<Relation> relations);

  const JoinQuery& query() const { return query_; }
  std::size_t num_relations() const { return relations_.size(); }
  const Relation& relation(std::size_t i) const { return relations_.at(i); }
  const std::vector<Relation>& relations() const { return relations_; }

  // Construction-time mutation; validates arity and domains.
  void add(std::size_t i, const Tuple& t, Frequency delta = 1);

  // n: the sum of all frequencies.
  Frequency input_size() const;

  bool operator==(const Instance&) const = default;

 private:
  void CheckTuple(std::size_t i, const Tuple& t) const;

  JoinQuery query_;
  std::vector<Relation> relations_;
};

// A (sub-)join result keyed by tuples over `attributes`.
struct JoinTable {
  AttributeSet attributes = 0;
  std::map<Tuple, Frequency> entries;
  Frequency total = 0;
};

// Streams every joinable combination of the relations in `relations`. The
// callback receives a full-width assignment vector (only attributes of the
// union are meaningful) and the product frequency.
void VisitJoin(const Instance& instance, RelationSet relations,
               const std::function<void(std::span<const Value>, Frequency)>& visit);

JoinTable join_materialize(const Instance& instance,
                           std::size_t cap = kDefaultSupportCap);
JoinTable join_relations(const Instance& instance, RelationSet relations,
                         std::size_t cap = kDefaultSupportCap);

Frequency count(const Instance& instance);

Frequency degree(const Instance& instance, std::size_t i, AttributeSet y,
                 const Tuple& value);
// Degrees of every value of y with positive degree in relation i.
std::map<Tuple, Frequency> degree_map(const Instance& instance, std::size_t i,
                                      AttributeSet y);

// T_E: maximum over assignments of the boundary attributes of the semi-joined
// sub-join size. T of the empty set is 1.
Frequency boundary_query(const Instance& instance, RelationSet relations,
                         std::size_t cap = kDefaultSupportCap);

// One +-1 frequency edit at one tuple of one relation, chosen by `seed`.
Instance neighbor(const Instance& instance, std::uint64_t seed);

}  // namespace joinsynth

#endif  // JOINSYNTH_RELATIONAL_HPP_
