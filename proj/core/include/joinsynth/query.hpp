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

#ifndef JOINSYNTH_QUERY_HPP_
#define JOINSYNTH_QUERY_HPP_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "joinsynth/relational.hpp"
#include "joinsynth/synthetic.hpp"

namespace joinsynth {

// Factored query q = (q_1, ..., q_m) with dense weights over each relation
// domain D_i, indexed by JoinQuery::relation_index.
class LinearQuery {
 public:
  LinearQuery() = default;
  LinearQuery(const JoinQuery& query, std::vector<std::vector<double>> weights);

  std::size_t num_relations() const { return weights_.size(); }
  std::span<const double> weights(std::size_t i) const { return weights_.at(i); }
  double weight(const JoinQuery& query, std::size_t i, std::span<const Value> t) const;

  // Multiplies relation i's factor by -1.
  LinearQuery negated(std::size_t i) const;

  bool operator==(const LinearQuery&) const = default;

 private:
  std::vector<std::vector<double>> weights_;
};

struct QueryFamily {
  std::vector<LinearQuery> queries;
  std::string label;

  std::size_t size() const { return queries.size(); }
};

LinearQuery counting_query(const JoinQuery& query);

// `size` queries with i.i.d. +-1 weights. With include_counting the first
// query is the counting query.
QueryFamily random_sign_family(const JoinQuery& query, std::size_t size,
                               std::uint64_t seed, bool include_counting = false);

// Half-open interval [lo, hi) over one attribute.
struct Interval {
  Value lo = 0;
  Value hi = 0;
};

// One query per element of the cartesian product of the per-attribute
// interval lists. Attributes without a list span their full domain.
QueryFamily interval_family(
    const JoinQuery& query,
    const std::vector<std::pair<std::string, std::vector<Interval>>>& intervals);

double eval_join(const LinearQuery& q, const JoinQuery& query, const JoinTable& join);
double eval_instance(const LinearQuery& q, const Instance& instance,
                     std::size_t cap = kDefaultSupportCap);
double eval_synthetic(const LinearQuery& q, const SyntheticDistribution& f);

struct MaxError {
  double value = 0.0;
  std::size_t index = 0;
};

MaxError max_error(const QueryFamily& family, const Instance& instance,
                   const SyntheticDistribution& f);

// Family specification as stored in config files:
//   {"kind": "counting"}
//   {"kind": "random_sign", "size": 64, "seed": 7, "include_counting": false}
//   {"kind": "interval", "intervals": {"A": [[0, 2], [2, 4]], ...}}
struct FamilySpec {
  std::string kind = "random_sign";
  std::size_t size = 64;
  std::uint64_t seed = 0;
  bool include_counting = false;
  std::vector<std::pair<std::string, std::vector<Interval>>> intervals;
};

FamilySpec parse_family_spec(std::string_view json_text);
std::string family_spec_to_json(const FamilySpec& spec);
QueryFamily build_family(const JoinQuery& query, const FamilySpec& spec);

// Evaluates every query of a family against masses on a joined domain. Weights
// are stored transposed (one |Q|-long row per relation tuple) so all answers
// for a cell come from m contiguous rows.
class FamilyEvaluator {
 public:
  FamilyEvaluator(std::shared_ptr<const JoinedDomain> domain,
                  const QueryFamily& family);

  std::size_t size() const { return size_; }
  const JoinedDomain& domain() const { return *domain_; }
  const std::shared_ptr<const JoinedDomain>& shared_domain() const { return domain_; }

  // answers[j] = sum_x mass[x] * q_j(x).
  std::vector<double> evaluate(std::span<const double> mass) const;
  // As above over a sparse list of (cell, mass) pairs.
  std::vector<double> evaluate_sparse(
      std::span<const std::pair<std::size_t, double>> cells) const;
  // out[x] = q_j(x) for every cell.
  void cell_weights(std::size_t j, std::span<double> out) const;
  double cell_weight(std::size_t j, std::size_t cell) const;

 private:
  std::shared_ptr<const JoinedDomain> domain_;
  std::size_t size_ = 0;
  std::vector<std::vector<double>> tables_;
};

}  // namespace joinsynth

#endif  // JOINSYNTH_QUERY_HPP_
