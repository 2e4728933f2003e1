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

#include "joinsynth/query.hpp"

#include <cmath>
#include <utility>

#include "joinsynth/error.hpp"
#include "joinsynth/noise.hpp"
#include "json.hpp"

namespace joinsynth {

namespace {

constexpr std::uint64_t kFamilyStream = 0x66616d696c79;  // "family"

std::uint64_t IndexFromAssignment(const JoinQuery& query, std::size_t i,
                                  std::span<const Value> assignment) {
  std::uint64_t r = 0;
  for (std::size_t x : query.schema(i)) {
    r = r * query.attribute(x).domain_size + assignment[x];
  }
  return r;
}

}  // namespace

LinearQuery::LinearQuery(const JoinQuery& query,
                         std::vector<std::vector<double>> weights)
    : weights_(std::move(weights)) {
  if (weights_.size() != query.num_relations()) {
    throw Error(ErrorCode::kWrongArity, "query has " +
                                            std::to_string(weights_.size()) +
                                            " factors for " +
                                            std::to_string(query.num_relations()) +
                                            " relations");
  }
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    if (weights_[i].size() != query.relation_domain_size(i)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "factor " + std::to_string(i) + " does not cover D_i");
    }
    for (double w : weights_[i]) {
      if (!(std::fabs(w) <= 1.0)) {
        throw Error(ErrorCode::kInvalidArgument, "weights must lie in [-1, 1]");
      }
    }
  }
}

double LinearQuery::weight(const JoinQuery& query, std::size_t i,
                           std::span<const Value> t) const {
  return weights_.at(i)[query.relation_index(i, t)];
}

LinearQuery LinearQuery::negated(std::size_t i) const {
  LinearQuery q = *this;
  for (double& w : q.weights_.at(i)) w = -w;
  return q;
}

LinearQuery counting_query(const JoinQuery& query) {
  std::vector<std::vector<double>> w;
  for (std::size_t i = 0; i < query.num_relations(); ++i) {
    w.emplace_back(query.relation_domain_size(i), 1.0);
  }
  return LinearQuery(query, std::move(w));
}

QueryFamily random_sign_family(const JoinQuery& query, std::size_t size,
                               std::uint64_t seed, bool include_counting) {
  if (size == 0) throw Error(ErrorCode::kDegenerateFamily, "family size must be >= 1");
  QueryFamily family;
  family.label = "random_sign";
  RngStream rng(seed, kFamilyStream);
  for (std::size_t j = 0; j < size; ++j) {
    if (j == 0 && include_counting) {
      family.queries.push_back(counting_query(query));
      continue;
    }
    std::vector<std::vector<double>> w;
    for (std::size_t i = 0; i < query.num_relations(); ++i) {
      auto& row = w.emplace_back(query.relation_domain_size(i));
      for (double& v : row) v = (rng.next_u64() >> 63) ? 1.0 : -1.0;
    }
    family.queries.emplace_back(query, std::move(w));
  }
  return family;
}

QueryFamily interval_family(
    const JoinQuery& query,
    const std::vector<std::pair<std::string, std::vector<Interval>>>& intervals) {
  std::vector<std::size_t> attrs;
  for (const auto& [name, list] : intervals) {
    const std::size_t x = query.attribute_index(name);
    if (list.empty()) {
      throw Error(ErrorCode::kBadInterval, "empty interval list for " + name);
    }
    for (const Interval& iv : list) {
      if (iv.lo > iv.hi || iv.hi > query.attribute(x).domain_size) {
        throw Error(ErrorCode::kBadInterval,
                    "[" + std::to_string(iv.lo) + ", " + std::to_string(iv.hi) +
                        ") is not within dom(" + name + ")");
      }
    }
    attrs.push_back(x);
  }

  QueryFamily family;
  family.label = "interval";
  std::vector<std::size_t> pick(intervals.size(), 0);
  while (true) {
    std::vector<Interval> box(query.num_attributes());
    for (std::size_t x = 0; x < box.size(); ++x) {
      box[x] = {0, query.attribute(x).domain_size};
    }
    for (std::size_t p = 0; p < attrs.size(); ++p) {
      box[attrs[p]] = intervals[p].second[pick[p]];
    }
    std::vector<std::vector<double>> w;
    for (std::size_t i = 0; i < query.num_relations(); ++i) {
      const std::uint64_t size = query.relation_domain_size(i);
      auto& row = w.emplace_back(size, 0.0);
      for (std::uint64_t r = 0; r < size; ++r) {
        const Tuple t = query.relation_tuple(i, r);
        bool inside = true;
        for (std::size_t p = 0; p < t.size() && inside; ++p) {
          const Interval& iv = box[query.schema(i)[p]];
          inside = t[p] >= iv.lo && t[p] < iv.hi;
        }
        row[r] = inside ? 1.0 : 0.0;
      }
    }
    family.queries.emplace_back(query, std::move(w));

    std::size_t p = pick.size();
    while (p > 0) {
      --p;
      if (++pick[p] < intervals[p].second.size()) break;
      pick[p] = 0;
      if (p == 0) return family;
    }
    if (pick.empty()) return family;
  }
}

double eval_join(const LinearQuery& q, const JoinQuery& query, const JoinTable& join) {
  if (q.num_relations() != query.num_relations()) {
    throw Error(ErrorCode::kWrongArity, "query arity does not match the join");
  }
  if (join.attributes != query.all_attributes()) {
    throw Error(ErrorCode::kInvalidArgument, "join table is not a full join");
  }
  double total = 0.0;
  for (const auto& [t, f] : join.entries) {
    double product = static_cast<double>(f);
    for (std::size_t i = 0; i < query.num_relations() && product != 0.0; ++i) {
      product *= q.weights(i)[IndexFromAssignment(query, i, t)];
    }
    total += product;
  }
  return total;
}

double eval_instance(const LinearQuery& q, const Instance& instance, std::size_t cap) {
  return eval_join(q, instance.query(), join_materialize(instance, cap));
}

double eval_synthetic(const LinearQuery& q, const SyntheticDistribution& f) {
  const JoinedDomain& d = f.domain();
  const JoinQuery& query = d.query();
  if (q.num_relations() != query.num_relations()) {
    throw Error(ErrorCode::kWrongArity, "query arity does not match the domain");
  }
  double total = 0.0;
  for (std::size_t cell = 0; cell < d.size(); ++cell) {
    const double mass = f.mass(cell);
    if (mass == 0.0) continue;
    double product = mass;
    for (std::size_t i = 0; i < query.num_relations(); ++i) {
      product *= q.weights(i)[d.relation_index(i, cell)];
    }
    total += product;
  }
  return total;
}

MaxError max_error(const QueryFamily& family, const Instance& instance,
                   const SyntheticDistribution& f) {
  if (family.queries.empty()) {
    throw Error(ErrorCode::kDegenerateFamily, "empty query family");
  }
  const JoinTable join = join_materialize(instance);
  FamilyEvaluator evaluator(f.shared_domain(), family);
  std::vector<std::pair<std::size_t, double>> cells;
  cells.reserve(join.entries.size());
  for (const auto& [t, freq] : join.entries) {
    cells.emplace_back(f.domain().cell_of(t), static_cast<double>(freq));
  }
  const std::vector<double> truth = evaluator.evaluate_sparse(cells);
  const std::vector<double> released = evaluator.evaluate(f.mass());
  MaxError best;
  for (std::size_t j = 0; j < truth.size(); ++j) {
    const double e = std::fabs(truth[j] - released[j]);
    if (j == 0 || e > best.value) best = {e, j};
  }
  return best;
}

FamilySpec parse_family_spec(std::string_view json_text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(json_text.begin(), json_text.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParseError, std::string("family spec: ") + e.what());
  }
  FamilySpec spec;
  try {
    spec.kind = doc.at("kind").get<std::string>();
    if (spec.kind == "random_sign") {
      spec.size = doc.value("size", spec.size);
      spec.seed = doc.value("seed", spec.seed);
      spec.include_counting = doc.value("include_counting", false);
    } else if (spec.kind == "interval") {
      for (const auto& [name, list] : doc.at("intervals").items()) {
        auto& entry = spec.intervals.emplace_back(name, std::vector<Interval>{});
        for (const auto& pair : list) {
          entry.second.push_back({pair.at(0).get<Value>(), pair.at(1).get<Value>()});
        }
      }
    } else if (spec.kind != "counting") {
      throw Error(ErrorCode::kParseError, "unknown family kind \"" + spec.kind + "\"");
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("family spec: ") + e.what());
  }
  return spec;
}

std::string family_spec_to_json(const FamilySpec& spec) {
  nlohmann::json doc;
  doc["kind"] = spec.kind;
  if (spec.kind == "random_sign") {
    doc["size"] = spec.size;
    doc["seed"] = spec.seed;
    doc["include_counting"] = spec.include_counting;
  } else if (spec.kind == "interval") {
    nlohmann::json intervals = nlohmann::json::object();
    for (const auto& [name, list] : spec.intervals) {
      auto& arr = intervals[name] = nlohmann::json::array();
      for (const Interval& iv : list) arr.push_back({iv.lo, iv.hi});
    }
    doc["intervals"] = intervals;
  }
  return doc.dump();
}

QueryFamily build_family(const JoinQuery& query, const FamilySpec& spec) {
  if (spec.kind == "counting") {
    return QueryFamily{{counting_query(query)}, "counting"};
  }
  if (spec.kind == "random_sign") {
    return random_sign_family(query, spec.size, spec.seed, spec.include_counting);
  }
  if (spec.kind == "interval") return interval_family(query, spec.intervals);
  throw Error(ErrorCode::kInvalidArgument, "unknown family kind \"" + spec.kind + "\"");
}

FamilyEvaluator::FamilyEvaluator(std::shared_ptr<const JoinedDomain> domain,
                                 const QueryFamily& family)
    : domain_(std::move(domain)), size_(family.queries.size()) {
  if (size_ == 0) throw Error(ErrorCode::kDegenerateFamily, "empty query family");
  const JoinQuery& query = domain_->query();
  for (std::size_t i = 0; i < query.num_relations(); ++i) {
    const std::uint64_t dom = query.relation_domain_size(i);
    auto& table = tables_.emplace_back(dom * size_);
    for (std::size_t j = 0; j < size_; ++j) {
      const LinearQuery& q = family.queries[j];
      if (q.num_relations() != query.num_relations()) {
        throw Error(ErrorCode::kWrongArity, "query arity does not match the domain");
      }
      const auto w = q.weights(i);
      for (std::uint64_t r = 0; r < dom; ++r) table[r * size_ + j] = w[r];
    }
  }
}

std::vector<double> FamilyEvaluator::evaluate(std::span<const double> mass) const {
  const std::size_t q = size_;
  const std::size_t m = tables_.size();
  std::vector<double> answers(q, 0.0);
  std::vector<double> row(q);
  double* acc = answers.data();
  double* tmp = row.data();
  for (std::size_t cell = 0; cell < domain_->size(); ++cell) {
    const double f = mass[cell];
    if (f == 0.0) continue;
    const double* w0 = tables_[0].data() + domain_->relation_index(0, cell) * q;
    if (m == 1) {
      for (std::size_t j = 0; j < q; ++j) acc[j] += f * w0[j];
      continue;
    }
    const double* w1 = tables_[1].data() + domain_->relation_index(1, cell) * q;
    if (m == 2) {
      for (std::size_t j = 0; j < q; ++j) acc[j] += f * (w0[j] * w1[j]);
      continue;
    }
    for (std::size_t j = 0; j < q; ++j) tmp[j] = w0[j] * w1[j];
    for (std::size_t i = 2; i < m; ++i) {
      const double* wi = tables_[i].data() + domain_->relation_index(i, cell) * q;
      for (std::size_t j = 0; j < q; ++j) tmp[j] *= wi[j];
    }
    for (std::size_t j = 0; j < q; ++j) acc[j] += f * tmp[j];
  }
  return answers;
}

std::vector<double> FamilyEvaluator::evaluate_sparse(
    std::span<const std::pair<std::size_t, double>> cells) const {
  std::vector<double> answers(size_, 0.0);
  for (const auto& [cell, f] : cells) {
    for (std::size_t j = 0; j < size_; ++j) answers[j] += f * cell_weight(j, cell);
  }
  return answers;
}

double FamilyEvaluator::cell_weight(std::size_t j, std::size_t cell) const {
  double w = 1.0;
  for (std::size_t i = 0; i < tables_.size(); ++i) {
    w *= tables_[i][domain_->relation_index(i, cell) * size_ + j];
  }
  return w;
}

void FamilyEvaluator::cell_weights(std::size_t j, std::span<double> out) const {
  for (std::size_t cell = 0; cell < domain_->size(); ++cell) {
    out[cell] = cell_weight(j, cell);
  }
}

}  // namespace joinsynth
