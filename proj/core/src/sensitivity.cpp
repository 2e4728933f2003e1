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

#include "joinsynth/sensitivity.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "joinsynth/error.hpp"

namespace joinsynth {

namespace {

void CheckBeta(double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw Error(ErrorCode::kInvalidArgument, "beta must be positive");
  }
}

// Calls visit(s) for every vector of non-negative integers over `parts`
// positions summing to `total`.
template <typename Visit>
void ForEachComposition(std::vector<long>& s, const std::vector<std::size_t>& parts,
                        std::size_t at, long total, Visit&& visit) {
  if (at + 1 == parts.size()) {
    s[parts[at]] = total;
    visit(s);
    s[parts[at]] = 0;
    return;
  }
  for (long v = 0; v <= total; ++v) {
    s[parts[at]] = v;
    ForEachComposition(s, parts, at + 1, total - v, visit);
  }
  s[parts[at]] = 0;
}

}  // namespace

Frequency local_sensitivity(const Instance& instance) {
  const JoinQuery& q = instance.query();
  if (q.num_relations() == 1) return 1;
  Frequency best = 0;
  for (std::size_t i = 0; i < q.num_relations(); ++i) {
    best = std::max(best, boundary_query(instance, q.all_relations() & ~Singleton(i)));
  }
  return best;
}

int residual_k_max(std::size_t num_relations, double beta) {
  CheckBeta(beta);
  const double m = static_cast<double>(num_relations);
  return static_cast<int>(std::ceil(m / beta)) + static_cast<int>(num_relations);
}

ResidualValue residual_from_boundary_values(std::size_t num_relations,
                                            const std::vector<double>& t_values,
                                            double beta) {
  CheckBeta(beta);
  const std::size_t m = num_relations;
  if (m == 0 || m > 20 || t_values.size() < (std::size_t{1} << m)) {
    throw Error(ErrorCode::kInvalidArgument, "bad boundary-value table");
  }
  const RelationSet all = (RelationSet{1} << m) - 1;
  const int k_max = residual_k_max(m, beta);
  ResidualValue best{-1.0, 0};
  std::vector<long> s(m, 0);
  for (int k = 0; k <= k_max; ++k) {
    double lhat = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const RelationSet rest = all & ~Singleton(i);
      std::vector<std::size_t> parts = Members(rest);
      auto evaluate = [&](const std::vector<long>& comp) {
        double sum = 0.0;
        // Enumerate E' subset of rest in increasing bitmask order.
        RelationSet sub = 0;
        while (true) {
          double product = 1.0;
          for (RelationSet bits = sub; bits != 0; bits &= bits - 1) {
            product *= static_cast<double>(comp[static_cast<std::size_t>(std::countr_zero(bits))]);
          }
          sum += t_values[rest & ~sub] * product;
          if (sub == rest) break;
          sub = (sub - rest) & rest;
        }
        lhat = std::max(lhat, sum);
      };
      if (parts.empty()) {
        // m == 1: only E' = {} contributes T_{} = 1.
        evaluate(s);
      } else {
        ForEachComposition(s, parts, 0, k, evaluate);
      }
    }
    const double value = std::exp(-beta * static_cast<double>(k)) * lhat;
    if (value > best.value) best = ResidualValue{value, k};
  }
  return best;
}

std::vector<double> proper_boundary_values(const Instance& instance) {
  const JoinQuery& q = instance.query();
  const std::size_t m = q.num_relations();
  if (m > 20) {
    throw Error(ErrorCode::kInvalidArgument, "too many relations to enumerate");
  }
  const RelationSet all = q.all_relations();
  std::vector<double> t(std::size_t{1} << m, 0.0);
  for (RelationSet e = 0; e < all; ++e) {
    t[e] = static_cast<double>(boundary_query(instance, e));
  }
  return t;
}

SensitivityReport residual_sensitivity(const Instance& instance, double beta) {
  CheckBeta(beta);
  SensitivityReport report;
  report.beta = beta;
  report.local = local_sensitivity(instance);
  const auto t = proper_boundary_values(instance);
  const RelationSet all = instance.query().all_relations();
  for (RelationSet e = 0; e < all; ++e) report.per_E[e] = t[e];
  const ResidualValue rs =
      residual_from_boundary_values(instance.query().num_relations(), t, beta);
  report.residual = rs.value;
  report.k_star = rs.k_star;
  return report;
}

double residual_sensitivity_two_table_fast(const Instance& instance, double beta) {
  CheckBeta(beta);
  if (instance.query().num_relations() != 2) {
    throw Error(ErrorCode::kWrongArity,
                "two-table closed form needs exactly 2 relations, got " +
                    std::to_string(instance.query().num_relations()));
  }
  const double delta = static_cast<double>(local_sensitivity(instance));
  const int k_max = residual_k_max(2, beta);
  double best = -1.0;
  for (int k = 0; k <= k_max; ++k) {
    const double lhat = delta + static_cast<double>(k);
    best = std::max(best, std::exp(-beta * static_cast<double>(k)) * lhat);
  }
  return best;
}

}  // namespace joinsynth
