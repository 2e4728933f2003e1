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

#ifndef JOINSYNTH_SENSITIVITY_HPP_
#define JOINSYNTH_SENSITIVITY_HPP_

#include <cstddef>
#include <map>
#include <vector>

#include "joinsynth/relational.hpp"

namespace joinsynth {

struct SensitivityReport {
  Frequency local = 0;
  double residual = 0.0;
  double beta = 0.0;
  int k_star = 0;
  // T_E for every proper subset E of the relations (T of the empty set is 1).
  std::map<RelationSet, double> per_E;
};

// LS_count = max_i T_{[m] \ {i}}; defined as 1 for single-relation queries.
Frequency local_sensitivity(const Instance& instance);

struct ResidualValue {
  double value = 0.0;
  int k_star = 0;
};

// Largest k examined. Beyond k > (m-1)/beta every term e^{-beta k} LS^k is
// smaller than its predecessor: LS^k is a maximum of polynomials in k of
// degree <= m-1 with non-negative coefficients, so LS^{k+1}/LS^k <=
// ((k+1)/k)^{m-1} < e^{beta}.
int residual_k_max(std::size_t num_relations, double beta);

// Evaluates max_k e^{-beta k} max_s max_i sum_{E' subset [m]\{i}}
// T_{[m]\{i}\E'} prod_{j in E'} s_j from a table of boundary values indexed by
// relation bitmask. Compositions put zero on the excluded relation i, which is
// exact: the sum does not depend on s_i and is non-decreasing in every s_j.
ResidualValue residual_from_boundary_values(std::size_t num_relations,
                                            const std::vector<double>& t_values,
                                            double beta);

// Boundary values T_E for every proper subset E (index = bitmask).
std::vector<double> proper_boundary_values(const Instance& instance);

SensitivityReport residual_sensitivity(const Instance& instance, double beta);

// Closed form for two relations: LS^k = Delta + k.
double residual_sensitivity_two_table_fast(const Instance& instance, double beta);

}  // namespace joinsynth

#endif  // JOINSYNTH_SENSITIVITY_HPP_
