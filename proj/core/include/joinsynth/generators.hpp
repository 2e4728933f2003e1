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

#ifndef JOINSYNTH_GENERATORS_HPP_
#define JOINSYNTH_GENERATORS_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "joinsynth/query.hpp"
#include "joinsynth/relational.hpp"

namespace joinsynth {

struct SingleTable {
  std::vector<Frequency> frequency;  // T(a) for a in [0, domain_size)

  std::uint32_t domain_size() const {
    return static_cast<std::uint32_t>(frequency.size());
  }
  Frequency n() const;
  double answer(std::span<const double> q) const;
};

struct GeneratedInstance {
  Instance instance;
  Frequency count = 0;
  Frequency local_sensitivity = 0;
  // |D| of the construction before slicing to the reachable support.
  double nominal_domain_size = 0.0;
  std::string description;
};

double f_lower(double domain_size, double epsilon);
double f_upper(double domain_size, double family_size, double epsilon, double delta);
double error_envelope_two_table(double count, double delta, double lambda, double f_upper);

// Two-table construction R1(A, B) x R2(B, C): dom(A) = T's domain, B holds one
// value per unit of T's mass, dom(C) = delta.
GeneratedInstance gen_two_table_lb(const SingleTable& table, std::uint32_t delta);

// Encodes T into the smallest relation x_1 (diagonal over its attributes); the
// other relations are all-ones over dom(y) = [r] with r^k <= delta for the
// k attributes outside x_1. The achieved delta r^k is reported as the LS.
GeneratedInstance gen_multi_table_lb(const JoinQuery& query, const SingleTable& table,
                                     std::uint64_t delta);

GeneratedInstance gen_staircase(std::uint32_t sqrt_n);

// k must be a power of 8.
GeneratedInstance gen_gap(std::uint64_t k);

// One independent two-table block per (bucket, OUT) entry with degree in
// (lambda 2^(i-1), lambda 2^i] dividing OUT.
GeneratedInstance gen_bucket_conforming(const std::vector<std::pair<int, Frequency>>& out,
                                        double lambda);

// q' = (q o pi_A, all-ones) on a gen_two_table_lb instance.
LinearQuery lift_two_table_query(const JoinQuery& query, std::span<const double> q);
// q' = (q o pi_x, all-ones, ...) with x the first attribute of the encoding
// relation, on a gen_multi_table_lb instance.
LinearQuery lift_multi_table_query(const GeneratedInstance& generated,
                                   const SingleTable& table, std::span<const double> q);

// Index of the relation that encodes T in gen_multi_table_lb.
std::size_t encoding_relation(const JoinQuery& query);

}  // namespace joinsynth

#endif  // JOINSYNTH_GENERATORS_HPP_
