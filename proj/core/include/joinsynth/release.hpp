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

#ifndef JOINSYNTH_RELEASE_HPP_
#define JOINSYNTH_RELEASE_HPP_

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "joinsynth/noise.hpp"
#include "joinsynth/pmw.hpp"
#include "joinsynth/query.hpp"
#include "joinsynth/relational.hpp"
#include "joinsynth/synthetic.hpp"

namespace joinsynth {

struct ReleaseOptions {
  std::optional<int> iterations;
  // |D| for the PMW iteration formula when the instantiated domain is a slice.
  std::optional<double> nominal_domain_size;
  std::size_t cap = kDefaultSupportCap;
};

struct ReleaseReport {
  std::string pipeline;
  std::string label;
  SyntheticDistribution synthetic;
  double epsilon = 0.0;
  double delta = 0.0;
  double epsilon_spent = 0.0;
  double delta_spent = 0.0;
  // Sensitivity before noise (LS or RS^beta) and the noisy bound given to PMW.
  double sensitivity = 0.0;
  double delta_tilde_used = 0.0;
  double beta = 0.0;
  double n_hat = 0.0;
  int iterations = 0;
  double epsilon_prime = 0.0;
  std::size_t clipped = 0;
  std::size_t max_multiplicity = 1;
  std::vector<std::pair<std::string, int>> configuration;
  std::vector<ReleaseReport> sub_reports;
};

std::string report_to_json(const ReleaseReport& report, int indent = 2);

ReleaseReport release_two_table(const Instance& instance, const FamilyEvaluator& evaluator,
                                const PrivacyParams& params, RngStream& rng,
                                const ReleaseOptions& options = {});
ReleaseReport release_multi_table(const Instance& instance,
                                  const FamilyEvaluator& evaluator,
                                  const PrivacyParams& params, RngStream& rng,
                                  const ReleaseOptions& options = {});
ReleaseReport release_uniformized_two_table(const Instance& instance,
                                            const FamilyEvaluator& evaluator,
                                            const PrivacyParams& params, RngStream& rng,
                                            const ReleaseOptions& options = {});

// Convenience overloads that build the joined domain and evaluator.
ReleaseReport release_two_table(const Instance& instance, const QueryFamily& family,
                                const PrivacyParams& params, RngStream& rng,
                                const ReleaseOptions& options = {});
ReleaseReport release_multi_table(const Instance& instance, const QueryFamily& family,
                                  const PrivacyParams& params, RngStream& rng,
                                  const ReleaseOptions& options = {});
ReleaseReport release_uniformized_two_table(const Instance& instance,
                                            const QueryFamily& family,
                                            const PrivacyParams& params, RngStream& rng,
                                            const ReleaseOptions& options = {});

// max{1, ceil(log2(noisy_degree / lambda))}: bucket i covers
// (lambda * 2^(i-1), lambda * 2^i]. Non-positive degrees map to bucket 1.
int bucket_index(double noisy_degree, double lambda);

struct PartitionPart {
  Instance instance;
  int bucket = 1;
  std::string label;
};

struct PartitionResult {
  std::vector<PartitionPart> parts;
  // Largest number of sub-instances sharing any single input tuple.
  std::size_t max_multiplicity = 1;
  std::map<Tuple, int> bucket_map;
  std::map<Tuple, double> noisy_degree;
};

// Splits a two-table join on its single shared attribute by noisy degree
// bucket. Bucket edges use `bucket_lambda` when given, else params.lambda().
PartitionResult partition_two_table(const Instance& instance, const PrivacyParams& params,
                                    RngStream& rng,
                                    std::optional<double> bucket_lambda = std::nullopt);

}  // namespace joinsynth

#endif  // JOINSYNTH_RELEASE_HPP_
