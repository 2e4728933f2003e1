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

#ifndef JOINSYNTH_EXPERIMENT_HPP_
#define JOINSYNTH_EXPERIMENT_HPP_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "joinsynth/noise.hpp"
#include "joinsynth/query.hpp"
#include "joinsynth/relational.hpp"
#include "joinsynth/release.hpp"

namespace joinsynth {

// Pipeline ids accepted by run_experiment. "exact" releases the true join and
// exists for harness tests.
const std::vector<std::string>& pipeline_ids();

ReleaseReport run_pipeline(const std::string& pipeline, const Instance& instance,
                           const FamilyEvaluator& evaluator, const PrivacyParams& params,
                           RngStream& rng, const ReleaseOptions& options = {});

struct ErrorRow {
  std::uint64_t seed = 0;
  std::string pipeline;
  double epsilon = 0.0;
  double delta = 0.0;
  Frequency count = 0;
  double delta_tilde = 0.0;
  double max_error = 0.0;
  double envelope = 0.0;
  double ratio = 0.0;
  double wall_ms = 0.0;
  double epsilon_spent = 0.0;
  double delta_spent = 0.0;
};

struct ErrorTable {
  std::string pipeline;
  std::vector<ErrorRow> rows;
  double median_error = 0.0;
  double q25_error = 0.0;
  double q75_error = 0.0;
  double envelope = 0.0;
  double median_ratio = 0.0;
};

struct ExperimentOptions {
  ReleaseOptions release;
  // |D| for f^upper; the instantiated joined domain size when zero.
  double nominal_domain_size = 0.0;
  // Called with each report, e.g. to keep the synthetic output of one seed.
  std::function<void(std::uint64_t, const ReleaseReport&)> on_report;
};

// Envelope (sqrt(count (S + lambda)) + (S + lambda) sqrt(lambda)) f^upper with
// S = LS for two-table pipelines and RS^beta (beta = 1/lambda) otherwise.
double pipeline_envelope(const std::string& pipeline, const Instance& instance,
                         const PrivacyParams& params, double domain_size,
                         double family_size);

ErrorTable run_experiment(const std::string& pipeline, const Instance& instance,
                          const QueryFamily& family, const PrivacyParams& params,
                          const std::vector<std::uint64_t>& seeds,
                          const ExperimentOptions& options = {});

// Linear-interpolated quantile of an unsorted sample.
double quantile(std::vector<double> values, double q);

void write_error_csv(std::ostream& out, const ErrorTable& table, bool header = true);
std::string error_table_to_json(const ErrorTable& table, int indent = 2);

}  // namespace joinsynth

#endif  // JOINSYNTH_EXPERIMENT_HPP_
