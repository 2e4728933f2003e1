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

#include "joinsynth/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <memory>
#include <ostream>

#include "joinsynth/error.hpp"
#include "joinsynth/generators.hpp"
#include "joinsynth/hierarchical.hpp"
#include "joinsynth/sensitivity.hpp"
#include "json.hpp"

namespace joinsynth {

const std::vector<std::string>& pipeline_ids() {
  static const std::vector<std::string> ids = {"two_table", "multi_table", "unif_two_table",
                                               "unif_hierarchical", "exact"};
  return ids;
}

ReleaseReport run_pipeline(const std::string& pipeline, const Instance& instance,
                           const FamilyEvaluator& evaluator, const PrivacyParams& params,
                           RngStream& rng, const ReleaseOptions& options) {
  if (pipeline == "two_table") {
    return release_two_table(instance, evaluator, params, rng, options);
  }
  if (pipeline == "multi_table") {
    return release_multi_table(instance, evaluator, params, rng, options);
  }
  if (pipeline == "unif_two_table") {
    return release_uniformized_two_table(instance, evaluator, params, rng, options);
  }
  if (pipeline == "unif_hierarchical") {
    return release_uniformized_hierarchical(instance, evaluator, params, rng, options);
  }
  if (pipeline == "exact") {
    ReleaseReport report;
    report.pipeline = "exact";
    report.epsilon = params.epsilon();
    report.delta = params.delta();
    report.synthetic =
        exact_distribution(join_materialize(instance, options.cap), evaluator.shared_domain());
    report.n_hat = report.synthetic.total();
    return report;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown pipeline \"" + pipeline + "\"");
}

double pipeline_envelope(const std::string& pipeline, const Instance& instance,
                         const PrivacyParams& params, double domain_size,
                         double family_size) {
  const double lambda = params.lambda();
  double sensitivity = 0.0;
  if (pipeline == "two_table" || pipeline == "unif_two_table" || pipeline == "exact") {
    sensitivity = static_cast<double>(local_sensitivity(instance));
  } else {
    sensitivity = residual_sensitivity(instance, 1.0 / lambda).residual;
  }
  return error_envelope_two_table(
      static_cast<double>(count(instance)), sensitivity, lambda,
      f_upper(domain_size, family_size, params.epsilon(), params.delta()));
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  return values[lo] + (values[hi] - values[lo]) * (pos - static_cast<double>(lo));
}

ErrorTable run_experiment(const std::string& pipeline, const Instance& instance,
                          const QueryFamily& family, const PrivacyParams& params,
                          const std::vector<std::uint64_t>& seeds,
                          const ExperimentOptions& options) {
  if (std::find(pipeline_ids().begin(), pipeline_ids().end(), pipeline) ==
      pipeline_ids().end()) {
    throw Error(ErrorCode::kInvalidArgument, "unknown pipeline \"" + pipeline + "\"");
  }
  auto domain = std::make_shared<const JoinedDomain>(instance.query(), options.release.cap);
  const FamilyEvaluator evaluator(domain, family);
  const JoinTable join = join_materialize(instance, options.release.cap);
  std::vector<std::pair<std::size_t, double>> support;
  for (const auto& [t, f] : join.entries) {
    support.emplace_back(domain->cell_of(t), static_cast<double>(f));
  }
  const std::vector<double> truth = evaluator.evaluate_sparse(support);
  const double domain_size = options.nominal_domain_size > 0.0
                                 ? options.nominal_domain_size
                                 : static_cast<double>(domain->size());

  ErrorTable table;
  table.pipeline = pipeline;
  table.envelope = pipeline_envelope(pipeline, instance, params, domain_size,
                                     static_cast<double>(family.size()));
  std::vector<double> errors;
  std::vector<double> ratios;
  for (std::uint64_t seed : seeds) {
    RngStream rng(seed);
    const auto start = std::chrono::steady_clock::now();
    const ReleaseReport report =
        run_pipeline(pipeline, instance, evaluator, params, rng, options.release);
    const std::vector<double> released = evaluator.evaluate(report.synthetic.mass());
    const auto stop = std::chrono::steady_clock::now();
    double worst = 0.0;
    for (std::size_t j = 0; j < truth.size(); ++j) {
      worst = std::max(worst, std::fabs(truth[j] - released[j]));
    }
    ErrorRow row;
    row.seed = seed;
    row.pipeline = pipeline;
    row.epsilon = params.epsilon();
    row.delta = params.delta();
    row.count = join.total;
    row.delta_tilde = report.delta_tilde_used;
    row.max_error = worst;
    row.envelope = table.envelope;
    row.ratio = table.envelope > 0.0 ? worst / table.envelope : 0.0;
    row.wall_ms = std::chrono::duration<double, std::milli>(stop - start).count();
    row.epsilon_spent = report.epsilon_spent;
    row.delta_spent = report.delta_spent;
    errors.push_back(worst);
    ratios.push_back(row.ratio);
    table.rows.push_back(row);
    if (options.on_report) options.on_report(seed, report);
  }
  table.median_error = quantile(errors, 0.5);
  table.q25_error = quantile(errors, 0.25);
  table.q75_error = quantile(errors, 0.75);
  table.median_ratio = quantile(ratios, 0.5);
  return table;
}

void write_error_csv(std::ostream& out, const ErrorTable& table, bool header) {
  if (header) {
    out << "seed,pipeline,epsilon,delta,count,delta_tilde,max_error,envelope,ratio,wall_ms\n";
  }
  char buffer[512];
  for (const ErrorRow& r : table.rows) {
    std::snprintf(buffer, sizeof(buffer), "%llu,%s,%.17g,%.17g,%lld,%.17g,%.17g,%.17g,%.17g,%.3f\n",
                  static_cast<unsigned long long>(r.seed), r.pipeline.c_str(), r.epsilon,
                  r.delta, static_cast<long long>(r.count), r.delta_tilde, r.max_error,
                  r.envelope, r.ratio, r.wall_ms);
    out << buffer;
  }
}

std::string error_table_to_json(const ErrorTable& table, int indent) {
  nlohmann::json doc;
  doc["pipeline"] = table.pipeline;
  doc["envelope"] = table.envelope;
  doc["median_error"] = table.median_error;
  doc["q25_error"] = table.q25_error;
  doc["q75_error"] = table.q75_error;
  doc["median_ratio"] = table.median_ratio;
  doc["rows"] = nlohmann::json::array();
  for (const ErrorRow& r : table.rows) {
    doc["rows"].push_back({{"seed", r.seed},
                           {"epsilon", r.epsilon},
                           {"delta", r.delta},
                           {"count", r.count},
                           {"delta_tilde", r.delta_tilde},
                           {"max_error", r.max_error},
                           {"envelope", r.envelope},
                           {"ratio", r.ratio},
                           {"wall_ms", r.wall_ms},
                           {"epsilon_spent", r.epsilon_spent},
                           {"delta_spent", r.delta_spent}});
  }
  return doc.dump(indent);
}

}  // namespace joinsynth
