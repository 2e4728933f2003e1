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

#include "joinsynth/release.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <memory>
#include <set>
#include <utility>

#include "joinsynth/error.hpp"
#include "joinsynth/sensitivity.hpp"
#include "json.hpp"

namespace joinsynth {

namespace {

void RequireTwoTables(const Instance& instance) {
  if (instance.num_relations() != 2) {
    throw Error(ErrorCode::kWrongArity,
                "expected 2 relations, got " + std::to_string(instance.num_relations()));
  }
}

void RequireSameQuery(const Instance& instance, const FamilyEvaluator& evaluator) {
  if (!(instance.query() == evaluator.domain().query())) {
    throw Error(ErrorCode::kInvalidArgument, "evaluator domain does not match instance");
  }
}

void FillFromPmw(ReleaseReport& report, PmwResult pmw_result) {
  report.synthetic = std::move(pmw_result.synthetic);
  report.n_hat = pmw_result.n_hat;
  report.iterations = pmw_result.iterations;
  report.epsilon_prime = pmw_result.epsilon_prime;
  report.clipped = pmw_result.clipped;
}

PmwConfig MakePmwConfig(const PrivacyParams& half, double delta_tilde,
                        const ReleaseOptions& options) {
  PmwConfig config;
  config.params = half;
  config.delta_tilde = delta_tilde;
  config.iterations = options.iterations;
  config.nominal_domain_size = options.nominal_domain_size;
  return config;
}

nlohmann::json ReportJson(const ReleaseReport& r) {
  nlohmann::json j;
  j["pipeline"] = r.pipeline;
  if (!r.label.empty()) j["label"] = r.label;
  j["epsilon"] = r.epsilon;
  j["delta"] = r.delta;
  j["epsilon_spent"] = r.epsilon_spent;
  j["delta_spent"] = r.delta_spent;
  j["sensitivity"] = r.sensitivity;
  j["delta_tilde"] = r.delta_tilde_used;
  if (r.beta > 0.0) j["beta"] = r.beta;
  j["n_hat"] = r.n_hat;
  j["iterations"] = r.iterations;
  j["epsilon_prime"] = r.epsilon_prime;
  j["clipped_exponents"] = r.clipped;
  j["max_multiplicity"] = r.max_multiplicity;
  j["synthetic_total"] = r.synthetic.domain_ptr() ? r.synthetic.total() : 0.0;
  if (!r.configuration.empty()) {
    nlohmann::json config = nlohmann::json::array();
    for (const auto& [node, bucket] : r.configuration) config.push_back({node, bucket});
    j["configuration"] = config;
  }
  if (!r.sub_reports.empty()) {
    j["sub_reports"] = nlohmann::json::array();
    for (const auto& sub : r.sub_reports) j["sub_reports"].push_back(ReportJson(sub));
  }
  return j;
}

}  // namespace

std::string report_to_json(const ReleaseReport& report, int indent) {
  return ReportJson(report).dump(indent);
}

ReleaseReport release_two_table(const Instance& instance, const FamilyEvaluator& evaluator,
                                const PrivacyParams& params, RngStream& rng,
                                const ReleaseOptions& options) {
  RequireTwoTables(instance);
  RequireSameQuery(instance, evaluator);
  const double eps = params.epsilon();
  const double delta = params.delta();
  ReleaseReport report;
  report.pipeline = "two_table";
  report.epsilon = eps;
  report.delta = delta;
  report.sensitivity = static_cast<double>(local_sensitivity(instance));
  report.delta_tilde_used =
      report.sensitivity + sample_tlap(2.0 / eps, tau(eps / 2.0, delta / 2.0, 1.0), rng);
  const PrivacyParams half = params.scaled(0.5);
  FillFromPmw(report, pmw(join_materialize(instance, options.cap), evaluator,
                          MakePmwConfig(half, report.delta_tilde_used, options), rng));
  report.epsilon_spent = eps;
  report.delta_spent = delta;
  return report;
}

ReleaseReport release_multi_table(const Instance& instance,
                                  const FamilyEvaluator& evaluator,
                                  const PrivacyParams& params, RngStream& rng,
                                  const ReleaseOptions& options) {
  RequireSameQuery(instance, evaluator);
  const double eps = params.epsilon();
  const double delta = params.delta();
  ReleaseReport report;
  report.pipeline = "multi_table";
  report.epsilon = eps;
  report.delta = delta;
  report.beta = 1.0 / params.lambda();
  report.sensitivity = residual_sensitivity(instance, report.beta).residual;
  const double draw = sample_tlap(2.0 * report.beta / eps,
                                  tau(eps / 2.0, delta / 2.0, report.beta), rng);
  report.delta_tilde_used = report.sensitivity * std::exp(draw);
  const PrivacyParams half = params.scaled(0.5);
  FillFromPmw(report, pmw(join_materialize(instance, options.cap), evaluator,
                          MakePmwConfig(half, report.delta_tilde_used, options), rng));
  report.epsilon_spent = eps;
  report.delta_spent = delta;
  return report;
}

int bucket_index(double noisy_degree, double lambda) {
  if (!(lambda > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "lambda must be positive");
  }
  if (!(noisy_degree > lambda)) return 1;
  int i = static_cast<int>(std::ceil(std::log2(noisy_degree / lambda)));
  // Snap to the exact half-open edges (lambda 2^(i-1), lambda 2^i].
  while (std::ldexp(lambda, i) < noisy_degree) ++i;
  while (i > 1 && std::ldexp(lambda, i - 1) >= noisy_degree) --i;
  return std::max(i, 1);
}

PartitionResult partition_two_table(const Instance& instance, const PrivacyParams& params,
                                    RngStream& rng, std::optional<double> bucket_lambda) {
  RequireTwoTables(instance);
  const JoinQuery& q = instance.query();
  const AttributeSet shared = q.schema_set(0) & q.schema_set(1);
  if (std::popcount(shared) != 1) {
    throw Error(ErrorCode::kSchemaNotTwoTableChain,
                "relations must share exactly one attribute, found {" +
                    q.attribute_names(shared) + "}");
  }
  const double eps = params.epsilon();
  const double lambda = bucket_lambda.value_or(params.lambda());
  const double shift = tau(eps, params.delta(), 1.0);

  const auto deg1 = degree_map(instance, 0, shared);
  const auto deg2 = degree_map(instance, 1, shared);
  std::set<Tuple> values;
  for (const auto& [b, d] : deg1) values.insert(b);
  for (const auto& [b, d] : deg2) values.insert(b);

  PartitionResult result;
  for (const Tuple& b : values) {
    const auto it1 = deg1.find(b);
    const auto it2 = deg2.find(b);
    const Frequency d = std::max(it1 == deg1.end() ? 0 : it1->second,
                                 it2 == deg2.end() ? 0 : it2->second);
    const double noisy = static_cast<double>(d) + sample_tlap(1.0 / eps, shift, rng);
    result.noisy_degree[b] = noisy;
    result.bucket_map[b] = bucket_index(noisy, lambda);
  }

  std::map<int, Instance> by_bucket;
  for (std::size_t i = 0; i < 2; ++i) {
    for (const auto& [t, f] : instance.relation(i).support()) {
      const int bucket = result.bucket_map.at(Project(t, q.schema_set(i), shared));
      auto it = by_bucket.find(bucket);
      if (it == by_bucket.end()) it = by_bucket.emplace(bucket, Instance(q)).first;
      it->second.add(i, t, f);
    }
  }
  for (auto& [bucket, sub] : by_bucket) {
    result.parts.push_back({std::move(sub), bucket, "B" + std::to_string(bucket)});
  }
  return result;
}

ReleaseReport release_uniformized_two_table(const Instance& instance,
                                            const FamilyEvaluator& evaluator,
                                            const PrivacyParams& params, RngStream& rng,
                                            const ReleaseOptions& options) {
  RequireTwoTables(instance);
  RequireSameQuery(instance, evaluator);
  const PrivacyParams half = params.scaled(0.5);
  ReleaseReport report;
  report.pipeline = "unif_two_table";
  report.epsilon = params.epsilon();
  report.delta = params.delta();
  report.synthetic = SyntheticDistribution(evaluator.shared_domain());

  const PartitionResult partition =
      partition_two_table(instance, half, rng, params.lambda());
  report.max_multiplicity = partition.max_multiplicity;
  for (const PartitionPart& part : partition.parts) {
    RngStream sub_rng = rng.child(static_cast<std::uint64_t>(part.bucket));
    ReleaseReport sub = release_multi_table(part.instance, evaluator, half, sub_rng, options);
    sub.label = part.label;
    report.synthetic += sub.synthetic;
    report.sensitivity = std::max(report.sensitivity, sub.sensitivity);
    report.delta_tilde_used = std::max(report.delta_tilde_used, sub.delta_tilde_used);
    report.iterations += sub.iterations;
    report.n_hat += sub.n_hat;
    report.clipped += sub.clipped;
    report.beta = sub.beta;
    report.sub_reports.push_back(std::move(sub));
  }
  // Sub-instances are tuple-disjoint, so the sub-releases compose in parallel.
  report.epsilon_spent = half.epsilon() + (partition.parts.empty() ? 0.0 : half.epsilon());
  report.delta_spent = half.delta() + (partition.parts.empty() ? 0.0 : half.delta());
  return report;
}

namespace {

FamilyEvaluator MakeEvaluator(const Instance& instance, const QueryFamily& family,
                              const ReleaseOptions& options) {
  return FamilyEvaluator(std::make_shared<const JoinedDomain>(instance.query(), options.cap),
                         family);
}

}  // namespace

ReleaseReport release_two_table(const Instance& instance, const QueryFamily& family,
                                const PrivacyParams& params, RngStream& rng,
                                const ReleaseOptions& options) {
  RequireTwoTables(instance);
  return release_two_table(instance, MakeEvaluator(instance, family, options), params, rng,
                           options);
}

ReleaseReport release_multi_table(const Instance& instance, const QueryFamily& family,
                                  const PrivacyParams& params, RngStream& rng,
                                  const ReleaseOptions& options) {
  return release_multi_table(instance, MakeEvaluator(instance, family, options), params,
                             rng, options);
}

ReleaseReport release_uniformized_two_table(const Instance& instance,
                                            const QueryFamily& family,
                                            const PrivacyParams& params, RngStream& rng,
                                            const ReleaseOptions& options) {
  RequireTwoTables(instance);
  return release_uniformized_two_table(instance, MakeEvaluator(instance, family, options),
                                       params, rng, options);
}

}  // namespace joinsynth
