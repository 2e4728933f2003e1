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

#include "joinsynth/pmw.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "joinsynth/error.hpp"

namespace joinsynth {

namespace {

double ClippedExp(double exponent, std::size_t& clipped) {
  if (exponent > kExponentClip) {
    ++clipped;
    exponent = kExponentClip;
  } else if (exponent < -kExponentClip) {
    ++clipped;
    exponent = -kExponentClip;
  }
  return std::exp(exponent);
}

double Sum(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

void Rescale(std::vector<double>& v, double target) {
  const double total = Sum(v);
  if (total <= 0.0) return;
  const double scale = target / total;
  for (double& x : v) x *= scale;
}

}  // namespace

int default_iterations(double n_hat, double epsilon, double delta, double domain_size,
                       double family_size, double delta_tilde) {
  const double upper = std::max(1.0, 4.0 * family_size);
  const double raw = n_hat * epsilon * std::sqrt(std::log2(domain_size)) /
                     (delta_tilde * std::log2(family_size) *
                      std::sqrt(std::log2(1.0 / delta)));
  // 0/0 happens only when n_hat = 0; |Q| = 1 gives +inf and clamps high.
  if (std::isnan(raw)) return 1;
  return static_cast<int>(std::clamp(std::round(raw), 1.0, upper));
}

double mw_exponent(double q_x, double measurement, double q_f, double n_hat) {
  return q_x * (measurement - q_f) / (2.0 * n_hat);
}

std::vector<double> mw_update(std::span<const double> f_prev, std::span<const double> q,
                              double measurement, double n_hat, std::size_t* clipped) {
  if (f_prev.size() != q.size()) {
    throw Error(ErrorCode::kInvalidArgument, "weights do not match the iterate");
  }
  double q_f = 0.0;
  for (std::size_t x = 0; x < f_prev.size(); ++x) q_f += f_prev[x] * q[x];
  std::vector<double> next(f_prev.begin(), f_prev.end());
  if (measurement == q_f) return next;
  std::size_t local_clipped = 0;
  for (std::size_t x = 0; x < next.size(); ++x) {
    next[x] *= ClippedExp(mw_exponent(q[x], measurement, q_f, n_hat), local_clipped);
  }
  Rescale(next, n_hat);
  if (clipped != nullptr) *clipped += local_clipped;
  return next;
}

PmwResult pmw(const JoinTable& join, const FamilyEvaluator& evaluator,
              const PmwConfig& config, RngStream& rng) {
  const JoinedDomain& domain = evaluator.domain();
  const std::size_t cells = domain.size();
  if (!(config.delta_tilde > 0.0) || !std::isfinite(config.delta_tilde)) {
    throw Error(ErrorCode::kInvalidArgument, "delta_tilde must be positive and finite");
  }
  if (config.iterations && *config.iterations < 1) {
    throw Error(ErrorCode::kInvalidArgument, "iterations must be >= 1");
  }
  const double eps = config.params.epsilon();
  const double delta = config.params.delta();
  const double dt = config.delta_tilde;

  std::vector<std::pair<std::size_t, double>> support;
  support.reserve(join.entries.size());
  double count = 0.0;
  for (const auto& [t, f] : join.entries) {
    support.emplace_back(domain.cell_of(t), static_cast<double>(f));
    count += static_cast<double>(f);
  }
  const std::vector<double> truth = evaluator.evaluate_sparse(support);

  PmwResult result;
  result.synthetic = SyntheticDistribution(evaluator.shared_domain());
  result.tlap_draw = sample_tlap(2.0 * dt / eps, tau(eps / 2.0, delta / 2.0, dt), rng);
  result.n_hat = count + result.tlap_draw;
  const double n_hat = result.n_hat;
  const double size_for_k =
      config.nominal_domain_size.value_or(static_cast<double>(cells));
  result.iterations = config.iterations.value_or(default_iterations(
      n_hat, eps, delta, size_for_k, static_cast<double>(evaluator.size()), dt));
  const int k = result.iterations;
  result.epsilon_prime = eps / (16.0 * std::sqrt(k * std::log(1.0 / delta)));
  if (!(n_hat > 0.0)) return result;

  std::vector<double> f(cells, n_hat / static_cast<double>(cells));
  std::vector<double> average(cells, 0.0);
  std::vector<double> scores(evaluator.size());
  std::vector<double> weights(cells);
  for (int round = 0; round < k; ++round) {
    const std::vector<double> answers = evaluator.evaluate(f);
    for (std::size_t j = 0; j < scores.size(); ++j) {
      scores[j] = std::fabs(answers[j] - truth[j]) / dt;
    }
    const std::size_t pick = exp_mechanism(scores, result.epsilon_prime, 1.0, rng);
    const double m = truth[pick] + sample_laplace(dt / result.epsilon_prime, rng);
    result.selected.push_back(pick);
    result.measurements.push_back(m);

    const double q_f = answers[pick];
    if (m != q_f) {
      evaluator.cell_weights(pick, weights);
      for (std::size_t x = 0; x < cells; ++x) {
        f[x] *= ClippedExp(mw_exponent(weights[x], m, q_f, n_hat), result.clipped);
      }
      Rescale(f, n_hat);
    }
    for (std::size_t x = 0; x < cells; ++x) average[x] += f[x];
  }
  for (double& v : average) v /= static_cast<double>(k);
  result.synthetic = SyntheticDistribution(evaluator.shared_domain(), std::move(average));
  return result;
}

PmwResult pmw(const JoinTable& join, const QueryFamily& family,
              std::shared_ptr<const JoinedDomain> domain, const PmwConfig& config,
              RngStream& rng) {
  FamilyEvaluator evaluator(std::move(domain), family);
  return pmw(join, evaluator, config, rng);
}

}  // namespace joinsynth
