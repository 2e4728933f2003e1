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

#include "joinsynth/noise.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "joinsynth/error.hpp"

namespace joinsynth {

namespace {

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void CheckPositiveFinite(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(what) + " must be positive and finite");
  }
}

}  // namespace

PrivacyParams::PrivacyParams(double epsilon, double delta)
    : epsilon_(epsilon), delta_(delta) {
  CheckPositiveFinite(epsilon, "epsilon");
  if (!(delta > 0.0) || delta > 0.5) {
    throw Error(ErrorCode::kInvalidArgument, "delta must lie in (0, 1/2]");
  }
}

double PrivacyParams::lambda() const { return std::log(1.0 / delta_) / epsilon_; }

PrivacyParams PrivacyParams::scaled(double factor) const {
  return PrivacyParams(epsilon_ * factor, delta_ * factor);
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed),
      stream_id_(stream_id),
      engine_(SplitMix64(seed ^ SplitMix64(stream_id + 0x51a7e5eedULL))) {}

RngStream RngStream::ForTesting(NoiseHook hook, std::uint64_t seed) {
  RngStream rng(seed);
  rng.hook_ = hook;
  return rng;
}

double RngStream::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RngStream::uniform_open() {
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t RngStream::uniform_index(std::uint64_t n) {
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "empty range");
  // Rejection sampling keeps the draw exactly uniform.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

RngStream RngStream::child(std::uint64_t id) const {
  RngStream out(seed_, SplitMix64(stream_id_ ^ SplitMix64(id + 1)));
  out.hook_ = hook_;
  return out;
}

double tau(double epsilon, double delta, double sensitivity) {
  CheckPositiveFinite(epsilon, "epsilon");
  if (!(delta > 0.0) || delta > 0.5) {
    throw Error(ErrorCode::kInvalidArgument, "delta must lie in (0, 1/2]");
  }
  if (!(sensitivity >= 0.0) || !std::isfinite(sensitivity)) {
    throw Error(ErrorCode::kInvalidArgument, "sensitivity must be >= 0");
  }
  // ln(1 + (e^eps - 1)/delta), rearranged for large eps to avoid overflow.
  double log_term;
  if (epsilon < 1.0) {
    log_term = std::log1p(std::expm1(epsilon) / delta);
  } else {
    log_term = epsilon - std::log(delta) +
               std::log1p((delta - 1.0) * std::exp(-epsilon));
  }
  return sensitivity / epsilon * log_term;
}

double sample_laplace(double scale, RngStream& rng) {
  CheckPositiveFinite(scale, "Laplace scale");
  if (rng.hook() != NoiseHook::kNone) return 0.0;
  const double u = rng.uniform_open() - 0.5;
  return -scale * std::copysign(1.0, u) * std::log1p(-2.0 * std::fabs(u));
}

double sample_tlap(double scale, double tau_shift, RngStream& rng) {
  CheckPositiveFinite(scale, "truncated Laplace scale");
  if (!(tau_shift > 0.0) || !std::isfinite(tau_shift)) {
    throw Error(ErrorCode::kInvalidArgument, "tau must be positive");
  }
  switch (rng.hook()) {
    case NoiseHook::kShift:
      return tau_shift;
    case NoiseHook::kZero:
      return 0.0;
    case NoiseHook::kNone:
      break;
  }
  // The density is symmetric about tau; the lower half of u maps to
  // [0, tau], the upper half to [tau, 2 tau]. Within a half, the distance r
  // from tau has CDF (1 - e^{-r/b}) / (1 - e^{-tau/b}).
  const double u = rng.uniform();
  const double mass = -std::expm1(-tau_shift / scale);
  auto distance = [&](double v) {
    const double r = -scale * std::log1p(-v * mass);
    return std::min(r, tau_shift);
  };
  if (u < 0.5) {
    return std::max(0.0, tau_shift - distance(1.0 - 2.0 * u));
  }
  return std::min(2.0 * tau_shift, tau_shift + distance(2.0 * u - 1.0));
}

std::vector<double> exp_mechanism_probabilities(std::span<const double> scores,
                                                double epsilon_prime,
                                                double sensitivity) {
  if (scores.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "no candidates");
  }
  if (!(epsilon_prime >= 0.0) || !std::isfinite(epsilon_prime)) {
    throw Error(ErrorCode::kInvalidArgument, "epsilon' must be >= 0");
  }
  CheckPositiveFinite(sensitivity, "sensitivity");
  double best = -std::numeric_limits<double>::infinity();
  for (double s : scores) {
    if (!std::isfinite(s)) {
      throw Error(ErrorCode::kNonFiniteScore, "score is not finite");
    }
    best = std::max(best, s);
  }
  std::vector<double> weights(scores.size());
  double total = 0.0;
  for (std::size_t j = 0; j < scores.size(); ++j) {
    weights[j] = std::exp(0.5 * epsilon_prime * (scores[j] - best) / sensitivity);
    total += weights[j];
  }
  for (double& w : weights) w /= total;
  return weights;
}

std::size_t exp_mechanism(std::span<const double> scores, double epsilon_prime,
                          double sensitivity, RngStream& rng) {
  const auto probabilities =
      exp_mechanism_probabilities(scores, epsilon_prime, sensitivity);
  if (rng.hook() != NoiseHook::kNone) {
    return static_cast<std::size_t>(
        std::max_element(scores.begin(), scores.end()) - scores.begin());
  }
  const double u = rng.uniform();
  double cumulative = 0.0;
  for (std::size_t j = 0; j < probabilities.size(); ++j) {
    cumulative += probabilities[j];
    if (u < cumulative) return j;
  }
  // Rounding can leave the cumulative sum a hair below 1.
  for (std::size_t j = probabilities.size(); j-- > 0;) {
    if (probabilities[j] > 0.0) return j;
  }
  return probabilities.size() - 1;
}

}  // namespace joinsynth
