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

#ifndef JOINSYNTH_NOISE_HPP_
#define JOINSYNTH_NOISE_HPP_

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace joinsynth {

// (epsilon, delta) with 0 < epsilon and 0 < delta <= 1/2.
class PrivacyParams {
 public:
  PrivacyParams(double epsilon, double delta);

  double epsilon() const { return epsilon_; }
  double delta() const { return delta_; }
  // lambda = (1/epsilon) * ln(1/delta).
  double lambda() const;
  // (epsilon * factor, delta * factor).
  PrivacyParams scaled(double factor) const;

 private:
  double epsilon_;
  double delta_;
};

// Test-only replacement of noise draws. kShift draws the distribution's
// shift (tau for truncated Laplace, 0 for Laplace); kZero draws 0 for both.
// Under either hook the exponential mechanism returns the first argmax.
enum class NoiseHook { kNone, kShift, kZero };

// Deterministic random stream: identical (seed, stream_id) pairs yield
// identical sequences on every platform. Uniform variates are built from raw
// 64-bit engine output, not from std:: distributions, whose algorithms are
// implementation-defined.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0);

  static RngStream ForTesting(NoiseHook hook, std::uint64_t seed = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }
  NoiseHook hook() const { return hook_; }

  std::uint64_t next_u64() { return engine_(); }
  // Uniform on [0, 1).
  double uniform();
  // Uniform on (0, 1).
  double uniform_open();
  // Uniform integer in [0, n); n must be positive.
  std::uint64_t uniform_index(std::uint64_t n);

  // Independent stream derived from this stream's identity (not its state).
  RngStream child(std::uint64_t id) const;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  NoiseHook hook_ = NoiseHook::kNone;
  std::mt19937_64 engine_;
};

// tau(eps, delta, Delta) = (Delta/eps) * ln(1 + (e^eps - 1)/delta).
double tau(double epsilon, double delta, double sensitivity);

double sample_laplace(double scale, RngStream& rng);

// Truncated, shifted Laplace: support [0, 2*tau], density proportional to
// exp(-|x - tau| / scale). Exact inverse-CDF sampling.
double sample_tlap(double scale, double tau_shift, RngStream& rng);

// Selection probabilities proportional to
// exp(0.5 * epsilon_prime * score / sensitivity).
std::vector<double> exp_mechanism_probabilities(std::span<const double> scores,
                                                double epsilon_prime,
                                                double sensitivity);

std::size_t exp_mechanism(std::span<const double> scores, double epsilon_prime,
                          double sensitivity, RngStream& rng);

}  // namespace joinsynth

#endif  // JOINSYNTH_NOISE_HPP_
