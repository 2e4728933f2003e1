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

#ifndef JOINSYNTH_PMW_HPP_
#define JOINSYNTH_PMW_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "joinsynth/noise.hpp"
#include "joinsynth/query.hpp"
#include "joinsynth/relational.hpp"
#include "joinsynth/synthetic.hpp"

namespace joinsynth {

inline constexpr double kExponentClip = 50.0;

struct PmwConfig {
  PrivacyParams params{1.0, 0.5};
  double delta_tilde = 1.0;
  // Explicit iteration count; computed by default_iterations when empty.
  std::optional<int> iterations;
  // |D| used in the iteration formula; the instantiated domain size when empty.
  std::optional<double> nominal_domain_size;
};

struct PmwResult {
  SyntheticDistribution synthetic;
  double n_hat = 0.0;
  double tlap_draw = 0.0;
  int iterations = 0;
  double epsilon_prime = 0.0;
  std::vector<std::size_t> selected;
  std::vector<double> measurements;
  std::size_t clipped = 0;
};

int default_iterations(double n_hat, double epsilon, double delta, double domain_size,
                       double family_size, double delta_tilde);

double mw_exponent(double q_x, double measurement, double q_f, double n_hat);

// One multiplicative-weights step; `q` holds q(x) for every cell. Returns the
// renormalized iterate summing to n_hat. Clipped exponents are counted into
// `clipped` when given.
std::vector<double> mw_update(std::span<const double> f_prev, std::span<const double> q,
                              double measurement, double n_hat,
                              std::size_t* clipped = nullptr);

PmwResult pmw(const JoinTable& join, const FamilyEvaluator& evaluator,
              const PmwConfig& config, RngStream& rng);

PmwResult pmw(const JoinTable& join, const QueryFamily& family,
              std::shared_ptr<const JoinedDomain> domain, const PmwConfig& config,
              RngStream& rng);

}  // namespace joinsynth

#endif  // JOINSYNTH_PMW_HPP_
