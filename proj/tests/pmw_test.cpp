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

#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <random>

#include "joinsynth/error.hpp"
#include "joinsynth/noise.hpp"
#include "joinsynth/pmw.hpp"
#include "joinsynth/query.hpp"
#include "joinsynth/synthetic.hpp"
#include "test_support.hpp"

namespace js = joinsynth;
namespace ts = testing_support;

namespace {

js::PmwResult RunPmw(const js::Instance& inst, const js::QueryFamily& family,
                     const js::PmwConfig& config, js::RngStream& rng) {
  return js::pmw(js::join_materialize(inst), family,
                 std::make_shared<const js::JoinedDomain>(inst.query()), config, rng);
}

TEST(DefaultIterationsTest, Examples) {
  EXPECT_EQ(js::default_iterations(1000, 1, 0x1p-10, 0x1p12, 0x1p7, 4), 39);
  EXPECT_EQ(js::default_iterations(1, 1, 0x1p-10, 0x1p12, 0x1p7, 400), 1);
  EXPECT_EQ(js::default_iterations(1e9, 1, 0x1p-10, 0x1p12, 0x1p7, 1), 4 * 128);
  EXPECT_EQ(js::default_iterations(0, 1, 0x1p-10, 0x1p12, 1, 1), 1);
}

TEST(MwUpdateTest, MicroStep) {
  // n_hat = 10, F(x) = 0.5, q(x) = 1, m = 8, q(F) = 4.
  EXPECT_NEAR(0.5 * std::exp(js::mw_exponent(1.0, 8.0, 4.0, 10.0)), 0.61070, 1e-5);
}

TEST(MwUpdateTest, FixedPointAndConstantQuery) {
  const std::vector<double> f{1.0, 2.0, 3.0};
  const std::vector<double> q{1.0, -1.0, 0.5};
  EXPECT_EQ(js::mw_update(f, q, 0.5, 6.0), f);  // m = q(F)
  const std::vector<double> flat{0.7, 0.7, 0.7};
  const auto next = js::mw_update(f, flat, 9.0, 6.0);
  for (std::size_t x = 0; x < f.size(); ++x) EXPECT_NEAR(next[x], f[x], 1e-12);
}

TEST(MwUpdateTest, ThreeCellsByHand) {
  const std::vector<double> f{1.0, 2.0, 3.0};
  const std::vector<double> q{1.0, -1.0, 0.5};
  // q(F) = 0.5; exponents 0.375, -0.375, 0.1875; rescaled to 6.
  const auto next = js::mw_update(f, q, 5.0, 6.0);
  EXPECT_NEAR(next[0], 1.353845457893064, 1e-12);
  EXPECT_NEAR(next[1], 1.2790226237780544, 1e-12);
  EXPECT_NEAR(next[2], 3.367131918328882, 1e-12);
}

TEST(MwUpdateTest, ClippingIsCounted) {
  const std::vector<double> f{1.0, 1.0};
  const std::vector<double> q{1.0, -1.0};
  std::size_t clipped = 0;
  const auto next = js::mw_update(f, q, 1e6, 1.0, &clipped);
  EXPECT_EQ(clipped, 2U);
  EXPECT_NEAR(next[0] + next[1], 1.0, 1e-12);
  EXPECT_NEAR(next[1] / next[0], std::exp(-100.0), 1e-50);
}

TEST(PmwTest, CountingOnlyStaysUniformUnderZeroNoise) {
  const js::Instance inst = ts::TwoByTwo();
  js::QueryFamily family{{js::counting_query(inst.query())}, "counting"};
  js::PmwConfig config;
  config.params = js::PrivacyParams(1.0, 0x1p-10);
  config.delta_tilde = 2.0;
  config.iterations = 1;
  auto rng = js::RngStream::ForTesting(js::NoiseHook::kZero);
  const js::PmwResult r = RunPmw(inst, family, config, rng);
  EXPECT_EQ(r.n_hat, 4.0);
  const double cell = 4.0 / static_cast<double>(r.synthetic.domain().size());
  for (double m : r.synthetic.mass()) EXPECT_NEAR(m, cell, 1e-12);
}

TEST(PmwTest, ZeroIterationsRejected) {
  const js::Instance inst = ts::TwoByTwo();
  js::QueryFamily family{{js::counting_query(inst.query())}, "counting"};
  js::PmwConfig config;
  config.iterations = 0;
  js::RngStream rng(1);
  EXPECT_THROW(RunPmw(inst, family, config, rng), js::Error);
  config.iterations = 1;
  config.delta_tilde = 0.0;
  EXPECT_THROW(RunPmw(inst, family, config, rng), js::Error);
}

TEST(PmwTest, SeededEndToEndTotalEqualsNoisyCount) {
  const js::Instance inst = ts::TwoByTwo();
  const auto family = js::random_sign_family(inst.query(), 8, 1, true);
  js::PmwConfig config;
  config.params = js::PrivacyParams(1.0, 0x1p-10);
  config.delta_tilde = 2.0;
  js::RngStream rng(99);
  const js::PmwResult r = RunPmw(inst, family, config, rng);
  // Replay the first draw of the stream.
  js::RngStream replay(99);
  const double draw = js::sample_tlap(2.0 * 2.0 / 1.0, js::tau(0.5, 0x1p-11, 2.0), replay);
  EXPECT_EQ(r.tlap_draw, draw);
  EXPECT_EQ(r.n_hat, 4.0 + draw);
  EXPECT_NEAR(r.synthetic.total(), r.n_hat, 1e-9 * r.n_hat);
  EXPECT_EQ(static_cast<int>(r.selected.size()), r.iterations);
  EXPECT_NEAR(r.epsilon_prime, 1.0 / (16.0 * std::sqrt(r.iterations * std::log(1024.0))), 1e-15);
}

TEST(PmwTest, ShiftHookNoisyCountIsCountPlusTau) {
  const js::Instance inst = ts::TwoByTwo();
  const auto family = js::random_sign_family(inst.query(), 4, 1);
  js::PmwConfig config;
  config.params = js::PrivacyParams(1.0, 0x1p-10);
  config.delta_tilde = 2.0;
  auto rng = js::RngStream::ForTesting(js::NoiseHook::kShift);
  const js::PmwResult r = RunPmw(inst, family, config, rng);
  EXPECT_DOUBLE_EQ(r.n_hat, 4.0 + js::tau(0.5, 0x1p-11, 2.0));
}

TEST(PmwTest, MassConservedAndDeterministic) {
  std::mt19937_64 gen(61);
  ts::RandomShape shape;
  for (int trial = 0; trial < 40; ++trial) {
    const js::Instance inst = ts::RandomInstance(gen, ts::RandomQuery(gen, shape), shape);
    const auto family = js::random_sign_family(inst.query(), 12, 3, true);
    js::PmwConfig config;
    config.params = js::PrivacyParams(1.0, 1e-3);
    config.delta_tilde = 1.0 + trial % 3;
    js::RngStream a(static_cast<std::uint64_t>(trial)), b(static_cast<std::uint64_t>(trial));
    const js::PmwResult ra = RunPmw(inst, family, config, a);
    const js::PmwResult rb = RunPmw(inst, family, config, b);
    ASSERT_GT(ra.n_hat, 0.0);
    EXPECT_NEAR(ra.synthetic.total(), ra.n_hat, 1e-6 * ra.n_hat);
    for (std::size_t x = 0; x < ra.synthetic.domain().size(); ++x) {
      EXPECT_NEAR(ra.synthetic.mass(x), rb.synthetic.mass(x), 1e-12);
      EXPECT_GE(ra.synthetic.mass(x), 0.0);
    }
  }
}

TEST(PmwTest, ErrorShrinksWithMoreBudget) {
  // With a huge budget PMW tracks the truth on a tiny domain.
  const js::Instance inst = ts::TwoByTwo();
  const auto family = js::random_sign_family(inst.query(), 6, 4, true);
  js::PmwConfig config;
  config.params = js::PrivacyParams(5000.0, 1e-3);
  config.delta_tilde = 1.0;
  config.iterations = 400;
  js::RngStream rng(3);
  const js::PmwResult r = RunPmw(inst, family, config, rng);
  EXPECT_LT(js::max_error(family, inst, r.synthetic).value, 1.5);
}

}  // namespace
