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

#include <algorithm>
#include <cmath>
#include <vector>

#include "joinsynth/error.hpp"
#include "joinsynth/noise.hpp"
#include "test_support.hpp"

namespace js = joinsynth;

namespace {

TEST(PrivacyParamsTest, Validation) {
  EXPECT_THROW(js::PrivacyParams(0.0, 0.1), js::Error);
  EXPECT_THROW(js::PrivacyParams(1.0, 0.0), js::Error);
  EXPECT_THROW(js::PrivacyParams(1.0, 0.6), js::Error);
  EXPECT_NEAR(js::PrivacyParams(2.0, std::exp(-4.0)).lambda(), 2.0, 1e-12);
}

TEST(TauTest, ClosedFormValues) {
  EXPECT_EQ(js::tau(1.0, 0.1, 0.0), 0.0);
  EXPECT_NEAR(js::tau(std::log(2.0), 0.5, 1.0), std::log(3.0) / std::log(2.0), 1e-9);
  EXPECT_NEAR(js::tau(1.0, 0.1, 2.0), 2.0 * std::log(1.0 + (std::exp(1.0) - 1.0) / 0.1),
              1e-9);
  EXPECT_NEAR(js::tau(1.0, 0.1, 2.0), 5.8010, 1e-3);
}

TEST(TauTest, StableForLargeEpsilon) {
  const double t = js::tau(800.0, 0.25, 1.0);
  EXPECT_TRUE(std::isfinite(t));
  EXPECT_NEAR(t, (800.0 + std::log(4.0)) / 800.0, 1e-9);
}

TEST(LaplaceTest, MeanAndVariance) {
  js::RngStream rng(31);
  const int n = 100000;
  double sum = 0, sq = 0;
  for (int i = 0; i < n; ++i) {
    const double x = js::sample_laplace(1.0, rng);
    sum += x;
    sq += x * x;
  }
  const double mean = sum / n;
  EXPECT_NEAR(mean, 0.0, 0.02);
  EXPECT_NEAR(sq / n - mean * mean, 2.0, 0.1);
}

TEST(LaplaceTest, Deterministic) {
  js::RngStream a(7, 3), b(7, 3);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(js::sample_laplace(2.0, a), js::sample_laplace(2.0, b));
}

TEST(TlapTest, SupportAndMedian) {
  js::RngStream rng(32);
  const int n = 100000;
  std::vector<double> xs;
  for (int i = 0; i < n; ++i) {
    const double x = js::sample_tlap(1.0, 3.0, rng);
    ASSERT_GE(x, 0.0);
    ASSERT_LE(x, 6.0);
    xs.push_back(x);
  }
  std::nth_element(xs.begin(), xs.begin() + n / 2, xs.end());
  EXPECT_NEAR(xs[n / 2], 3.0, 0.05);
}

TEST(TlapTest, ConcentratesAtShiftForTinyScale) {
  js::RngStream rng(33);
  for (int i = 0; i < 10000; ++i) {
    EXPECT_NEAR(js::sample_tlap(1e-6, 3.0, rng), 3.0, 1e-3);
  }
}

TEST(TlapTest, Hooks) {
  auto shift = js::RngStream::ForTesting(js::NoiseHook::kShift);
  EXPECT_EQ(js::sample_tlap(1.0, 2.5, shift), 2.5);
  EXPECT_EQ(js::sample_laplace(1.0, shift), 0.0);
  auto zero = js::RngStream::ForTesting(js::NoiseHook::kZero);
  EXPECT_EQ(js::sample_tlap(1.0, 2.5, zero), 0.0);
  EXPECT_EQ(js::sample_laplace(1.0, zero), 0.0);
}

TEST(TlapTest, AdjacentMechanismsDominate) {
  EXPECT_LE(testing_support::TlapDominanceExcess(1.0, 1e-3, 1.0, 100000, 34), 0.0);
  EXPECT_LE(testing_support::TlapDominanceExcess(0.5, 1e-2, 3.0, 100000, 35), 0.0);
}

TEST(ExpMechanismTest, EqualScoresAreUniform) {
  js::RngStream rng(36);
  const std::vector<double> scores(5, 1.5);
  std::vector<double> hits(5, 0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) hits[js::exp_mechanism(scores, 1.0, 1.0, rng)] += 1;
  double chi2 = 0;
  for (double h : hits) chi2 += (h - n / 5.0) * (h - n / 5.0) / (n / 5.0);
  EXPECT_LT(chi2, 13.277);  // chi^2_4 at 0.99
}

TEST(ExpMechanismTest, ZeroEpsilonIsUniform) {
  const std::vector<double> scores{100, -3, 7};
  for (double p : js::exp_mechanism_probabilities(scores, 0.0, 1.0)) {
    EXPECT_NEAR(p, 1.0 / 3.0, 1e-15);
  }
}

TEST(ExpMechanismTest, StrongPreference) {
  js::RngStream rng(37);
  const std::vector<double> scores{10, 0};
  int zeros = 0;
  for (int i = 0; i < 10000; ++i) zeros += js::exp_mechanism(scores, 10.0, 1.0, rng) == 0;
  EXPECT_EQ(zeros, 10000);
  const auto p = js::exp_mechanism_probabilities(scores, 10.0, 1.0);
  EXPECT_NEAR(p[1] / p[0], std::exp(-50.0), 1e-30);
}

TEST(ExpMechanismTest, HookReturnsArgmaxAndRejectsNonFinite) {
  auto rng = js::RngStream::ForTesting(js::NoiseHook::kShift);
  const std::vector<double> scores{1, 4, 4, 2};
  EXPECT_EQ(js::exp_mechanism(scores, 1.0, 1.0, rng), 1U);
  const std::vector<double> bad{1, NAN};
  try {
    js::exp_mechanism(bad, 1.0, 1.0, rng);
    FAIL();
  } catch (const js::Error& e) {
    EXPECT_EQ(e.code(), js::ErrorCode::kNonFiniteScore);
  }
}

TEST(RngStreamTest, ChildrenDifferAndAreReproducible) {
  const js::RngStream parent(5);
  js::RngStream a = parent.child(1), b = parent.child(1), c = parent.child(2);
  const auto x = a.next_u64();
  EXPECT_EQ(x, b.next_u64());
  EXPECT_NE(x, c.next_u64());
}

}  // namespace
