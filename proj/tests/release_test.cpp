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
#include <set>

#include "joinsynth/error.hpp"
#include "joinsynth/generators.hpp"
#include "joinsynth/noise.hpp"
#include "joinsynth/release.hpp"
#include "joinsynth/sensitivity.hpp"
#include "test_support.hpp"

namespace js = joinsynth;
namespace ts = testing_support;

namespace {

const js::PrivacyParams kParams(1.0, 0x1p-10);

js::QueryFamily SmallFamily(const js::JoinQuery& q) {
  return js::random_sign_family(q, 8, 17, true);
}

TEST(ReleaseTwoTableTest, NoisyBoundWithinTlapSupport) {
  const js::Instance inst = ts::TwoByTwo();
  const double t = js::tau(0.5, 0x1p-11, 1.0);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    js::RngStream rng(seed);
    const js::ReleaseReport r = js::release_two_table(inst, SmallFamily(inst.query()), kParams, rng);
    EXPECT_EQ(r.sensitivity, 2.0);
    EXPECT_GE(r.delta_tilde_used, 2.0);
    EXPECT_LE(r.delta_tilde_used, 2.0 + 2.0 * t);
    EXPECT_EQ(r.epsilon_spent, 1.0);
    EXPECT_EQ(r.delta_spent, 0x1p-10);
    EXPECT_NEAR(r.synthetic.total(), r.n_hat, 1e-9 * r.n_hat);
  }
}

TEST(ReleaseTwoTableTest, ShiftHookGivesSensitivityPlusTau) {
  const js::Instance inst = ts::TwoByTwo();
  auto rng = js::RngStream::ForTesting(js::NoiseHook::kShift);
  const js::ReleaseReport r = js::release_two_table(inst, SmallFamily(inst.query()), kParams, rng);
  EXPECT_EQ(r.delta_tilde_used, 2.0 + js::tau(0.5, 0x1p-11, 1.0));
}

TEST(ReleaseTwoTableTest, WrongArity) {
  js::Instance inst(ts::PathThreeQuery());
  js::RngStream rng(0);
  try {
    js::release_two_table(inst, SmallFamily(inst.query()), kParams, rng);
    FAIL();
  } catch (const js::Error& e) {
    EXPECT_EQ(e.code(), js::ErrorCode::kWrongArity);
  }
}

TEST(ReleaseMultiTableTest, TwoTableInstanceBoundsAndBeta) {
  const js::Instance inst = ts::TwoByTwo();
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    js::RngStream rng(seed);
    const js::ReleaseReport r =
        js::release_multi_table(inst, SmallFamily(inst.query()), kParams, rng);
    EXPECT_DOUBLE_EQ(r.beta, 1.0 / kParams.lambda());
    EXPECT_DOUBLE_EQ(r.sensitivity, js::residual_sensitivity(inst, r.beta).residual);
    EXPECT_GE(r.delta_tilde_used, r.sensitivity);
    EXPECT_GE(r.delta_tilde_used, 2.0);
  }
}

TEST(ReleaseMultiTableTest, ShiftHookGivesExpTau) {
  const js::Instance inst = ts::TwoByTwo();
  auto rng = js::RngStream::ForTesting(js::NoiseHook::kShift);
  const js::ReleaseReport r = js::release_multi_table(inst, SmallFamily(inst.query()), kParams, rng);
  const double beta = 1.0 / kParams.lambda();
  EXPECT_DOUBLE_EQ(r.delta_tilde_used,
                   r.sensitivity * std::exp(js::tau(0.5, 0x1p-11, beta)));
}

TEST(ReleaseMultiTableTest, PathThreeCompletes) {
  std::mt19937_64 gen(71);
  ts::RandomShape shape;
  const js::Instance inst = ts::RandomInstance(gen, ts::PathThreeQuery(3), shape);
  js::RngStream rng(4);
  const js::ReleaseReport r = js::release_multi_table(inst, SmallFamily(inst.query()), kParams, rng);
  EXPECT_GE(r.delta_tilde_used, js::residual_sensitivity(inst, r.beta).residual);
  EXPECT_NEAR(r.synthetic.total(), r.n_hat, 1e-9 * r.n_hat);
  const std::string json = js::report_to_json(r);
  EXPECT_NE(json.find("\"beta\""), std::string::npos);
}

TEST(BucketIndexTest, Examples) {
  EXPECT_EQ(js::bucket_index(7.0, 2.0), 2);
  EXPECT_EQ(js::bucket_index(2.0, 2.0), 1);
  EXPECT_EQ(js::bucket_index(0.0, 2.0), 1);
  EXPECT_EQ(js::bucket_index(-3.0, 2.0), 1);
  for (int i = 1; i < 40; ++i) {
    for (double lambda : {1.0, 0.3, 6.931471805599453, 7.6}) {
      const double edge = std::ldexp(lambda, i);
      EXPECT_EQ(js::bucket_index(edge, lambda), i);
      EXPECT_EQ(js::bucket_index(std::nextafter(edge, 1e300), lambda), i + 1);
    }
  }
  EXPECT_THROW(js::bucket_index(1.0, 0.0), js::Error);
}

TEST(PartitionTwoTableTest, StaircaseZeroNoise) {
  const js::Instance inst = js::gen_staircase(4).instance;
  auto rng = js::RngStream::ForTesting(js::NoiseHook::kZero);
  const js::PartitionResult p = js::partition_two_table(inst, kParams, rng, 1.0);
  ASSERT_EQ(p.parts.size(), 2U);
  EXPECT_EQ(p.parts[0].bucket, 1);
  EXPECT_EQ(p.parts[1].bucket, 2);
  EXPECT_EQ(js::count(p.parts[0].instance), 1 + 4);
  EXPECT_EQ(js::count(p.parts[1].instance), 9 + 16);
}

TEST(PartitionTwoTableTest, EqualDegreesSinglePart) {
  js::SingleTable t;
  t.frequency.assign(5, 2);
  const js::Instance inst = js::gen_two_table_lb(t, 3).instance;
  auto rng = js::RngStream::ForTesting(js::NoiseHook::kZero);
  EXPECT_EQ(js::partition_two_table(inst, kParams, rng, 1.0).parts.size(), 1U);
}

TEST(PartitionTwoTableTest, GapCensusMatchesClasses) {
  // degrees 1, 2, 4 with lambda = 1 fall in buckets 1, 1, 2.
  const js::Instance inst = js::gen_gap(8).instance;
  auto rng = js::RngStream::ForTesting(js::NoiseHook::kZero);
  const js::PartitionResult p = js::partition_two_table(inst, kParams, rng, 1.0);
  ASSERT_EQ(p.parts.size(), 2U);
  EXPECT_EQ(js::count(p.parts[0].instance), 64 + 32);
  EXPECT_EQ(js::count(p.parts[1].instance), 16);
}

TEST(PartitionTwoTableTest, SchemaErrors) {
  js::JoinQuery two_shared({{"A", 2}, {"B", 2}},
                           std::vector<std::vector<std::string>>{{"A", "B"}, {"A", "B"}});
  js::RngStream rng(0);
  try {
    js::partition_two_table(js::Instance(two_shared), kParams, rng);
    FAIL();
  } catch (const js::Error& e) {
    EXPECT_EQ(e.code(), js::ErrorCode::kSchemaNotTwoTableChain);
  }
  try {
    js::partition_two_table(js::Instance(ts::PathThreeQuery()), kParams, rng);
    FAIL();
  } catch (const js::Error& e) {
    EXPECT_EQ(e.code(), js::ErrorCode::kWrongArity);
  }
}

TEST(PartitionTwoTableTest, PartsCoverJoinAndInputExactly) {
  std::mt19937_64 gen(72);
  for (int trial = 0; trial < 200; ++trial) {
    const js::Instance inst = ts::RandomTwoTable(gen, 5, 4);
    js::RngStream rng(static_cast<std::uint64_t>(trial));
    const js::PartitionResult p = js::partition_two_table(inst, js::PrivacyParams(0.5, 0.01), rng, 0.5);
    std::map<js::Tuple, js::Frequency> joined;
    js::Instance merged(inst.query());
    std::set<int> buckets;
    for (const auto& part : p.parts) {
      EXPECT_TRUE(buckets.insert(part.bucket).second);
      joined = ts::AddJoins(joined, ts::BruteJoin(part.instance));
      for (std::size_t i = 0; i < 2; ++i) {
        for (const auto& [t, f] : part.instance.relation(i).support()) merged.add(i, t, f);
      }
    }
    EXPECT_EQ(joined, ts::BruteJoin(inst));
    EXPECT_EQ(merged, inst);
    EXPECT_EQ(p.max_multiplicity, 1U);
  }
}

TEST(ReleaseUniformizedTwoTableTest, LedgerAndUnion) {
  const js::Instance inst = js::gen_gap(8).instance;
  const auto family = js::random_sign_family(inst.query(), 8, 2, true);
  js::RngStream rng(5);
  const js::ReleaseReport r = js::release_uniformized_two_table(inst, family, kParams, rng);
  EXPECT_EQ(r.epsilon_spent, 1.0);
  EXPECT_EQ(r.delta_spent, 0x1p-10);
  ASSERT_FALSE(r.sub_reports.empty());
  double total = 0;
  for (const auto& sub : r.sub_reports) {
    EXPECT_EQ(sub.epsilon, 0.5);
    EXPECT_GE(sub.delta_tilde_used, sub.sensitivity);
    total += sub.synthetic.total();
  }
  EXPECT_NEAR(r.synthetic.total(), total, 1e-9 * total);
}

TEST(ReleaseUniformizedTwoTableTest, SingleBucketIsMultiTableAtHalfBudget) {
  // One join value, so one bucket whatever the noise.
  js::Instance inst(ts::ChainQuery(2, 1, 2));
  inst.add(0, {0, 0});
  inst.add(0, {1, 0});
  inst.add(1, {0, 1});
  const auto family = js::random_sign_family(inst.query(), 6, 3, true);
  js::RngStream rng(8);
  const js::ReleaseReport u = js::release_uniformized_two_table(inst, family, kParams, rng);
  ASSERT_EQ(u.sub_reports.size(), 1U);
  const int bucket = std::stoi(u.sub_reports[0].label.substr(1));
  js::RngStream replay = js::RngStream(8).child(static_cast<std::uint64_t>(bucket));
  const js::ReleaseReport m =
      js::release_multi_table(inst, family, kParams.scaled(0.5), replay);
  EXPECT_EQ(u.sub_reports[0].delta_tilde_used, m.delta_tilde_used);
  for (std::size_t x = 0; x < m.synthetic.domain().size(); ++x) {
    EXPECT_EQ(u.synthetic.mass(x), m.synthetic.mass(x));
  }
}

TEST(ReleaseUniformizedTwoTableTest, GapZeroNoiseBuckets) {
  // Overall lambda for the buckets; with the zero hook only true degrees count.
  const js::Instance inst = js::gen_gap(8).instance;
  const js::PrivacyParams params(1.0, std::exp(-1.0));  // lambda = 1
  const auto family = js::random_sign_family(inst.query(), 4, 2, true);
  auto rng = js::RngStream::ForTesting(js::NoiseHook::kZero);
  js::ReleaseOptions options;
  options.iterations = 2;
  const js::ReleaseReport r = js::release_uniformized_two_table(inst, family, params, rng, options);
  EXPECT_EQ(r.sub_reports.size(), 2U);
}

}  // namespace
