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

#include <random>

#include "joinsynth/error.hpp"
#include "joinsynth/generators.hpp"
#include "joinsynth/relational.hpp"
#include "joinsynth/sensitivity.hpp"
#include "test_support.hpp"

namespace js = joinsynth;
namespace ts = testing_support;

namespace {

TEST(JoinQueryTest, CanonicalSchemaOrder) {
  js::JoinQuery q({{"A", 2}, {"B", 2}},
                  std::vector<std::vector<std::string>>{{"B", "A"}});
  EXPECT_EQ(q.schema(0), (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(q.atom(0), js::RelationSet{1});
}

TEST(JoinQueryTest, UncoveredAttributeRejected) {
  EXPECT_THROW(js::JoinQuery({{"A", 2}, {"B", 2}},
                             std::vector<std::vector<std::string>>{{"A"}}),
               js::Error);
}

TEST(JoinQueryTest, UnknownAttributeRejected) {
  try {
    js::JoinQuery({{"A", 2}}, std::vector<std::vector<std::string>>{{"A", "Z"}});
    FAIL();
  } catch (const js::Error& e) {
    EXPECT_EQ(e.code(), js::ErrorCode::kAttributeNotInSchema);
  }
}

TEST(JoinQueryTest, BoundaryAndComponents) {
  const js::JoinQuery q = ts::PathThreeQuery();
  // E = {1, 3}: boundary {B, C}; the two relations are disconnected.
  EXPECT_EQ(q.boundary(0b101), q.attribute_set({"B", "C"}));
  EXPECT_EQ(q.components(0b101).size(), 2U);
  EXPECT_EQ(q.components(0b011).size(), 1U);
  EXPECT_EQ(q.components(0b011, q.attribute_set({"B"})).size(), 2U);
}

TEST(InstanceTest, FrequenciesNeverNegative) {
  js::Instance inst(ts::ChainQuery(2, 2, 2));
  inst.add(0, {0, 0}, 2);
  inst.add(0, {0, 0}, -2);
  EXPECT_TRUE(inst.relation(0).empty());
  EXPECT_THROW(inst.add(0, {0, 0}, -1), js::Error);
}

TEST(InstanceTest, OutOfDomainValueRejected) {
  js::Instance inst(ts::ChainQuery(2, 2, 2));
  EXPECT_THROW(inst.add(0, {2, 0}), js::Error);
  try {
    inst.add(0, {0});
    FAIL();
  } catch (const js::Error& e) {
    EXPECT_EQ(e.code(), js::ErrorCode::kWrongArity);
  }
}

TEST(JoinTest, TwoByTwoIsCartesianThroughSharedValue) {
  const js::JoinTable t = js::join_materialize(ts::TwoByTwo());
  EXPECT_EQ(t.entries.size(), 4U);
  EXPECT_EQ(t.total, 4);
  for (const auto& [tuple, f] : t.entries) EXPECT_EQ(f, 1);
  EXPECT_EQ(js::count(ts::TwoByTwo()), 4);
}

TEST(JoinTest, DisjointValuesGiveEmptyJoin) {
  js::Instance inst(ts::ChainQuery(2, 2, 2));
  inst.add(0, {0, 0});
  inst.add(1, {1, 0});
  const js::JoinTable t = js::join_materialize(inst);
  EXPECT_TRUE(t.entries.empty());
  EXPECT_EQ(t.total, 0);
}

TEST(JoinTest, CapIsEnforced) {
  try {
    js::join_materialize(ts::TwoByTwo(), 3);
    FAIL();
  } catch (const js::Error& e) {
    EXPECT_EQ(e.code(), js::ErrorCode::kSupportTooLarge);
  }
}

TEST(JoinTest, MatchesNestedLoopsOnRandomInstances) {
  std::mt19937_64 gen(11);
  ts::RandomShape shape;
  for (int trial = 0; trial < 200; ++trial) {
    const js::Instance inst = ts::RandomInstance(gen, ts::RandomQuery(gen, shape), shape);
    const auto expected = ts::BruteJoin(inst);
    const js::JoinTable t = js::join_materialize(inst);
    EXPECT_EQ(t.entries, expected);
    EXPECT_EQ(js::count(inst), ts::BruteCount(inst));
  }
}

TEST(CountTest, GeneratedInstances) {
  js::SingleTable table;
  table.frequency.assign(9, 1);
  EXPECT_EQ(js::count(js::gen_two_table_lb(table, 3).instance), 27);
  EXPECT_EQ(js::count(js::gen_staircase(4).instance), 1 + 4 + 9 + 16);
}

TEST(DegreeTest, Examples) {
  const js::Instance inst = ts::TwoByTwo();
  const js::AttributeSet b = inst.query().attribute_set({"B"});
  EXPECT_EQ(js::degree(inst, 0, b, {0}), 2);
  EXPECT_EQ(js::degree(inst, 0, b, {1}), 0);
  EXPECT_THROW(js::degree(inst, 0, inst.query().attribute_set({"C"}), {0}), js::Error);
}

TEST(DegreeTest, MatchesLinearScan) {
  std::mt19937_64 gen(12);
  ts::RandomShape shape;
  for (int trial = 0; trial < 100; ++trial) {
    const js::Instance inst = ts::RandomInstance(gen, ts::RandomQuery(gen, shape), shape);
    const js::JoinQuery& q = inst.query();
    for (std::size_t i = 0; i < q.num_relations(); ++i) {
      const js::AttributeSet schema = q.schema_set(i);
      // every subset of the schema
      for (js::AttributeSet y = schema;; y = (y - 1) & schema) {
        ts::ForEachAssignment(q, y, [&](const std::vector<js::Value>& a) {
          const js::Tuple t = js::ProjectAssignment(a, y);
          EXPECT_EQ(js::degree(inst, i, y, t), ts::BruteDegree(inst, i, y, t));
        });
        if (y == 0) break;
      }
    }
  }
}

TEST(BoundaryQueryTest, Examples) {
  const js::Instance inst = ts::TwoByTwo();
  EXPECT_EQ(js::boundary_query(inst, 0b01), 2);
  EXPECT_EQ(js::boundary_query(inst, 0b11), 4);
  EXPECT_EQ(js::boundary_query(inst, 0), 1);
}

TEST(BoundaryQueryTest, MatchesGroupByOracle) {
  std::mt19937_64 gen(13);
  ts::RandomShape shape;
  for (int trial = 0; trial < 200; ++trial) {
    const js::Instance inst = ts::RandomInstance(gen, ts::RandomQuery(gen, shape), shape);
    const js::RelationSet all = inst.query().all_relations();
    for (js::RelationSet e = 0; e <= all; ++e) {
      EXPECT_EQ(js::boundary_query(inst, e), ts::BruteBoundary(inst, e)) << "E=" << e;
    }
  }
}

TEST(NeighborTest, EmptyInstanceGainsOneTuple) {
  const js::Instance empty(ts::ChainQuery(2, 2, 2));
  const js::Instance n = js::neighbor(empty, 5);
  EXPECT_EQ(n.input_size(), 1);
}

TEST(NeighborTest, SizeChangesByOneAndCountWithinLocalSensitivity) {
  std::mt19937_64 gen(14);
  ts::RandomShape shape;
  for (int trial = 0; trial < 500; ++trial) {
    const js::Instance inst = ts::RandomInstance(gen, ts::RandomQuery(gen, shape), shape);
    const js::Instance n = js::neighbor(inst, static_cast<std::uint64_t>(trial));
    EXPECT_EQ(std::llabs(n.input_size() - inst.input_size()), 1);
    EXPECT_LE(std::llabs(js::count(n) - js::count(inst)), js::local_sensitivity(inst));
  }
}

TEST(NeighborTest, Deterministic) {
  const js::Instance inst = ts::TwoByTwo();
  EXPECT_EQ(js::neighbor(inst, 9), js::neighbor(inst, 9));
}

}  // namespace
