// Copyright 2026 The ruleseg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>

#include <gtest/gtest.h>

#include "ruleseg/rules.hpp"
#include "test_support.hpp"

namespace ruleseg {
namespace {

using testing::grid_instance;
using testing::numbered_labels;

Region box(std::int64_t x, std::int64_t y, std::int64_t w, std::int64_t h) {
  Region r;
  r.bbox = {x, y, w, h};
  r.area = w * h;
  return r;
}

TEST(StrictlyAbove, Examples) {
  EXPECT_TRUE(strictly_above(box(0, 0, 10, 10), box(0, 20, 10, 10)));
  EXPECT_FALSE(strictly_above(box(0, 0, 10, 10), box(50, 20, 10, 10)));
  EXPECT_FALSE(strictly_above(box(0, 0, 10, 10), box(0, 5, 10, 10)));
  // Touching edges count as above; touching corners do not overlap horizontally.
  EXPECT_TRUE(strictly_above(box(0, 0, 10, 10), box(0, 10, 10, 10)));
  EXPECT_FALSE(strictly_above(box(0, 0, 10, 10), box(10, 10, 10, 10)));
}

TEST(Penalty, SmoothedLogOdds) {
  EXPECT_NEAR(*compute_penalty(20, 80), -std::log(21.0 / 81.0), 1e-12);
  EXPECT_NEAR(*compute_penalty(0, 100), std::log(101.0), 1e-12);
  EXPECT_FALSE(compute_penalty(5, 5));
  EXPECT_FALSE(compute_penalty(6, 5));
  EXPECT_THROW(compute_penalty(-1, 5), InputError);
}

TEST(Penalty, IncreasesWithSatisfactionRatio) {
  double last = 0.0;
  for (int s = 51; s <= 100; ++s) {
    const double p = *compute_penalty(100 - s, s);
    EXPECT_GT(p, last);
    last = p;
  }
}

TEST(ValidateRule, RejectsMalformedRules) {
  EXPECT_THROW(validate_rule({RelationKind::Presence, 0, 0, true, 0, 0, 0}, 3), InputError);
  EXPECT_THROW(validate_rule({RelationKind::Presence, 0, 3, true, 0, 0, 0}, 3), InputError);
  EXPECT_THROW(validate_rule({RelationKind::Presence, 0, 1, false, 0.0, 0, 0}, 3), InputError);
  EXPECT_NO_THROW(validate_rule({RelationKind::Presence, 0, 1, false, 0.4, 0, 0}, 3));
}

TEST(RelationKind, NamesRoundTrip) {
  for (auto k : kAllRelationKinds) EXPECT_EQ(relation_kind_from_string(to_string(k)), k);
  EXPECT_THROW(relation_kind_from_string("above"), InputError);
}

Sample labeled(std::size_t rows, std::size_t cols, std::size_t l, std::vector<LabelId> truth) {
  Sample s;
  s.instance = grid_instance(rows, cols, l);
  s.truth = GroundTruth{std::move(truth)};
  return s;
}

TEST(Cube, DisjointLabelsNeverCooccur) {
  Corpus c;
  c.labels = numbered_labels(2);
  for (int t = 0; t < 10; ++t) c.samples.push_back(labeled(1, 1, 2, {t % 2}));
  const auto cube = build_relation_cube(c);
  EXPECT_EQ(cube.count(RelationKind::Cooccurrence, 0, 1), 0);
  EXPECT_EQ(cube.count(RelationKind::NonCoexistence, 0, 1), 10);
  EXPECT_EQ(cube.opportunity(RelationKind::NonCoexistence, 0, 1), 10);
}

TEST(Cube, SkyAboveSea) {
  Corpus c;
  c.labels = LabelSet({"sky", "sea"});
  c.samples.push_back(labeled(2, 1, 2, {0, 1}));
  const auto cube = build_relation_cube(c);
  EXPECT_EQ(cube.count(RelationKind::GeometricAbove, 0, 1), 1);
  EXPECT_EQ(cube.opportunity(RelationKind::GeometricAbove, 0, 1), 1);
  EXPECT_EQ(cube.count(RelationKind::GeometricAbove, 1, 0), 0);
  EXPECT_EQ(cube.opportunity(RelationKind::GeometricAbove, 1, 0), 1);
}

TEST(Cube, AbsentLabelHasEmptyRows) {
  Corpus c;
  c.labels = numbered_labels(3);
  c.samples.push_back(labeled(2, 2, 3, {0, 0, 1, 1}));
  const auto cube = build_relation_cube(c);
  for (auto k : kAllRelationKinds)
    for (LabelId b = 0; b < 3; ++b) {
      if (k == RelationKind::NonCoexistence || k == RelationKind::Cooccurrence) continue;
      EXPECT_EQ(cube.opportunity(k, 2, b), 0) << to_string(k);
    }
  // Presence of 0 implies presence of 1 here, but 0 -> 2 fails.
  EXPECT_EQ(cube.count(RelationKind::Presence, 0, 1), 1);
  EXPECT_EQ(cube.count(RelationKind::Presence, 0, 2), 0);
}

TEST(Cube, AdjacencyNeedsEveryRegion) {
  Corpus c;
  c.labels = numbered_labels(3);
  // Row of three: 0 1 0 -> every 0 touches a 1; with 0 1 2 0 the last 0 does not.
  c.samples.push_back(labeled(1, 3, 3, {0, 1, 0}));
  c.samples.push_back(labeled(1, 4, 3, {0, 1, 2, 0}));
  const auto cube = build_relation_cube(c);
  EXPECT_EQ(cube.opportunity(RelationKind::Adjacency, 0, 1), 2);
  EXPECT_EQ(cube.count(RelationKind::Adjacency, 0, 1), 1);
}

TEST(Cube, MergeIsAssociativeAndMatchesThreads) {
  Corpus c;
  c.labels = numbered_labels(3);
  for (int t = 0; t < 9; ++t) c.samples.push_back(labeled(2, 2, 3, {t % 3, (t + 1) % 3, 0, t % 2}));
  RelationCube a(3), b(3), d(3);
  for (int t = 0; t < 3; ++t) accumulate_relations(a, c.samples[t].instance, c.samples[t].truth->labels);
  for (int t = 3; t < 6; ++t) accumulate_relations(b, c.samples[t].instance, c.samples[t].truth->labels);
  for (int t = 6; t < 9; ++t) accumulate_relations(d, c.samples[t].instance, c.samples[t].truth->labels);
  EXPECT_EQ((a + b) + d, a + (b + d));
  EXPECT_EQ(a + b + d, build_relation_cube(c, 1));
  EXPECT_EQ(build_relation_cube(c, 4), build_relation_cube(c, 1));
  EXPECT_THROW(a += RelationCube(2), InputError);
}

RelationCube cube_with(RelationKind k, LabelId a, LabelId b, int held, int total) {
  RelationCube cube(3);
  for (int t = 0; t < total; ++t) cube.observe(k, a, b, t < held);
  return cube;
}

TEST(Extract, HardSoftAndNone) {
  const MiningParams params{5, 0.7};
  auto hard = extract_rules(cube_with(RelationKind::Presence, 0, 1, 10, 10), params);
  ASSERT_EQ(hard.size(), 1u);
  EXPECT_TRUE(hard[0].hard);
  EXPECT_EQ(hard[0].support, 10);

  auto soft = extract_rules(cube_with(RelationKind::Presence, 0, 1, 8, 10), params);
  ASSERT_EQ(soft.size(), 1u);
  EXPECT_FALSE(soft[0].hard);
  EXPECT_EQ(soft[0].violations, 2);
  EXPECT_NEAR(soft[0].penalty, std::log(3.0), 1e-12);  // -log((2+1)/(8+1))

  EXPECT_TRUE(extract_rules(cube_with(RelationKind::Presence, 0, 1, 3, 10), params).empty());
  EXPECT_TRUE(extract_rules(cube_with(RelationKind::Presence, 0, 1, 4, 4), params).empty());
}

TEST(Extract, SymmetricKindsOncePerPair) {
  RelationCube cube(2);
  for (int t = 0; t < 6; ++t) {
    cube.observe(RelationKind::NonCoexistence, 0, 1, true);
    cube.observe(RelationKind::NonCoexistence, 1, 0, true);
  }
  const auto rules = extract_rules(cube);
  ASSERT_EQ(rules.size(), 1u);
  EXPECT_EQ(rules[0].a, 0);
  EXPECT_EQ(rules[0].b, 1);
}

TEST(Extract, RejectsBadParameters) {
  RelationCube cube(2);
  EXPECT_THROW(extract_rules(cube, {0, 0.8}), InputError);
  EXPECT_THROW(extract_rules(cube, {5, 0.0}), InputError);
  EXPECT_THROW(extract_rules(cube, {5, 1.5}), InputError);
  EXPECT_THROW(mine_rules(Corpus{}), InputError);
}

}  // namespace
}  // namespace ruleseg
