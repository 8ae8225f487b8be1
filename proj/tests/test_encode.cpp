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

#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "ruleseg/solve.hpp"
#include "test_support.hpp"

namespace ruleseg {
namespace {

using testing::build;
using testing::check_linearization;
using testing::grid_instance;
using testing::random_micro_problem;

Rule hard(RelationKind k, LabelId a, LabelId b) { return {k, a, b, true, 0.0, 0, 0}; }
Rule soft(RelationKind k, LabelId a, LabelId b, double c) { return {k, a, b, false, c, 0, 0}; }

std::size_t count_rel(const IlpProblem& p, Relation rel) {
  std::size_t n = 0;
  for (const auto& r : p.rows) n += r.rel == rel;
  return n;
}

TEST(OneLabel, Structure) {
  auto inst = grid_instance(1, 2, 2);
  const auto p = build_problem(Matrix::Ones(2, 2), all_candidates(2, 2), {}, inst);
  EXPECT_EQ(p.num_vars(), 4u);
  EXPECT_EQ(p.rows.size(), 2u);
  EXPECT_EQ(count_rel(p, Relation::Equal), 2u);

  const auto pruned = build_problem(Matrix::Ones(2, 2), {{0}, {0, 1}}, {}, inst);
  ASSERT_EQ(pruned.rows[0].terms.size(), 1u);
  EXPECT_EQ(pruned.rows[0].rhs, 1.0);

  auto single = grid_instance(1, 1, 3);
  const auto one = build_problem(Matrix::Ones(1, 3), all_candidates(1, 3), {}, single);
  ASSERT_EQ(one.rows.size(), 1u);
  EXPECT_EQ(one.rows[0].terms.size(), 3u);
}

TEST(PresenceIndicator, OrOfAssignments) {
  auto inst = grid_instance(1, 3, 2);
  IlpProblem p = build_problem(Matrix::Ones(3, 2), all_candidates(3, 2), {}, inst);
  const auto rows_before = p.rows.size();
  const VarId A = encode_presence_indicator(p, 1);
  EXPECT_EQ(p.rows.size() - rows_before, 4u);
  EXPECT_EQ(encode_presence_indicator(p, 1), A);  // reused

  // y(.,1) = (0, 1, 0): A must be 1 and every presence row holds.
  auto x = complete_point(p, {0, 1, 0});
  EXPECT_EQ(x[static_cast<std::size_t>(A)], 1.0);
  for (std::size_t r = rows_before; r < p.rows.size(); ++r) EXPECT_EQ(p.rows[r].violation(x), 0.0);
  x[static_cast<std::size_t>(A)] = 0.0;
  EXPECT_FALSE(point_feasible(p, x));

  auto none = complete_point(p, {0, 0, 0});
  none[static_cast<std::size_t>(A)] = 1.0;
  EXPECT_FALSE(point_feasible(p, none));
}

TEST(Encode, TwoByTwoMutex) {
  auto inst = grid_instance(1, 2, 2);
  Matrix w(2, 2);
  w << 0.9, 0.1, 0.2, 0.8;
  const auto hp = build_problem(w, all_candidates(2, 2), {hard(RelationKind::NonCoexistence, 0, 1)}, inst);
  const auto hb = brute_force(hp);
  EXPECT_EQ(hb.labels, (std::vector<LabelId>{0, 0}));
  EXPECT_NEAR(hb.objective, 1.1, 1e-12);
  EXPECT_EQ(hb.stats.nodes, 4u);

  const auto sp = build_problem(w, all_candidates(2, 2), {soft(RelationKind::NonCoexistence, 0, 1, 0.5)}, inst);
  const auto sb = brute_force(sp);
  EXPECT_EQ(sb.labels, (std::vector<LabelId>{0, 1}));
  EXPECT_NEAR(sb.objective, 1.2, 1e-12);
  // Both present: the slack must be 0 and the penalty is paid.
  const auto x = complete_point(sp, {0, 1});
  EXPECT_EQ(x[static_cast<std::size_t>(*sp.rules[0].z)], 0.0);
  EXPECT_NEAR(point_objective(sp, x), 1.2, 1e-12);
  // Only label 0 present: the rule holds.
  EXPECT_EQ(complete_point(sp, {0, 0})[static_cast<std::size_t>(*sp.rules[0].z)], 1.0);
}

TEST(Encode, NoRulesIsArgmax) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto inst = grid_instance(2, 3, 4);
  Matrix w(6, 4);
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = unit(rng);
  const auto p = build_problem(w, all_candidates(6, 4), {}, inst);
  EXPECT_EQ(brute_force(p).labels, argmax_labels(w));
  EXPECT_EQ(solve(p).labels, argmax_labels(w));
}

TEST(Encode, HardGeometricPairForcedIsInfeasible) {
  // Region 1 sits above region 0; forcing a below and b above breaks "b never above a".
  auto inst = grid_instance(2, 1, 2);
  std::swap(inst.regions[0].bbox, inst.regions[1].bbox);
  const auto p = build_problem(Matrix::Ones(2, 2), {{0}, {1}}, {hard(RelationKind::GeometricAbove, 0, 1)}, inst);
  ASSERT_EQ(p.rules.size(), 1u);
  EXPECT_EQ(p.rules[0].pairs.size(), 1u);
  EXPECT_EQ(brute_force(p).status, SolveStatus::Infeasible);
  EXPECT_EQ(solve(p).status, SolveStatus::Infeasible);
}

TEST(Encode, SoftGeometricViolationZeroesSlack) {
  auto inst = grid_instance(2, 1, 2);  // region 0 above region 1
  Matrix w(2, 2);
  w << 0.2, 0.9, 0.8, 0.1;
  const auto p = build_problem(w, all_candidates(2, 2), {soft(RelationKind::GeometricAbove, 0, 1, 0.3)}, inst);
  const auto x = complete_point(p, {1, 0});  // b above a
  EXPECT_EQ(x[static_cast<std::size_t>(*p.rules[0].z)], 0.0);
  EXPECT_NEAR(point_objective(p, x), 1.7 - 0.3, 1e-12);
  EXPECT_NEAR(brute_force(p).objective, 1.4, 1e-12);
}

TEST(Encode, NoVerticalPairsMeansNoRows) {
  auto inst = grid_instance(1, 3, 2);
  const auto p = build_problem(Matrix::Ones(3, 2), all_candidates(3, 2), {hard(RelationKind::GeometricAbove, 0, 1)}, inst);
  EXPECT_TRUE(p.rules.empty());
  EXPECT_EQ(p.skipped.size(), 1u);
  EXPECT_EQ(p.rows.size(), 3u);
}

TEST(Encode, PresenceRule) {
  auto inst = grid_instance(1, 2, 2);
  const auto hp = build_problem(Matrix::Ones(2, 2), {{0}, {0}}, {hard(RelationKind::Presence, 0, 1)}, inst);
  // Label 1 has no candidate, so the rule is kept (a can appear) and is infeasible.
  EXPECT_EQ(brute_force(hp).status, SolveStatus::Infeasible);

  const auto vacuous = build_problem(Matrix::Ones(2, 2), {{1}, {1}}, {hard(RelationKind::Presence, 0, 1)}, inst);
  EXPECT_EQ(vacuous.skipped.size(), 1u);

  const auto sp = build_problem(Matrix::Ones(2, 2), all_candidates(2, 2), {soft(RelationKind::Presence, 0, 1, 0.4)}, inst);
  EXPECT_EQ(complete_point(sp, {0, 0})[static_cast<std::size_t>(*sp.rules[0].z)], 0.0);
  EXPECT_EQ(complete_point(sp, {1, 1})[static_cast<std::size_t>(*sp.rules[0].z)], 1.0);
}

TEST(Encode, AdjacencyIsolatedAndChain) {
  auto isolated = grid_instance(1, 1, 2);
  const auto p = build_problem(Matrix::Ones(1, 2), {{0}}, {soft(RelationKind::Adjacency, 0, 1, 0.5)}, isolated);
  const auto x = complete_point(p, {0});
  EXPECT_EQ(x[static_cast<std::size_t>(p.rules[0].violation_vars[0])], 1.0);
  EXPECT_EQ(x[static_cast<std::size_t>(*p.rules[0].z)], 0.0);

  auto chain = grid_instance(1, 3, 3);
  const auto c = build_problem(Matrix::Ones(3, 3), all_candidates(3, 3), {soft(RelationKind::Adjacency, 0, 1, 0.5)}, chain);
  EXPECT_EQ(complete_point(c, {2, 0, 2})[static_cast<std::size_t>(*c.rules[0].z)], 0.0);
  EXPECT_EQ(complete_point(c, {2, 0, 1})[static_cast<std::size_t>(*c.rules[0].z)], 1.0);
  EXPECT_EQ(check_linearization(c), "");
}

TEST(Encode, LinearizationIsExactOnSmallPrograms) {
  std::mt19937_64 rng(17);
  int checked = 0;
  for (int trial = 0; checked < 300 && trial < 20000; ++trial) {
    const auto mp = random_micro_problem(rng, 3);
    const auto p = build(mp);
    if (p.num_vars() > 12) continue;
    ++checked;
    EXPECT_EQ(check_linearization(p), "") << "trial " << trial;
  }
  EXPECT_EQ(checked, 300);
}

TEST(Encode, DominatingSoftPenaltyActsHard) {
  std::mt19937_64 rng(23);
  int compared = 0;
  for (int trial = 0; trial < 300; ++trial) {
    auto mp = random_micro_problem(rng, 4);
    const auto hp = build(mp);
    const auto exact = brute_force(hp);
    if (exact.status == SolveStatus::Infeasible) continue;
    double big = mp.weights.cwiseAbs().sum() + 1.0;
    for (const auto& r : mp.rules) big += r.penalty;
    for (auto& r : mp.rules)
      if (r.hard) r = soft(r.kind, r.a, r.b, big);
    const auto relaxed = brute_force(build(mp));
    EXPECT_EQ(relaxed.labels, exact.labels) << "trial " << trial;
    ++compared;
  }
  EXPECT_GT(compared, 100);
}

TEST(Encode, Deterministic) {
  std::mt19937_64 r1(9), r2(9);
  const auto a = build(random_micro_problem(r1, 6));
  const auto b = build(random_micro_problem(r2, 6));
  std::ostringstream la, lb;
  write_lp(la, a);
  write_lp(lb, b);
  EXPECT_EQ(la.str(), lb.str());
}

TEST(Encode, GeometricPairCapKeepsLargestPairs) {
  auto inst = grid_instance(3, 1, 2);
  inst.regions[0].area = 500;  // top
  inst.regions[1].area = 400;
  EncodeOptions opts;
  opts.max_geometric_pairs = 1;
  const auto p = build_problem(Matrix::Ones(3, 2), all_candidates(3, 2), {hard(RelationKind::GeometricAbove, 0, 1)}, inst, opts);
  ASSERT_EQ(p.rules[0].pairs.size(), 1u);
  EXPECT_EQ(p.rules[0].pairs[0], (std::pair<RegionId, RegionId>{1, 0}));
}

TEST(Encode, LpDumpHasAllSections) {
  auto inst = grid_instance(1, 2, 2);
  const auto p = build_problem(Matrix::Ones(2, 2), all_candidates(2, 2), {soft(RelationKind::NonCoexistence, 0, 1, 0.5)}, inst);
  std::ostringstream os;
  const LabelSet labels({"sky", "sea"});
  write_lp(os, p, &labels);
  const auto text = os.str();
  for (const char* part : {"Maximize", "Subject To", "Binary", "End", "y_0_sky", "A_sea", "z0"})
    EXPECT_NE(text.find(part), std::string::npos) << part;
}

TEST(Encode, RejectsBadInput) {
  auto inst = grid_instance(1, 2, 2);
  EXPECT_THROW(build_problem(Matrix::Ones(3, 2), all_candidates(2, 2), {}, inst), InputError);
  EXPECT_THROW(build_problem(Matrix::Ones(2, 2), {{0}, {}}, {}, inst), InputError);
  EXPECT_THROW(build_problem(Matrix::Ones(2, 2), {{0}, {5}}, {}, inst), InputError);
  EXPECT_THROW(build_problem(Matrix::Ones(2, 2), all_candidates(2, 2), {hard(RelationKind::Presence, 0, 0)}, inst),
               InputError);
}

}  // namespace
}  // namespace ruleseg
