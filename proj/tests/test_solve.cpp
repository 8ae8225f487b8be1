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
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "ruleseg/solve.hpp"
#include "test_support.hpp"

namespace ruleseg {
namespace {

using testing::build;
using testing::grid_instance;
using testing::random_micro_problem;

TEST(Solve, MatchesBruteForceOnRandomMicroProblems) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 400; ++trial) {
    const auto mp = random_micro_problem(rng);
    const auto p = build(mp);
    const auto exact = brute_force(p);
    const auto got = solve(p);
    ASSERT_EQ(got.status == SolveStatus::Infeasible, exact.status == SolveStatus::Infeasible) << "trial " << trial;
    if (exact.status == SolveStatus::Infeasible) continue;
    ASSERT_EQ(got.status, SolveStatus::Optimal) << "trial " << trial;
    EXPECT_NEAR(got.objective, exact.objective, 1e-9) << "trial " << trial;
    EXPECT_TRUE(point_feasible(p, got.values));
  }
}

TEST(Solve, RootBoundIsAnUpperBound) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const auto p = build(random_micro_problem(rng));
    const auto exact = brute_force(p);
    if (exact.status == SolveStatus::Infeasible) continue;
    EXPECT_GE(lp_bound(p, {}), exact.objective - 1e-9) << "trial " << trial;
  }
}

TEST(Solve, SoftMutexTwoByTwo) {
  // Two regions, labels {0, 1}; argmax picks both labels, the soft mutex
  // costs 0.5, so relabeling region 1 (loss 0.2) wins.
  auto inst = grid_instance(1, 2, 2);
  Matrix w(2, 2);
  w << 0.9, 0.1, 0.3, 0.5;
  Rule mutex{RelationKind::NonCoexistence, 0, 1, false, 0.5, 0, 0};
  const auto p = build_problem(w, all_candidates(2, 2), {mutex}, inst);
  const auto sol = solve(p);
  ASSERT_EQ(sol.status, SolveStatus::Optimal);
  EXPECT_EQ(sol.labels, (std::vector<LabelId>{0, 0}));
  EXPECT_NEAR(sol.objective, 1.2, 1e-12);
}

TEST(Solve, HardContradictionIsInfeasible) {
  auto inst = grid_instance(1, 2, 2);
  Matrix w = Matrix::Constant(2, 2, 0.5);
  std::vector<Rule> rules{{RelationKind::Presence, 0, 1, true, 0.0, 0, 0},
                          {RelationKind::NonCoexistence, 0, 1, true, 0.0, 0, 0}};
  Candidates cand{{0}, {0, 1}};
  const auto p = build_problem(w, cand, rules, inst);
  EXPECT_EQ(solve(p).status, SolveStatus::Infeasible);
  const auto conflict = find_conflicting_rules(w, cand, rules, inst);
  EXPECT_EQ(conflict, (std::vector<std::size_t>{0, 1}));
}

TEST(Solve, SeparableProblemIsArgmaxAtRoot) {
  auto inst = grid_instance(2, 2, 3);
  Matrix w(4, 3);
  w << 0.1, 0.7, 0.2, 0.5, 0.4, 0.1, 0.3, 0.3, 0.9, 0.6, 0.2, 0.1;
  const auto p = build_problem(w, all_candidates(4, 3), {}, inst);
  const auto sol = solve(p);
  EXPECT_EQ(sol.status, SolveStatus::Optimal);
  EXPECT_EQ(sol.labels, argmax_labels(w));
  EXPECT_EQ(sol.stats.nodes, 1u);
  EXPECT_NEAR(lp_bound(p, {}), 0.7 + 0.5 + 0.9 + 0.6, 1e-12);
}

TEST(LpBound, FixedPointAndHardMutex) {
  auto inst = grid_instance(1, 2, 2);
  Matrix w(2, 2);
  w << 0.9, 0.1, 0.2, 0.8;
  const auto p = build_problem(w, all_candidates(2, 2), {{RelationKind::NonCoexistence, 0, 1, true, 0.0, 0, 0}}, inst);
  const double root = lp_bound(p, {});
  EXPECT_GE(root, 1.1 - 1e-12);
  EXPECT_LE(root, 1.7 + 1e-12);
  const auto& s = p.structure;
  EXPECT_NEAR(lp_bound(p, {{s.assign_var(0, 0), 1.0}, {s.assign_var(1, 0), 1.0}}), 1.1, 1e-12);
  EXPECT_EQ(lp_bound(p, {{s.assign_var(0, 0), 1.0}, {s.assign_var(1, 1), 1.0}}),
            -std::numeric_limits<double>::infinity());
}

TEST(LpBound, ValidBelowEveryPartialFixing) {
  // Fix a random prefix of regions and compare with the best completion.
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 150; ++trial) {
    const auto mp = random_micro_problem(rng, 5);
    const auto p = build(mp);
    const auto& s = p.structure;
    std::vector<std::pair<VarId, double>> fixed;
    std::vector<LabelId> prefix;
    const std::size_t depth = std::uniform_int_distribution<std::size_t>(0, s.num_regions)(rng);
    for (std::size_t i = 0; i < depth; ++i) {
      const auto& cand = s.candidates[i];
      const LabelId j = cand[std::uniform_int_distribution<std::size_t>(0, cand.size() - 1)(rng)];
      prefix.push_back(j);
      fixed.emplace_back(s.assign_var(static_cast<RegionId>(i), j), 1.0);
    }
    double best = -std::numeric_limits<double>::infinity();
    std::vector<std::size_t> digit(s.num_regions - depth, 0);
    std::vector<LabelId> labels(s.num_regions);
    for (;;) {
      for (std::size_t i = 0; i < s.num_regions; ++i)
        labels[i] = i < depth ? prefix[i] : s.candidates[i][digit[i - depth]];
      if (auto v = labeling_objective(p, labels)) best = std::max(best, *v);
      bool carry = true;
      for (std::size_t k = digit.size(); k > 0 && carry; --k) {
        if (++digit[k - 1] < s.candidates[depth + k - 1].size()) carry = false;
        else digit[k - 1] = 0;
      }
      if (carry) break;
    }
    EXPECT_GE(lp_bound(p, fixed), best - 1e-9) << "trial " << trial;
  }
}

TEST(Greedy, RepairsHardMutex) {
  auto inst = grid_instance(1, 2, 2);
  Matrix w(2, 2);
  w << 0.9, 0.1, 0.2, 0.8;
  const auto p = build_problem(w, all_candidates(2, 2), {{RelationKind::NonCoexistence, 0, 1, true, 0.0, 0, 0}}, inst);
  const auto g = greedy_incumbent(p);
  ASSERT_TRUE(g);
  EXPECT_EQ(g->labels, (std::vector<LabelId>{0, 0}));
  EXPECT_NEAR(g->objective, 1.1, 1e-12);
}

TEST(Greedy, NoRulesIsExactAndConflictIsNone) {
  auto inst = grid_instance(1, 2, 2);
  Matrix w(2, 2);
  w << 0.9, 0.1, 0.2, 0.8;
  const auto free = build_problem(w, all_candidates(2, 2), {}, inst);
  EXPECT_EQ(greedy_incumbent(free)->labels, (std::vector<LabelId>{0, 1}));

  std::vector<Rule> rules{{RelationKind::Presence, 0, 1, true, 0.0, 0, 0},
                          {RelationKind::NonCoexistence, 0, 1, true, 0.0, 0, 0}};
  const auto stuck = build_problem(w, {{0}, {0, 1}}, rules, inst);
  EXPECT_FALSE(greedy_incumbent(stuck));
}

TEST(Greedy, ResultsSatisfyHardRules) {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 300; ++trial) {
    const auto p = build(random_micro_problem(rng));
    if (auto g = greedy_incumbent(p)) {
      for (const auto& er : p.rules) {
        if (!er.rule.hard) continue;
        EXPECT_TRUE(rule_satisfied(er, p.structure, g->labels)) << "trial " << trial;
      }
      EXPECT_TRUE(point_feasible(p, g->values));
    }
  }
}

TEST(Solve, AddingRulesNeverHelps) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    auto mp = random_micro_problem(rng);
    const auto base = solve(build(mp));
    if (base.status == SolveStatus::Infeasible) continue;
    Rule extra = mp.rules.empty() ? Rule{RelationKind::NonCoexistence, 0, 1, false, 0.3, 0, 0} : mp.rules.front();
    extra.hard = trial % 2 == 0;
    extra.penalty = extra.hard ? 0.0 : 0.3;
    mp.rules.push_back(extra);
    const auto more = solve(build(mp));
    if (more.status == SolveStatus::Infeasible) {
      EXPECT_TRUE(extra.hard) << "trial " << trial;
      continue;
    }
    EXPECT_LE(more.objective, base.objective + 1e-9) << "trial " << trial;
  }
}

TEST(Solve, DeterministicRunsAgree) {
  std::mt19937_64 rng(37);
  SolverConfig cfg;
  cfg.deterministic = true;
  for (int trial = 0; trial < 50; ++trial) {
    const auto p = build(random_micro_problem(rng));
    const auto a = solve(p, cfg), b = solve(p, cfg);
    EXPECT_EQ(a.labels, b.labels);
    EXPECT_EQ(a.objective, b.objective);
    EXPECT_EQ(a.stats.nodes, b.stats.nodes);
    EXPECT_EQ(a.stats.lp_iterations, b.stats.lp_iterations);
  }
}

TEST(Solve, NodeLimitReturnsIncumbentWithGap) {
  // A soft-mutex grid needs branching; one node is not enough to prove optimality.
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto inst = grid_instance(3, 3, 3);
  Matrix w(9, 3);
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = unit(rng);
  std::vector<Rule> rules{{RelationKind::NonCoexistence, 0, 1, false, 0.4, 0, 0},
                          {RelationKind::NonCoexistence, 1, 2, false, 0.4, 0, 0},
                          {RelationKind::NonCoexistence, 0, 2, false, 0.4, 0, 0}};
  const auto p = build_problem(w, all_candidates(9, 3), rules, inst);
  SolverConfig cfg;
  cfg.node_limit = 1;
  const auto limited = solve(p, cfg);
  const auto exact = brute_force(p);
  if (limited.status == SolveStatus::Optimal) {
    EXPECT_NEAR(limited.objective, exact.objective, 1e-9);
  } else {
    ASSERT_EQ(limited.status, SolveStatus::Feasible);
    EXPECT_LE(limited.objective, exact.objective + 1e-9);
    EXPECT_GE(limited.objective + limited.gap, exact.objective - 1e-9);
  }
}

TEST(BruteForce, RefusesHugeSpaces) {
  auto inst = grid_instance(4, 5, 10);
  const auto p = build_problem(Matrix::Ones(20, 10), all_candidates(20, 10), {}, inst);
  EXPECT_THROW(brute_force(p), InputError);
}

}  // namespace
}  // namespace ruleseg
