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

// Exact maximization of an IlpProblem by depth-first branch and bound over
// the LP relaxation, plus the greedy start heuristic and an exhaustive
// reference solver for small instances.

#ifndef RULESEG_SOLVE_HPP_
#define RULESEG_SOLVE_HPP_

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "ruleseg/encode.hpp"
#include "ruleseg/lp.hpp"

namespace ruleseg {

enum class SolveStatus { Optimal, Feasible, Infeasible, Aborted };

inline std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Feasible: return "feasible";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Aborted: return "aborted";
  }
  return "unknown";
}

struct SolverConfig {
  std::int64_t time_limit_ms = 10000;  // ignored when deterministic
  double gap_tol = 1e-9;
  std::int64_t node_limit = 200000;
  bool deterministic = false;
  LpLimits lp;
};

struct SolveStats {
  std::int64_t nodes = 0;
  std::int64_t lp_iterations = 0;
};

struct Solution {
  std::vector<double> values;     // full binary point, empty without a labeling
  std::vector<LabelId> labels;    // empty without a labeling
  double objective = -std::numeric_limits<double>::infinity();  // includes the constant
  SolveStatus status = SolveStatus::Aborted;
  double gap = std::numeric_limits<double>::infinity();
  SolveStats stats;
};

namespace detail {

/// Fixes an assignment variable and propagates the one-label row of its
/// region. Returns false on a contradiction.
inline bool fix_assign(LpRelaxation& lp, VarId y, double value) {
  const IlpProblem& p = lp.problem();
  if (!lp.fix(y, value)) return false;
  const auto& s = p.structure;
  const auto& vars = s.assign[static_cast<std::size_t>(p.vars[static_cast<std::size_t>(y)].region)];
  if (value == 1.0) {
    for (VarId other : vars)
      if (other != y && !lp.fix(other, 0.0)) return false;
    return true;
  }
  VarId free_var = -1;
  int free_count = 0;
  for (VarId other : vars) {
    if (lp.lower(other) == 1.0) return true;
    if (lp.upper(other) == 1.0) {
      free_var = other;
      ++free_count;
    }
  }
  if (free_count == 0) return false;
  if (free_count == 1) return fix_assign(lp, free_var, 1.0);
  return true;
}

inline bool fix_var(LpRelaxation& lp, VarId v, double value) {
  if (lp.problem().vars[static_cast<std::size_t>(v)].kind == VarKind::Assign) return fix_assign(lp, v, value);
  return lp.fix(v, value);
}

/// sum over regions of the best free weight plus the best objective
/// contribution of each auxiliary variable under the current bounds.
inline double structural_bound(const LpRelaxation& lp) {
  const IlpProblem& p = lp.problem();
  const auto& s = p.structure;
  double value = p.constant;
  for (std::size_t i = 0; i < s.num_regions; ++i) {
    double best = -std::numeric_limits<double>::infinity();
    for (VarId y : s.assign[i]) {
      if (lp.lower(y) == 1.0) {
        best = p.objective[static_cast<std::size_t>(y)];
        break;
      }
      if (lp.upper(y) == 1.0) best = std::max(best, p.objective[static_cast<std::size_t>(y)]);
    }
    value += best;
  }
  for (std::size_t v = 0; v < p.num_vars(); ++v) {
    if (p.vars[v].kind == VarKind::Assign) continue;
    const auto vi = static_cast<VarId>(v);
    value += std::max(p.objective[v] * lp.lower(vi), p.objective[v] * lp.upper(vi));
  }
  return value;
}

/// Region labels from a possibly fractional point: the candidate with the
/// largest value, ties to the larger weight, then the lower label.
inline std::vector<LabelId> round_labels(const IlpProblem& p, const std::vector<double>& x) {
  const auto& s = p.structure;
  std::vector<LabelId> labels(s.num_regions);
  for (std::size_t i = 0; i < s.num_regions; ++i) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < s.assign[i].size(); ++k) {
      const double vk = x[static_cast<std::size_t>(s.assign[i][k])];
      const double vb = x[static_cast<std::size_t>(s.assign[i][best])];
      if (vk > vb + 1e-9 || (vk > vb - 1e-9 && p.objective[static_cast<std::size_t>(s.assign[i][k])] >
                                                   p.objective[static_cast<std::size_t>(s.assign[i][best])]))
        best = k;
    }
    labels[i] = s.candidates[i][best];
  }
  return labels;
}

/// Incremental evaluator of the total violation degree of the hard rules
/// under single-region label changes.
class HardViolationTracker {
 public:
  HardViolationTracker(const IlpProblem& p, std::vector<LabelId> labels)
      : p_(p), labels_(std::move(labels)), counts_(p.structure.num_labels, 0) {
    for (LabelId j : labels_) ++counts_[static_cast<std::size_t>(j)];
    const std::size_t n = p.structure.num_regions;
    for (std::size_t k = 0; k < p.rules.size(); ++k) {
      if (!p.rules[k].rule.hard) continue;
      hard_.push_back(k);
      if (p.rules[k].rule.kind == RelationKind::GeometricAbove) {
        std::vector<std::vector<RegionId>> up(n), down(n);
        for (auto [i, j] : p.rules[k].pairs) {
          up[static_cast<std::size_t>(i)].push_back(j);
          down[static_cast<std::size_t>(j)].push_back(i);
        }
        uppers_.push_back(std::move(up));
        lowers_.push_back(std::move(down));
      } else {
        uppers_.emplace_back();
        lowers_.emplace_back();
      }
    }
    for (std::size_t h = 0; h < hard_.size(); ++h) degree_ += full_degree(h);
  }

  std::int64_t degree() const { return degree_; }
  const std::vector<LabelId>& labels() const { return labels_; }

  /// Change of the total degree when region i switches to label v.
  std::int64_t delta(std::size_t i, LabelId v) {
    const LabelId u = labels_[i];
    if (u == v) return 0;
    std::int64_t change = 0;
    for (std::size_t h = 0; h < hard_.size(); ++h) {
      const Rule& r = p_.rules[hard_[h]].rule;
      if (r.a != u && r.a != v && r.b != u && r.b != v) continue;
      switch (r.kind) {
        case RelationKind::NonCoexistence:
        case RelationKind::Presence:
        case RelationKind::Cooccurrence: {
          const auto ca = count(r.a), cb = count(r.b);
          const auto na = ca - (u == r.a) + (v == r.a), nb = cb - (u == r.b) + (v == r.b);
          change += label_degree(r.kind, na, nb) - label_degree(r.kind, ca, cb);
          break;
        }
        case RelationKind::GeometricAbove:
          change += geometric_contribution(h, i, v, r) - geometric_contribution(h, i, u, r);
          break;
        case RelationKind::Adjacency: {
          const std::int64_t before = adjacency_local(i, r);
          labels_[i] = v;
          const std::int64_t after = adjacency_local(i, r);
          labels_[i] = u;
          change += after - before;
          break;
        }
      }
    }
    return change;
  }

  void apply(std::size_t i, LabelId v) {
    degree_ += delta(i, v);
    --counts_[static_cast<std::size_t>(labels_[i])];
    ++counts_[static_cast<std::size_t>(v)];
    labels_[i] = v;
  }

 private:
  const IlpProblem& p_;
  std::vector<LabelId> labels_;
  std::vector<std::int64_t> counts_;
  std::vector<std::size_t> hard_;
  std::vector<std::vector<std::vector<RegionId>>> uppers_, lowers_;
  std::int64_t degree_ = 0;

  std::int64_t count(LabelId j) const { return counts_[static_cast<std::size_t>(j)]; }

  static std::int64_t label_degree(RelationKind kind, std::int64_t ca, std::int64_t cb) {
    switch (kind) {
      case RelationKind::NonCoexistence: return ca > 0 && cb > 0 ? std::min(ca, cb) : 0;
      case RelationKind::Presence: return ca > 0 && cb == 0 ? ca : 0;
      case RelationKind::Cooccurrence: return (ca > 0) != (cb > 0) ? std::max(ca, cb) : 0;
      default: return 0;
    }
  }

  std::int64_t geometric_contribution(std::size_t h, std::size_t i, LabelId label, const Rule& r) const {
    std::int64_t c = 0;
    if (label == r.a)
      for (RegionId j : uppers_[h][i]) c += labels_[static_cast<std::size_t>(j)] == r.b;
    if (label == r.b)
      for (RegionId k : lowers_[h][i]) c += labels_[static_cast<std::size_t>(k)] == r.a;
    return c;
  }

  bool lacks_neighbor(std::size_t i, const Rule& r) const {
    if (labels_[i] != r.a) return false;
    for (RegionId j : p_.structure.neighbors[i])
      if (labels_[static_cast<std::size_t>(j)] == r.b) return false;
    return true;
  }

  std::int64_t adjacency_local(std::size_t i, const Rule& r) const {
    std::int64_t c = lacks_neighbor(i, r);
    for (RegionId j : p_.structure.neighbors[i]) c += lacks_neighbor(static_cast<std::size_t>(j), r);
    return c;
  }

  std::int64_t full_degree(std::size_t h) const {
    const Rule& r = p_.rules[hard_[h]].rule;
    switch (r.kind) {
      case RelationKind::NonCoexistence:
      case RelationKind::Presence:
      case RelationKind::Cooccurrence: return label_degree(r.kind, count(r.a), count(r.b));
      case RelationKind::GeometricAbove: {
        std::int64_t c = 0;
        for (auto [i, j] : p_.rules[hard_[h]].pairs)
          c += labels_[static_cast<std::size_t>(i)] == r.a && labels_[static_cast<std::size_t>(j)] == r.b;
        return c;
      }
      case RelationKind::Adjacency: {
        std::int64_t c = 0;
        for (std::size_t i = 0; i < labels_.size(); ++i) c += lacks_neighbor(i, r);
        return c;
      }
    }
    return 0;
  }
};

}  // namespace detail

/// Per-region argmax, then repeated best single-region moves that reduce the
/// total hard-rule violation degree (ties: smallest weight loss, then lowest
/// region and label). Soft rules are ignored while repairing. Returns nullopt
/// when no improving move is left before all hard rules hold.
inline std::optional<std::vector<LabelId>> greedy_labeling(const IlpProblem& p) {
  const auto& s = p.structure;
  detail::HardViolationTracker tracker(p, candidate_argmax(s.weights, s.candidates));
  const std::size_t max_passes = s.num_regions * std::max<std::size_t>(1, s.num_labels);
  for (std::size_t pass = 0; pass < max_passes && tracker.degree() > 0; ++pass) {
    std::int64_t best_delta = 0;
    double best_loss = 0.0;
    std::size_t best_i = 0;
    LabelId best_v = -1;
    for (std::size_t i = 0; i < s.num_regions; ++i) {
      const LabelId u = tracker.labels()[i];
      for (LabelId v : s.candidates[i]) {
        if (v == u) continue;
        const std::int64_t d = tracker.delta(i, v);
        if (d >= 0) continue;
        const double loss = s.weights(static_cast<Eigen::Index>(i), u) - s.weights(static_cast<Eigen::Index>(i), v);
        if (best_v < 0 || d < best_delta || (d == best_delta && loss < best_loss)) {
          best_delta = d;
          best_loss = loss;
          best_i = i;
          best_v = v;
        }
      }
    }
    if (best_v < 0) return std::nullopt;
    tracker.apply(best_i, best_v);
  }
  if (tracker.degree() > 0) return std::nullopt;
  return tracker.labels();
}

/// Greedy labeling packaged as a Feasible solution.
inline std::optional<Solution> greedy_incumbent(const IlpProblem& p) {
  auto labels = greedy_labeling(p);
  if (!labels) return std::nullopt;
  const auto value = labeling_objective(p, *labels);
  if (!value) return std::nullopt;
  Solution sol;
  sol.values = complete_point(p, *labels);
  sol.labels = std::move(*labels);
  sol.objective = *value;
  sol.status = SolveStatus::Feasible;
  return sol;
}

/// Upper bound from the LP relaxation after fixing the given variables, the
/// one-label rows propagated. -inf when the fixings are infeasible.
inline double lp_bound(const IlpProblem& p, const std::vector<std::pair<VarId, double>>& fixed,
                       const LpLimits& limits = {}) {
  LpRelaxation lp(p);
  for (auto [v, value] : fixed)
    if (!detail::fix_var(lp, v, value)) return -std::numeric_limits<double>::infinity();
  if (lp.optimize(limits) == LpStatus::Infeasible) return -std::numeric_limits<double>::infinity();
  return std::min(lp.bound(), detail::structural_bound(lp));
}

inline Solution solve(const IlpProblem& p, const SolverConfig& config = {}) {
  using Clock = std::chrono::steady_clock;
  constexpr double kIntTol = 1e-6;
  const auto start = Clock::now();
  const auto& s = p.structure;

  Solution best;
  auto offer = [&](const std::vector<LabelId>& labels) {
    const auto value = labeling_objective(p, labels);
    if (value && *value > best.objective) {
      best.objective = *value;
      best.labels = labels;
    }
  };
  if (auto greedy = greedy_labeling(p)) offer(*greedy);

  struct Frame {
    LpRelaxation lp;
    double bound;
  };
  std::vector<Frame> stack;
  stack.push_back({LpRelaxation(p), std::numeric_limits<double>::infinity()});
  bool aborted = false;

  while (!stack.empty()) {
    if (best.stats.nodes >= config.node_limit ||
        (!config.deterministic &&
         std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start).count() >=
             config.time_limit_ms)) {
      aborted = true;
      break;
    }
    Frame frame = std::move(stack.back());
    stack.pop_back();
    ++best.stats.nodes;
    LpRelaxation& lp = frame.lp;

    const double sb = detail::structural_bound(lp);
    if (sb <= best.objective + config.gap_tol) continue;

    const auto before = lp.pivots();
    const LpStatus st = lp.optimize(config.lp);
    best.stats.lp_iterations += lp.pivots() - before;
    if (st == LpStatus::Infeasible) continue;
    const double node_bound = std::min(sb, lp.bound());
    if (node_bound <= best.objective + config.gap_tol) continue;

    const auto x = lp.primal();
    offer(detail::round_labels(p, x));

    bool all_fixed = true;
    for (std::size_t i = 0; i < s.num_regions && all_fixed; ++i) {
      bool decided = false;
      for (VarId y : s.assign[i]) decided = decided || lp.lower(y) == 1.0;
      all_fixed = decided;
    }
    if (all_fixed) {
      const auto labels = detail::round_labels(p, x);
      const auto point = complete_point(p, labels);
      bool consistent = true;
      for (std::size_t v = 0; v < p.num_vars() && consistent; ++v)
        consistent = point[v] >= lp.lower(static_cast<VarId>(v)) && point[v] <= lp.upper(static_cast<VarId>(v));
      if (consistent) offer(labels);
      continue;
    }

    // Branching variable: fractional assignment closest to 0.5 (ties: larger
    // weight, lower index), else the most fractional auxiliary variable.
    VarId branch = -1;
    double branch_score = std::numeric_limits<double>::infinity();
    auto consider = [&](VarId v, bool assign_only) {
      const auto vi = static_cast<std::size_t>(v);
      if (lp.is_fixed(v) || (p.vars[vi].kind == VarKind::Assign) != assign_only) return;
      const double frac = std::min(x[vi], 1.0 - x[vi]);
      if (frac <= kIntTol) return;
      const double score = std::abs(x[vi] - 0.5);
      if (branch < 0 || score < branch_score - 1e-12 ||
          (score <= branch_score + 1e-12 && p.objective[vi] > p.objective[static_cast<std::size_t>(branch)])) {
        branch = v;
        branch_score = score;
      }
    };
    for (std::size_t v = 0; v < p.num_vars(); ++v) consider(static_cast<VarId>(v), true);
    if (branch < 0)
      for (std::size_t v = 0; v < p.num_vars(); ++v) consider(static_cast<VarId>(v), false);

    if (branch < 0) {
      if (st == LpStatus::Optimal) {
        // Integral relaxation optimum satisfying every row.
        std::vector<double> xi(x.size());
        for (std::size_t v = 0; v < x.size(); ++v) xi[v] = std::round(x[v]);
        if (point_feasible(p, xi)) {
          offer(decode_labels(p, xi));
          continue;
        }
      }
      // Limits stopped the relaxation early: split the first undecided region.
      for (std::size_t i = 0; i < s.num_regions && branch < 0; ++i) {
        int free_count = 0;
        VarId top = -1;
        for (VarId y : s.assign[i]) {
          if (lp.upper(y) != 1.0 || lp.lower(y) == 1.0) continue;
          ++free_count;
          if (top < 0 || x[static_cast<std::size_t>(y)] > x[static_cast<std::size_t>(top)]) top = y;
        }
        if (free_count >= 2) branch = top;
      }
      if (branch < 0) continue;
    }

    Frame zero{lp, node_bound};
    Frame one{std::move(lp), node_bound};
    if (detail::fix_var(zero.lp, branch, 0.0)) stack.push_back(std::move(zero));
    if (detail::fix_var(one.lp, branch, 1.0)) stack.push_back(std::move(one));
  }

  if (!best.labels.empty()) {
    best.values = complete_point(p, best.labels);
    best.objective = point_objective(p, best.values);
  }
  if (!aborted) {
    best.status = best.labels.empty() ? SolveStatus::Infeasible : SolveStatus::Optimal;
    best.gap = best.labels.empty() ? std::numeric_limits<double>::infinity() : 0.0;
    return best;
  }
  double open = -std::numeric_limits<double>::infinity();
  for (const auto& f : stack) open = std::max(open, f.bound);
  if (best.labels.empty()) {
    best.status = SolveStatus::Aborted;
  } else {
    best.status = SolveStatus::Feasible;
    best.gap = std::max(0.0, open - best.objective);
  }
  return best;
}

/// Exhaustive maximization over all candidate labelings, evaluating the
/// rules directly. The first maximum in lexicographic order wins. Throws
/// when the labeling space exceeds `max_labelings`.
inline Solution brute_force(const IlpProblem& p, double max_labelings = 1e7) {
  const auto& s = p.structure;
  double space = 1.0;
  for (const auto& cand : s.candidates) space *= static_cast<double>(cand.size());
  if (space > max_labelings) throw InputError("brute_force: labeling space too large");

  Solution best;
  std::vector<std::size_t> digit(s.num_regions, 0);
  std::vector<LabelId> labels(s.num_regions);
  for (;;) {
    for (std::size_t i = 0; i < s.num_regions; ++i) labels[i] = s.candidates[i][digit[i]];
    ++best.stats.nodes;
    const auto value = labeling_objective(p, labels);
    if (value && *value > best.objective) {
      best.objective = *value;
      best.labels = labels;
    }
    bool carry = true;
    for (std::size_t i = s.num_regions; i > 0 && carry; --i) {
      if (++digit[i - 1] < s.candidates[i - 1].size()) carry = false;
      else digit[i - 1] = 0;
    }
    if (carry) break;
  }
  if (best.labels.empty()) {
    best.status = SolveStatus::Infeasible;
    return best;
  }
  best.values = complete_point(p, best.labels);
  best.status = SolveStatus::Optimal;
  best.gap = 0.0;
  return best;
}

/// Smallest set (one rule, else a pair) of hard rules that is infeasible on
/// its own for the given weights and candidates, as indices into `rules`.
/// Empty when no such set of size <= 2 exists.
inline std::vector<std::size_t> find_conflicting_rules(const Matrix& weights, const Candidates& candidates,
                                                       const std::vector<Rule>& rules, const Instance& instance,
                                                       const SolverConfig& config = {}) {
  std::vector<std::size_t> hard;
  for (std::size_t k = 0; k < rules.size(); ++k)
    if (rules[k].hard) hard.push_back(k);
  auto infeasible = [&](std::vector<Rule> subset) {
    const auto problem = build_problem(weights, candidates, subset, instance);
    return solve(problem, config).status == SolveStatus::Infeasible;
  };
  for (std::size_t k : hard)
    if (infeasible({rules[k]})) return {k};
  for (std::size_t x = 0; x < hard.size(); ++x)
    for (std::size_t y = x + 1; y < hard.size(); ++y)
      if (infeasible({rules[hard[x]], rules[hard[y]]})) return {hard[x], hard[y]};
  return {};
}

}  // namespace ruleseg

#endif  // RULESEG_SOLVE_HPP_
