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

// Compiles weights plus a rule set into a 0-1 integer linear program.
//
// Variables:
//   y(i,j)  region i takes candidate label j        objective +w(i,j)
//   A(a)    label a appears somewhere (OR of y(.,a))
//   p / q   products of two binaries (McCormick rows)
//   v       violation indicators
//   z(k)    soft rule k is satisfied                objective +c_k
// The constant -sum_k c_k is tracked separately, so objective + constant is
// sum w y - sum c_k (1 - z_k).
//
// Every auxiliary variable carries its logical definition (VarInfo::op) so
// a labeling can be completed into a full binary point and the linearization
// can be checked against it.

#ifndef RULESEG_ENCODE_HPP_
#define RULESEG_ENCODE_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ruleseg/model.hpp"
#include "ruleseg/rules.hpp"
#include "ruleseg/scoring.hpp"

namespace ruleseg {

using VarId = int;
using RowId = int;

enum class VarKind { Assign, Presence, Product, Violation, Slack };

/// Logical definition of an auxiliary variable in terms of earlier variables.
enum class AuxOp {
  None,    // assignment variable
  Or,      // OR(args)
  And,     // AND(args)
  AndNot,  // args[0] AND NOT OR(args[1..])
  Nor,     // NOT OR(args)
};

struct VarInfo {
  VarKind kind = VarKind::Assign;
  RegionId region = -1;
  LabelId label = -1;
  int rule = -1;  // index into IlpProblem::rules
  AuxOp op = AuxOp::None;
  std::vector<VarId> args;
};

enum class Relation { LessEq, Equal, GreaterEq };

struct Term {
  VarId var;
  double coef;
};

struct Row {
  std::vector<Term> terms;
  Relation rel = Relation::LessEq;
  double rhs = 0.0;

  double activity(const std::vector<double>& x) const {
    double s = 0.0;
    for (const auto& t : terms) s += t.coef * x[static_cast<std::size_t>(t.var)];
    return s;
  }

  /// Amount by which `x` violates the row (0 when satisfied).
  double violation(const std::vector<double>& x) const {
    const double act = activity(x);
    switch (rel) {
      case Relation::LessEq: return std::max(0.0, act - rhs);
      case Relation::GreaterEq: return std::max(0.0, rhs - act);
      case Relation::Equal: return std::abs(act - rhs);
    }
    return 0.0;
  }
};

struct EncodedRule {
  Rule rule;
  std::size_t source = 0;                               // index in the rule list given to build_problem
  std::optional<VarId> z;                               // soft rules only
  std::vector<RowId> rows;                              // rows contributed by this rule
  std::vector<std::pair<RegionId, RegionId>> pairs;     // geometric: (lower, upper)
  std::vector<VarId> violation_vars;                    // soft: z = NOR(violation_vars)
};

/// The labeling problem the program was compiled from.
struct LabelingStructure {
  std::size_t num_regions = 0;
  std::size_t num_labels = 0;
  Matrix weights;
  Candidates candidates;
  std::vector<std::vector<VarId>> assign;  // parallel to candidates
  std::vector<RowId> one_label_row;
  std::vector<std::vector<RegionId>> neighbors;
  std::vector<VarId> presence;  // per label, -1 when not encoded

  /// Variable of (region, label), or -1 when the label is not a candidate.
  VarId assign_var(RegionId i, LabelId j) const {
    const auto& cand = candidates[static_cast<std::size_t>(i)];
    auto it = std::lower_bound(cand.begin(), cand.end(), j);
    if (it == cand.end() || *it != j) return -1;
    return assign[static_cast<std::size_t>(i)][static_cast<std::size_t>(it - cand.begin())];
  }
};

struct IlpProblem {
  std::vector<double> objective;
  double constant = 0.0;
  std::vector<Row> rows;
  std::vector<VarInfo> vars;
  LabelingStructure structure;
  std::vector<EncodedRule> rules;
  std::vector<Rule> skipped;  // vacuous under the candidate sets

  std::size_t num_vars() const { return vars.size(); }
};

struct EncodeOptions {
  std::size_t max_geometric_pairs = 20000;
};

namespace detail {

class ProblemBuilder {
 public:
  explicit ProblemBuilder(IlpProblem& p) : p_(p) {}

  VarId add_var(VarInfo info, double cost = 0.0) {
    p_.vars.push_back(std::move(info));
    p_.objective.push_back(cost);
    return static_cast<VarId>(p_.vars.size() - 1);
  }

  RowId add_row(std::vector<Term> terms, Relation rel, double rhs) {
    p_.rows.push_back(Row{std::move(terms), rel, rhs});
    return static_cast<RowId>(p_.rows.size() - 1);
  }

 private:
  IlpProblem& p_;
};

}  // namespace detail

/// Pairs (i, j) with region j strictly above region i, in (i, j) order.
inline std::vector<std::pair<RegionId, RegionId>> vertical_pairs(const std::vector<Region>& regions) {
  std::vector<std::pair<RegionId, RegionId>> out;
  for (std::size_t i = 0; i < regions.size(); ++i)
    for (std::size_t j = 0; j < regions.size(); ++j)
      if (i != j && strictly_above(regions[j], regions[i]))
        out.emplace_back(static_cast<RegionId>(i), static_cast<RegionId>(j));
  return out;
}

/// One row sum_{j in cand(i)} y(i,j) = 1 per region. Creates the assignment
/// variables of `structure` as a side effect.
inline std::vector<RowId> encode_one_label(IlpProblem& problem, const Matrix& weights, const Candidates& candidates) {
  detail::ProblemBuilder build(problem);
  auto& s = problem.structure;
  s.assign.assign(candidates.size(), {});
  s.one_label_row.clear();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (candidates[i].empty()) throw InputError("region " + std::to_string(i) + " has an empty candidate set");
    std::vector<Term> terms;
    for (LabelId j : candidates[i]) {
      VarInfo info;
      info.kind = VarKind::Assign;
      info.region = static_cast<RegionId>(i);
      info.label = j;
      const VarId v = build.add_var(std::move(info), weights(static_cast<Eigen::Index>(i), j));
      s.assign[i].push_back(v);
      terms.push_back({v, 1.0});
    }
    s.one_label_row.push_back(build.add_row(std::move(terms), Relation::Equal, 1.0));
  }
  return s.one_label_row;
}

/// Presence indicator A(a) with A >= y(i,a) for every candidate region and
/// A <= sum_i y(i,a). Reuses the indicator when already encoded.
inline VarId encode_presence_indicator(IlpProblem& problem, LabelId a) {
  auto& s = problem.structure;
  if (s.presence.size() != s.num_labels) s.presence.assign(s.num_labels, -1);
  if (s.presence[static_cast<std::size_t>(a)] >= 0) return s.presence[static_cast<std::size_t>(a)];

  detail::ProblemBuilder build(problem);
  VarInfo info;
  info.kind = VarKind::Presence;
  info.label = a;
  info.op = AuxOp::Or;
  std::vector<VarId> ys;
  for (std::size_t i = 0; i < s.num_regions; ++i) {
    const VarId y = s.assign_var(static_cast<RegionId>(i), a);
    if (y >= 0) ys.push_back(y);
  }
  info.args = ys;
  const VarId A = build.add_var(std::move(info));
  std::vector<Term> upper{{A, 1.0}};
  for (VarId y : ys) {
    build.add_row({{A, 1.0}, {y, -1.0}}, Relation::GreaterEq, 0.0);
    upper.push_back({y, -1.0});
  }
  build.add_row(std::move(upper), Relation::LessEq, 0.0);
  s.presence[static_cast<std::size_t>(a)] = A;
  return A;
}

namespace detail {

inline VarId add_aux(IlpProblem& p, VarKind kind, int rule, AuxOp op, std::vector<VarId> args,
                     RegionId region = -1) {
  VarInfo info;
  info.kind = kind;
  info.rule = rule;
  info.op = op;
  info.args = std::move(args);
  info.region = region;
  return ProblemBuilder(p).add_var(std::move(info));
}

/// McCormick rows making `prod` equal u * v at every binary point.
inline void product_rows(IlpProblem& p, EncodedRule& er, VarId prod, VarId u, VarId v) {
  ProblemBuilder build(p);
  er.rows.push_back(build.add_row({{prod, 1.0}, {u, -1.0}}, Relation::LessEq, 0.0));
  er.rows.push_back(build.add_row({{prod, 1.0}, {v, -1.0}}, Relation::LessEq, 0.0));
  er.rows.push_back(build.add_row({{prod, 1.0}, {u, -1.0}, {v, -1.0}}, Relation::GreaterEq, -1.0));
}

/// v = u AND NOT w via v >= u - w, v <= u, v <= 1 - w.
inline void and_not_rows(IlpProblem& p, EncodedRule& er, VarId v, VarId u, VarId w) {
  ProblemBuilder build(p);
  er.rows.push_back(build.add_row({{v, 1.0}, {u, -1.0}, {w, 1.0}}, Relation::GreaterEq, 0.0));
  er.rows.push_back(build.add_row({{v, 1.0}, {u, -1.0}}, Relation::LessEq, 0.0));
  er.rows.push_back(build.add_row({{v, 1.0}, {w, 1.0}}, Relation::LessEq, 1.0));
}

/// Creates z_k = NOR(violations) with the two-sided coupling
/// (1 - z) <= V <= |V| (1 - z), V the sum of the violation variables.
inline void couple_slack(IlpProblem& p, EncodedRule& er, int rule_index) {
  const auto& viol = er.violation_vars;
  VarInfo info;
  info.kind = VarKind::Slack;
  info.rule = rule_index;
  info.op = AuxOp::Nor;
  info.args = viol;
  ProblemBuilder build(p);
  const VarId z = build.add_var(std::move(info), er.rule.penalty);
  p.constant -= er.rule.penalty;
  er.z = z;
  const auto count = static_cast<double>(viol.size());
  std::vector<Term> lower{{z, 1.0}}, upper{{z, count}};
  for (VarId v : viol) {
    lower.push_back({v, 1.0});
    upper.push_back({v, 1.0});
  }
  if (viol.size() == 1) {
    er.rows.push_back(build.add_row(std::move(lower), Relation::Equal, 1.0));
  } else {
    er.rows.push_back(build.add_row(std::move(lower), Relation::GreaterEq, 1.0));
    er.rows.push_back(build.add_row(std::move(upper), Relation::LessEq, count));
  }
}

}  // namespace detail

/// Geometric rule: no region labeled rule.b lies strictly above a region
/// labeled rule.a. `pairs` holds (lower i, upper j) with a in cand(i) and
/// b in cand(j). Hard: y(i,a) + y(j,b) <= 1 per pair. Soft: product
/// variables per pair coupled to z.
inline void encode_geometric(IlpProblem& p, EncodedRule& er, int rule_index) {
  const auto& s = p.structure;
  detail::ProblemBuilder build(p);
  for (auto [i, j] : er.pairs) {
    const VarId lower = s.assign_var(i, er.rule.a), upper = s.assign_var(j, er.rule.b);
    if (er.rule.hard) {
      er.rows.push_back(build.add_row({{lower, 1.0}, {upper, 1.0}}, Relation::LessEq, 1.0));
    } else {
      const VarId prod = detail::add_aux(p, VarKind::Product, rule_index, AuxOp::And, {lower, upper}, i);
      detail::product_rows(p, er, prod, lower, upper);
      er.violation_vars.push_back(prod);
    }
  }
  if (!er.rule.hard) detail::couple_slack(p, er, rule_index);
}

/// Mutual exclusion: hard A(a) + A(b) <= 1; soft q = A(a) A(b), z = 1 - q.
inline void encode_mutex(IlpProblem& p, EncodedRule& er, int rule_index) {
  const VarId Aa = encode_presence_indicator(p, er.rule.a);
  const VarId Ab = encode_presence_indicator(p, er.rule.b);
  if (er.rule.hard) {
    er.rows.push_back(detail::ProblemBuilder(p).add_row({{Aa, 1.0}, {Ab, 1.0}}, Relation::LessEq, 1.0));
    return;
  }
  const VarId q = detail::add_aux(p, VarKind::Product, rule_index, AuxOp::And, {Aa, Ab});
  detail::product_rows(p, er, q, Aa, Ab);
  er.violation_vars.push_back(q);
  detail::couple_slack(p, er, rule_index);
}

/// Presence (a implies b): hard A(a) <= A(b); soft v = A(a) AND NOT A(b), z = 1 - v.
inline void encode_presence_rule(IlpProblem& p, EncodedRule& er, int rule_index) {
  const VarId Aa = encode_presence_indicator(p, er.rule.a);
  const VarId Ab = encode_presence_indicator(p, er.rule.b);
  if (er.rule.hard) {
    er.rows.push_back(detail::ProblemBuilder(p).add_row({{Aa, 1.0}, {Ab, -1.0}}, Relation::LessEq, 0.0));
    return;
  }
  const VarId v = detail::add_aux(p, VarKind::Violation, rule_index, AuxOp::AndNot, {Aa, Ab});
  detail::and_not_rows(p, er, v, Aa, Ab);
  er.violation_vars.push_back(v);
  detail::couple_slack(p, er, rule_index);
}

/// Co-occurrence, compiled as presence in both directions: hard A(a) = A(b);
/// soft z = 1 - v1 - v2 with v1 = A(a) AND NOT A(b), v2 = A(b) AND NOT A(a).
inline void encode_cooccurrence(IlpProblem& p, EncodedRule& er, int rule_index) {
  const VarId Aa = encode_presence_indicator(p, er.rule.a);
  const VarId Ab = encode_presence_indicator(p, er.rule.b);
  if (er.rule.hard) {
    er.rows.push_back(detail::ProblemBuilder(p).add_row({{Aa, 1.0}, {Ab, -1.0}}, Relation::Equal, 0.0));
    return;
  }
  const VarId v1 = detail::add_aux(p, VarKind::Violation, rule_index, AuxOp::AndNot, {Aa, Ab});
  detail::and_not_rows(p, er, v1, Aa, Ab);
  const VarId v2 = detail::add_aux(p, VarKind::Violation, rule_index, AuxOp::AndNot, {Ab, Aa});
  detail::and_not_rows(p, er, v2, Ab, Aa);
  er.violation_vars = {v1, v2};
  detail::couple_slack(p, er, rule_index);
}

/// Adjacency (every a region borders a b region). Hard: y(i,a) <= sum of
/// y(j,b) over neighbors j. Soft: per-region v_i = y(i,a) AND NOT any
/// neighbor b, aggregated into the z coupling.
inline void encode_adjacency(IlpProblem& p, EncodedRule& er, int rule_index) {
  const auto& s = p.structure;
  detail::ProblemBuilder build(p);
  for (std::size_t i = 0; i < s.num_regions; ++i) {
    const VarId ya = s.assign_var(static_cast<RegionId>(i), er.rule.a);
    if (ya < 0) continue;
    std::vector<VarId> nb;
    for (RegionId j : s.neighbors[i]) {
      const VarId yb = s.assign_var(j, er.rule.b);
      if (yb >= 0) nb.push_back(yb);
    }
    if (er.rule.hard) {
      std::vector<Term> terms{{ya, 1.0}};
      for (VarId yb : nb) terms.push_back({yb, -1.0});
      er.rows.push_back(build.add_row(std::move(terms), Relation::LessEq, 0.0));
      continue;
    }
    std::vector<VarId> args{ya};
    args.insert(args.end(), nb.begin(), nb.end());
    const VarId v = detail::add_aux(p, VarKind::Violation, rule_index, AuxOp::AndNot, std::move(args),
                                    static_cast<RegionId>(i));
    std::vector<Term> lower{{v, 1.0}, {ya, -1.0}};
    for (VarId yb : nb) lower.push_back({yb, 1.0});
    er.rows.push_back(build.add_row(std::move(lower), Relation::GreaterEq, 0.0));
    er.rows.push_back(build.add_row({{v, 1.0}, {ya, -1.0}}, Relation::LessEq, 0.0));
    for (VarId yb : nb) er.rows.push_back(build.add_row({{v, 1.0}, {yb, 1.0}}, Relation::LessEq, 1.0));
    er.violation_vars.push_back(v);
  }
  if (!er.rule.hard) detail::couple_slack(p, er, rule_index);
}

namespace detail {

inline bool label_has_candidate(const LabelingStructure& s, LabelId a) {
  for (const auto& cand : s.candidates)
    if (std::binary_search(cand.begin(), cand.end(), a)) return true;
  return false;
}

}  // namespace detail

/// Builds the full 0-1 program for one instance. Rules that are vacuous under
/// the candidate sets are recorded in `skipped` and contribute nothing.
inline IlpProblem build_problem(const Matrix& weights, const Candidates& candidates, const std::vector<Rule>& rules,
                                const Instance& instance, const EncodeOptions& options = {}) {
  const auto n = instance.regions.size();
  if (static_cast<std::size_t>(weights.rows()) != n || candidates.size() != n)
    throw InputError("build_problem: weights/candidates do not match the region count");
  if (!weights.allFinite()) throw InputError("build_problem: non-finite weight");
  const auto l = static_cast<std::size_t>(weights.cols());

  IlpProblem p;
  auto& s = p.structure;
  s.num_regions = n;
  s.num_labels = l;
  s.weights = weights;
  s.candidates = candidates;
  for (auto& cand : s.candidates) {
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
    for (LabelId j : cand)
      if (j < 0 || static_cast<std::size_t>(j) >= l) throw InputError("build_problem: candidate label out of range");
  }
  for (const auto& r : instance.regions) s.neighbors.push_back(r.neighbors);
  s.presence.assign(l, -1);

  encode_one_label(p, weights, s.candidates);

  std::optional<std::vector<std::pair<RegionId, RegionId>>> all_pairs;
  for (std::size_t source = 0; source < rules.size(); ++source) {
    const Rule& rule = rules[source];
    validate_rule(rule, l);
    const bool has_a = detail::label_has_candidate(s, rule.a), has_b = detail::label_has_candidate(s, rule.b);
    EncodedRule er;
    er.rule = rule;
    er.source = source;
    bool vacuous = false;
    switch (rule.kind) {
      case RelationKind::NonCoexistence: vacuous = !has_a || !has_b; break;
      case RelationKind::Presence:
      case RelationKind::Adjacency: vacuous = !has_a; break;
      case RelationKind::Cooccurrence: vacuous = !has_a && !has_b; break;
      case RelationKind::GeometricAbove: {
        if (!all_pairs) all_pairs = vertical_pairs(instance.regions);
        for (auto [i, j] : *all_pairs)
          if (s.assign_var(i, rule.a) >= 0 && s.assign_var(j, rule.b) >= 0) er.pairs.emplace_back(i, j);
        if (er.pairs.size() > options.max_geometric_pairs) {
          auto mass = [&](const std::pair<RegionId, RegionId>& pr) {
            return instance.regions[static_cast<std::size_t>(pr.first)].area +
                   instance.regions[static_cast<std::size_t>(pr.second)].area;
          };
          std::stable_sort(er.pairs.begin(), er.pairs.end(),
                           [&](const auto& x, const auto& y) { return mass(x) > mass(y); });
          er.pairs.resize(options.max_geometric_pairs);
          std::sort(er.pairs.begin(), er.pairs.end());
        }
        vacuous = er.pairs.empty();
        break;
      }
    }
    if (vacuous) {
      p.skipped.push_back(rule);
      continue;
    }
    const int index = static_cast<int>(p.rules.size());
    switch (rule.kind) {
      case RelationKind::NonCoexistence: encode_mutex(p, er, index); break;
      case RelationKind::GeometricAbove: encode_geometric(p, er, index); break;
      case RelationKind::Presence: encode_presence_rule(p, er, index); break;
      case RelationKind::Cooccurrence: encode_cooccurrence(p, er, index); break;
      case RelationKind::Adjacency: encode_adjacency(p, er, index); break;
    }
    p.rules.push_back(std::move(er));
  }
  return p;
}

// ---------------------------------------------------------------------------
// Logic evaluation and point completion.

/// Evaluates a rule directly on a labeling, without the linearization.
inline bool rule_satisfied(const EncodedRule& er, const LabelingStructure& s, const std::vector<LabelId>& labels) {
  const Rule& r = er.rule;
  auto present = [&](LabelId x) { return std::find(labels.begin(), labels.end(), x) != labels.end(); };
  switch (r.kind) {
    case RelationKind::NonCoexistence: return !(present(r.a) && present(r.b));
    case RelationKind::Presence: return !present(r.a) || present(r.b);
    case RelationKind::Cooccurrence: return present(r.a) == present(r.b);
    case RelationKind::GeometricAbove:
      for (auto [i, j] : er.pairs)
        if (labels[static_cast<std::size_t>(i)] == r.a && labels[static_cast<std::size_t>(j)] == r.b) return false;
      return true;
    case RelationKind::Adjacency:
      for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != r.a) continue;
        bool found = false;
        for (RegionId j : s.neighbors[i])
          if (labels[static_cast<std::size_t>(j)] == r.b) found = true;
        if (!found) return false;
      }
      return true;
  }
  return true;
}

/// Objective of a labeling evaluated directly: sum of weights minus the
/// penalties of violated soft rules; nullopt when a hard rule is violated or
/// a label is not a candidate.
inline std::optional<double> labeling_objective(const IlpProblem& p, const std::vector<LabelId>& labels) {
  const auto& s = p.structure;
  double value = 0.0;
  for (std::size_t i = 0; i < s.num_regions; ++i) {
    if (s.assign_var(static_cast<RegionId>(i), labels[i]) < 0) return std::nullopt;
    value += s.weights(static_cast<Eigen::Index>(i), labels[i]);
  }
  for (const auto& er : p.rules) {
    if (rule_satisfied(er, s, labels)) continue;
    if (er.rule.hard) return std::nullopt;
    value -= er.rule.penalty;
  }
  return value;
}

/// Extends a labeling to a full binary point: assignment variables from the
/// labels, every auxiliary variable from its logical definition.
inline std::vector<double> complete_point(const IlpProblem& p, const std::vector<LabelId>& labels) {
  const auto& s = p.structure;
  if (labels.size() != s.num_regions) throw InputError("complete_point: labeling length mismatch");
  std::vector<double> x(p.num_vars(), 0.0);
  for (std::size_t i = 0; i < s.num_regions; ++i) {
    const VarId y = s.assign_var(static_cast<RegionId>(i), labels[i]);
    if (y < 0) throw InputError("complete_point: label is not a candidate of its region");
    x[static_cast<std::size_t>(y)] = 1.0;
  }
  for (std::size_t v = 0; v < p.num_vars(); ++v) {
    const auto& info = p.vars[v];
    auto on = [&](VarId a) { return x[static_cast<std::size_t>(a)] > 0.5; };
    auto any = [&](std::size_t from) {
      for (std::size_t k = from; k < info.args.size(); ++k)
        if (on(info.args[k])) return true;
      return false;
    };
    switch (info.op) {
      case AuxOp::None: break;
      case AuxOp::Or: x[v] = any(0) ? 1.0 : 0.0; break;
      case AuxOp::And: x[v] = std::all_of(info.args.begin(), info.args.end(), on) ? 1.0 : 0.0; break;
      case AuxOp::AndNot: x[v] = on(info.args[0]) && !any(1) ? 1.0 : 0.0; break;
      case AuxOp::Nor: x[v] = any(0) ? 0.0 : 1.0; break;
    }
  }
  return x;
}

inline double point_objective(const IlpProblem& p, const std::vector<double>& x) {
  double v = p.constant;
  for (std::size_t j = 0; j < p.num_vars(); ++j) v += p.objective[j] * x[j];
  return v;
}

inline bool point_feasible(const IlpProblem& p, const std::vector<double>& x, double tol = 1e-9) {
  for (const auto& row : p.rows)
    if (row.violation(x) > tol) return false;
  return true;
}

/// Labels of a binary point (the candidate whose assignment variable is set).
inline std::vector<LabelId> decode_labels(const IlpProblem& p, const std::vector<double>& x) {
  const auto& s = p.structure;
  std::vector<LabelId> labels(s.num_regions, -1);
  for (std::size_t i = 0; i < s.num_regions; ++i) {
    double best = -1.0;
    for (std::size_t k = 0; k < s.candidates[i].size(); ++k) {
      const double val = x[static_cast<std::size_t>(s.assign[i][k])];
      if (val > best) {
        best = val;
        labels[i] = s.candidates[i][k];
      }
    }
  }
  return labels;
}

// ---------------------------------------------------------------------------
// LP-format dump.

inline std::string variable_name(const IlpProblem& p, VarId v, const LabelSet* labels = nullptr) {
  const auto& info = p.vars[static_cast<std::size_t>(v)];
  auto lab = [&](LabelId j) { return labels ? labels->name(j) : std::to_string(j); };
  std::ostringstream os;
  switch (info.kind) {
    case VarKind::Assign: os << "y_" << info.region << "_" << lab(info.label); break;
    case VarKind::Presence: os << "A_" << lab(info.label); break;
    case VarKind::Product: os << "p" << info.rule << "_" << v; break;
    case VarKind::Violation: os << "v" << info.rule << "_" << v; break;
    case VarKind::Slack: os << "z" << info.rule; break;
  }
  return os.str();
}

/// Writes the program in CPLEX LP text format (maximize, subject to, binary).
inline void write_lp(std::ostream& os, const IlpProblem& p, const LabelSet* labels = nullptr) {
  auto term = [&](double coef, VarId v, bool first) {
    std::ostringstream t;
    if (coef < 0) t << (first ? "- " : " - ");
    else if (!first) t << " + ";
    const double mag = std::abs(coef);
    if (mag != 1.0) t << mag << " ";
    t << variable_name(p, v, labels);
    return t.str();
  };
  os.precision(17);
  os << "\\ objective constant: " << p.constant << "\n";
  os << "Maximize\n obj:";
  bool first = true;
  for (std::size_t v = 0; v < p.num_vars(); ++v) {
    if (p.objective[v] == 0.0) continue;
    os << " " << term(p.objective[v], static_cast<VarId>(v), first);
    first = false;
  }
  if (first) os << " 0 " << variable_name(p, 0, labels);
  os << "\nSubject To\n";
  for (std::size_t r = 0; r < p.rows.size(); ++r) {
    const auto& row = p.rows[r];
    os << " c" << r << ":";
    bool f = true;
    for (const auto& t : row.terms) {
      os << " " << term(t.coef, t.var, f);
      f = false;
    }
    if (f) os << " 0 " << variable_name(p, 0, labels);
    os << (row.rel == Relation::LessEq ? " <= " : row.rel == Relation::GreaterEq ? " >= " : " = ") << row.rhs << "\n";
  }
  os << "Binary\n";
  for (std::size_t v = 0; v < p.num_vars(); ++v) os << " " << variable_name(p, static_cast<VarId>(v), labels) << "\n";
  os << "End\n";
}

}  // namespace ruleseg

#endif  // RULESEG_ENCODE_HPP_
