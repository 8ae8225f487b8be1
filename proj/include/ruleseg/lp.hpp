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

// Continuous relaxation (all variables in [0, 1]) of an IlpProblem.
//
// The relaxation is solved by a bounded-variable dual simplex on a dense
// tableau that only holds the rows currently needed: a region enters with
// its one-label row once one of its variables appears in an active row, and
// a problem row enters once the current point violates it. Regions outside
// the tableau sit at their best free candidate, auxiliary variables outside
// it at their best bound.
//
// Every basis the dual simplex visits is dual feasible, so bound() is a valid
// upper bound on the integer optimum under the current fixings at any time,
// also when an iteration limit stops the method early.

#ifndef RULESEG_LP_HPP_
#define RULESEG_LP_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "ruleseg/encode.hpp"

namespace ruleseg {

enum class LpStatus { Optimal, Infeasible, IterationLimit };

struct LpLimits {
  std::int64_t max_pivots = 20000;
  int max_rounds = 400;
};

class LpRelaxation {
 public:
  static constexpr double kInf = std::numeric_limits<double>::infinity();

  explicit LpRelaxation(const IlpProblem& problem)
      : p_(&problem),
        lo_(problem.num_vars(), 0.0),
        hi_(problem.num_vars(), 1.0),
        col_of_var_(problem.num_vars(), -1),
        row_in_lp_(problem.rows.size(), 0),
        region_in_lp_(problem.structure.num_regions, 0) {}

  const IlpProblem& problem() const { return *p_; }
  double lower(VarId v) const { return lo_[static_cast<std::size_t>(v)]; }
  double upper(VarId v) const { return hi_[static_cast<std::size_t>(v)]; }
  bool is_fixed(VarId v) const { return lo_[static_cast<std::size_t>(v)] == hi_[static_cast<std::size_t>(v)]; }
  bool in_tableau(VarId v) const { return col_of_var_[static_cast<std::size_t>(v)] >= 0; }
  std::size_t active_rows() const { return basic_.size(); }
  std::size_t active_columns() const { return cols_.size(); }
  std::int64_t pivots() const { return pivots_; }
  LpStatus status() const { return status_; }

  /// Fixes a variable to 0 or 1. Returns false when that contradicts an
  /// earlier fixing.
  bool fix(VarId v, double value) {
    const auto vi = static_cast<std::size_t>(v);
    if (value < lo_[vi] || value > hi_[vi]) return false;
    lo_[vi] = hi_[vi] = value;
    const int c = col_of_var_[vi];
    if (c >= 0) {
      auto& col = cols_[static_cast<std::size_t>(c)];
      col.lo = col.hi = value;
      if (row_of_col_[static_cast<std::size_t>(c)] < 0) shift_nonbasic(c, value);
    }
    status_ = LpStatus::IterationLimit;
    return true;
  }

  /// Reoptimizes after fixings, adding violated rows until the point
  /// satisfies every row of the problem (Optimal), the active rows are
  /// infeasible, or a limit is hit.
  LpStatus optimize(const LpLimits& limits = {}) {
    const std::int64_t pivot_cap = pivots_ + limits.max_pivots;
    for (int round = 0; round < limits.max_rounds; ++round) {
      refresh();
      const LpStatus inner = dual_simplex(pivot_cap);
      if (inner != LpStatus::Optimal) return status_ = inner;
      if (region_infeasible()) return status_ = LpStatus::Infeasible;
      const auto x = primal();
      std::vector<RowId> violated;
      for (std::size_t r = 0; r < p_->rows.size(); ++r)
        if (!row_in_lp_[r] && p_->rows[r].violation(x) > kFeasTol) violated.push_back(static_cast<RowId>(r));
      if (violated.empty()) return status_ = LpStatus::Optimal;
      for (RowId r : violated) add_problem_row(r);
    }
    return status_ = LpStatus::IterationLimit;
  }

  /// Upper bound on objective + constant over all integer points respecting
  /// the fixings. -inf when the fixings are known to be infeasible.
  double bound() const {
    if (status_ == LpStatus::Infeasible || region_infeasible()) return -kInf;
    double value = p_->constant;
    for (std::size_t c = 0; c < cols_.size(); ++c) {
      const auto& col = cols_[c];
      value += col.cost * x_[c];
      const double d = d_[c];
      if (std::abs(d) <= kDualTol) continue;
      const double best_bound = d > 0.0 ? col.hi : col.lo;
      if (std::isinf(best_bound)) return kInf;
      value += d * (best_bound - x_[c]);
    }
    const auto& s = p_->structure;
    for (std::size_t i = 0; i < s.num_regions; ++i)
      if (!region_in_lp_[i]) value += best_free_weight(i);
    for (std::size_t v = 0; v < p_->num_vars(); ++v) {
      if (col_of_var_[v] >= 0 || p_->vars[v].kind == VarKind::Assign) continue;
      value += std::max(p_->objective[v] * lo_[v], p_->objective[v] * hi_[v]);
    }
    return value;
  }

  /// Current point over all problem variables: tableau values clamped to
  /// their bounds, best candidates for regions outside the tableau, and
  /// auxiliary variables outside it at their best bound or at the value their
  /// lower-side rows imply.
  std::vector<double> primal() const {
    const auto& s = p_->structure;
    std::vector<double> x(p_->num_vars(), 0.0);
    for (std::size_t c = 0; c < cols_.size(); ++c)
      if (cols_[c].var >= 0) x[static_cast<std::size_t>(cols_[c].var)] = std::clamp(x_[c], cols_[c].lo, cols_[c].hi);
    for (std::size_t i = 0; i < s.num_regions; ++i) {
      if (region_in_lp_[i]) continue;
      const VarId y = best_free_var(i);
      if (y >= 0) x[static_cast<std::size_t>(y)] = 1.0;
    }
    for (std::size_t v = 0; v < p_->num_vars(); ++v) {
      if (col_of_var_[v] >= 0) continue;
      const auto& info = p_->vars[v];
      if (info.kind == VarKind::Assign) continue;
      const double cost = p_->objective[v];
      double value = 0.0;
      if (cost > 0.0) {
        value = 1.0;
      } else if (cost < 0.0) {
        value = 0.0;
      } else {
        auto at = [&](std::size_t k) { return x[static_cast<std::size_t>(info.args[k])]; };
        switch (info.op) {
          case AuxOp::Or:
            for (std::size_t k = 0; k < info.args.size(); ++k) value = std::max(value, at(k));
            break;
          case AuxOp::And: {
            double sum = 0.0;
            for (std::size_t k = 0; k < info.args.size(); ++k) sum += at(k);
            value = std::max(0.0, sum - static_cast<double>(info.args.size()) + 1.0);
            break;
          }
          case AuxOp::AndNot: {
            value = at(0);
            for (std::size_t k = 1; k < info.args.size(); ++k) value -= at(k);
            value = std::max(0.0, value);
            break;
          }
          case AuxOp::Nor:
          case AuxOp::None: break;
        }
      }
      x[v] = std::clamp(value, lo_[v], hi_[v]);
    }
    return x;
  }

 private:
  static constexpr double kFeasTol = 1e-9;
  static constexpr double kDualTol = 1e-11;
  static constexpr double kPivotTol = 1e-9;

  struct Column {
    VarId var = -1;  // -1 for a row slack
    double lo = 0.0;
    double hi = 1.0;
    double cost = 0.0;
  };

  const IlpProblem* p_;
  std::vector<double> lo_, hi_;
  std::vector<int> col_of_var_;
  std::vector<char> row_in_lp_;
  std::vector<char> region_in_lp_;

  std::vector<Column> cols_;
  std::vector<double> x_;
  std::vector<double> d_;
  std::vector<int> row_of_col_;
  std::vector<std::vector<double>> tableau_;
  std::vector<int> basic_;
  std::vector<double> rhs_;
  std::vector<int> slack_col_;
  std::int64_t pivots_ = 0;
  LpStatus status_ = LpStatus::IterationLimit;

  VarId best_free_var(std::size_t region) const {
    const auto& s = p_->structure;
    VarId best = -1;
    for (VarId y : s.assign[region]) {
      const auto yi = static_cast<std::size_t>(y);
      if (lo_[yi] == 1.0) return y;
      if (hi_[yi] == 0.0) continue;
      if (best < 0 || p_->objective[yi] > p_->objective[static_cast<std::size_t>(best)]) best = y;
    }
    return best;
  }

  double best_free_weight(std::size_t region) const {
    const VarId y = best_free_var(region);
    return y < 0 ? -kInf : p_->objective[static_cast<std::size_t>(y)];
  }

  bool region_infeasible() const {
    const auto& s = p_->structure;
    for (std::size_t i = 0; i < s.num_regions; ++i) {
      int ones = 0;
      bool any_free = false;
      for (VarId y : s.assign[i]) {
        const auto yi = static_cast<std::size_t>(y);
        if (lo_[yi] == 1.0) ++ones;
        if (hi_[yi] == 1.0) any_free = true;
      }
      if (ones > 1 || !any_free) return true;
    }
    return false;
  }

  void shift_nonbasic(int c, double value) {
    const auto ci = static_cast<std::size_t>(c);
    const double delta = value - x_[ci];
    if (delta == 0.0) return;
    x_[ci] = value;
    for (std::size_t r = 0; r < basic_.size(); ++r) {
      const double a = tableau_[r][ci];
      if (a != 0.0) x_[static_cast<std::size_t>(basic_[r])] -= a * delta;
    }
  }

  int add_column(VarId var, double lo, double hi, double cost) {
    cols_.push_back(Column{var, lo, hi, cost});
    double value = lo;
    if (lo != hi && cost > 0.0 && !std::isinf(hi)) value = hi;
    if (std::isinf(value)) value = 0.0;
    x_.push_back(value);
    d_.push_back(cost);
    row_of_col_.push_back(-1);
    for (auto& row : tableau_) row.push_back(0.0);
    const int c = static_cast<int>(cols_.size() - 1);
    if (var >= 0) col_of_var_[static_cast<std::size_t>(var)] = c;
    return c;
  }

  int ensure_aux_column(VarId v) {
    const auto vi = static_cast<std::size_t>(v);
    if (col_of_var_[vi] >= 0) return col_of_var_[vi];
    return add_column(v, lo_[vi], hi_[vi], p_->objective[vi]);
  }

  /// Brings a region's assignment variables and its one-label row into the
  /// tableau, with the best free candidate basic.
  void add_region(std::size_t region) {
    if (region_in_lp_[region]) return;
    region_in_lp_[region] = 1;
    const auto& s = p_->structure;
    const RowId prow = s.one_label_row[region];
    row_in_lp_[static_cast<std::size_t>(prow)] = 1;

    VarId chosen = best_free_var(region);
    if (chosen < 0) chosen = s.assign[region].front();
    std::vector<int> ycols;
    for (VarId y : s.assign[region]) {
      const auto yi = static_cast<std::size_t>(y);
      ycols.push_back(add_column(y, lo_[yi], hi_[yi], p_->objective[yi]));
    }
    const int slack = add_column(-1, 0.0, 0.0, 0.0);
    const int basic_col = col_of_var_[static_cast<std::size_t>(chosen)];
    const double pi = cols_[static_cast<std::size_t>(basic_col)].cost;

    std::vector<double> row(cols_.size(), 0.0);
    for (int c : ycols) row[static_cast<std::size_t>(c)] = 1.0;
    row[static_cast<std::size_t>(slack)] = 1.0;

    double rest = 0.0;
    for (int c : ycols) {
      const auto ci = static_cast<std::size_t>(c);
      d_[ci] = cols_[ci].cost - pi;
      if (c == basic_col) continue;
      if (cols_[ci].lo != cols_[ci].hi) x_[ci] = d_[ci] > 0.0 ? cols_[ci].hi : cols_[ci].lo;
      rest += x_[ci];
    }
    d_[static_cast<std::size_t>(slack)] = -pi;
    d_[static_cast<std::size_t>(basic_col)] = 0.0;
    x_[static_cast<std::size_t>(basic_col)] = 1.0 - rest;

    tableau_.push_back(std::move(row));
    basic_.push_back(basic_col);
    rhs_.push_back(1.0);
    slack_col_.push_back(slack);
    row_of_col_[static_cast<std::size_t>(basic_col)] = static_cast<int>(basic_.size() - 1);
  }

  void add_problem_row(RowId r) {
    const auto ri = static_cast<std::size_t>(r);
    if (row_in_lp_[ri]) return;
    const Row& prow = p_->rows[ri];
    for (const auto& t : prow.terms) {
      const auto& info = p_->vars[static_cast<std::size_t>(t.var)];
      if (info.kind == VarKind::Assign) add_region(static_cast<std::size_t>(info.region));
      else ensure_aux_column(t.var);
    }
    row_in_lp_[ri] = 1;
    double slack_lo = 0.0, slack_hi = 0.0;
    if (prow.rel == Relation::LessEq) slack_hi = kInf;
    if (prow.rel == Relation::GreaterEq) slack_lo = -kInf;
    const int slack = add_column(-1, slack_lo, slack_hi, 0.0);

    std::vector<double> row(cols_.size(), 0.0);
    double activity = 0.0;
    for (const auto& t : prow.terms) {
      const auto c = static_cast<std::size_t>(col_of_var_[static_cast<std::size_t>(t.var)]);
      row[c] += t.coef;
      activity += t.coef * x_[c];
    }
    row[static_cast<std::size_t>(slack)] = 1.0;
    // Express the row in the current nonbasic variables.
    std::vector<std::pair<std::size_t, double>> basics;
    for (const auto& t : prow.terms) {
      const auto c = static_cast<std::size_t>(col_of_var_[static_cast<std::size_t>(t.var)]);
      if (row_of_col_[c] >= 0 && row[c] != 0.0) basics.emplace_back(static_cast<std::size_t>(row_of_col_[c]), row[c]);
    }
    for (auto [br, factor] : basics) {
      const auto& src = tableau_[br];
      for (std::size_t k = 0; k < src.size(); ++k)
        if (src[k] != 0.0) row[k] -= factor * src[k];
    }
    x_[static_cast<std::size_t>(slack)] = prow.rhs - activity;
    tableau_.push_back(std::move(row));
    basic_.push_back(slack);
    rhs_.push_back(prow.rhs);
    slack_col_.push_back(slack);
    row_of_col_[static_cast<std::size_t>(slack)] = static_cast<int>(basic_.size() - 1);
  }

  /// Recomputes basic values and reduced costs from the tableau to shed
  /// accumulated rounding error. B^-1 is read off the slack columns.
  void refresh() {
    const std::size_t m = basic_.size();
    for (std::size_t r = 0; r < m; ++r) {
      const auto& row = tableau_[r];
      double value = 0.0;
      for (std::size_t k = 0; k < m; ++k) value += row[static_cast<std::size_t>(slack_col_[k])] * rhs_[k];
      for (std::size_t c = 0; c < cols_.size(); ++c)
        if (row_of_col_[c] < 0 && row[c] != 0.0) value -= row[c] * x_[c];
      x_[static_cast<std::size_t>(basic_[r])] = value;
    }
    for (std::size_t c = 0; c < cols_.size(); ++c) {
      if (row_of_col_[c] >= 0) {
        d_[c] = 0.0;
        continue;
      }
      double dc = cols_[c].cost;
      for (std::size_t r = 0; r < m; ++r) {
        const double a = tableau_[r][c];
        if (a != 0.0) dc -= cols_[static_cast<std::size_t>(basic_[r])].cost * a;
      }
      d_[c] = dc;
    }
  }

  LpStatus dual_simplex(std::int64_t pivot_cap) {
    const std::size_t m = basic_.size();
    std::vector<std::size_t> nz;
    for (;;) {
      // Leaving row: the most infeasible basic variable.
      int leave_row = -1;
      double worst = kFeasTol;
      for (std::size_t r = 0; r < m; ++r) {
        const auto b = static_cast<std::size_t>(basic_[r]);
        const double infeas = std::max(cols_[b].lo - x_[b], x_[b] - cols_[b].hi);
        if (infeas > worst) {
          worst = infeas;
          leave_row = static_cast<int>(r);
        }
      }
      if (leave_row < 0) return LpStatus::Optimal;
      if (pivots_ >= pivot_cap) return LpStatus::IterationLimit;

      const auto lr = static_cast<std::size_t>(leave_row);
      const auto leave = static_cast<std::size_t>(basic_[lr]);
      const bool below = x_[leave] < cols_[leave].lo;
      const auto& prow = tableau_[lr];

      int enter = -1;
      double best_ratio = kInf, best_mag = 0.0;
      for (std::size_t c = 0; c < cols_.size(); ++c) {
        if (row_of_col_[c] >= 0 || cols_[c].lo == cols_[c].hi) continue;
        const double a = prow[c];
        if (std::abs(a) < kPivotTol) continue;
        const bool at_lower = x_[c] == cols_[c].lo;
        const bool eligible = below ? (at_lower ? a < 0.0 : a > 0.0) : (at_lower ? a > 0.0 : a < 0.0);
        if (!eligible) continue;
        const double dj = at_lower ? std::max(0.0, -d_[c]) : std::max(0.0, d_[c]);
        const double ratio = dj / std::abs(a);
        if (ratio < best_ratio - 1e-12 || (ratio <= best_ratio + 1e-12 && std::abs(a) > best_mag)) {
          best_ratio = ratio;
          best_mag = std::abs(a);
          enter = static_cast<int>(c);
        }
      }
      if (enter < 0) return LpStatus::Infeasible;
      pivot(lr, static_cast<std::size_t>(enter), below ? cols_[leave].lo : cols_[leave].hi, nz);
    }
  }

  void pivot(std::size_t r, std::size_t e, double target, std::vector<std::size_t>& nz) {
    ++pivots_;
    auto& prow = tableau_[r];
    const double piv = prow[e];
    const auto leave = static_cast<std::size_t>(basic_[r]);

    const double delta = (x_[leave] - target) / piv;
    x_[e] += delta;
    for (std::size_t i = 0; i < basic_.size(); ++i)
      if (i != r && tableau_[i][e] != 0.0) x_[static_cast<std::size_t>(basic_[i])] -= tableau_[i][e] * delta;
    x_[leave] = target;

    nz.clear();
    for (std::size_t k = 0; k < prow.size(); ++k)
      if (prow[k] != 0.0) nz.push_back(k);
    const double ratio = d_[e] / piv;
    for (std::size_t k : nz) d_[k] -= ratio * prow[k];
    d_[e] = 0.0;

    const double inv = 1.0 / piv;
    for (std::size_t k : nz) prow[k] *= inv;
    prow[e] = 1.0;
    for (std::size_t i = 0; i < tableau_.size(); ++i) {
      if (i == r) continue;
      auto& row = tableau_[i];
      const double f = row[e];
      if (f == 0.0) continue;
      for (std::size_t k : nz) row[k] -= f * prow[k];
      row[e] = 0.0;
    }
    row_of_col_[leave] = -1;
    row_of_col_[e] = static_cast<int>(r);
    basic_[r] = static_cast<int>(e);
  }
};

}  // namespace ruleseg

#endif  // RULESEG_LP_HPP_
