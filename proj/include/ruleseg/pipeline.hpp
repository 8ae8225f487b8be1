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

// End-to-end labeling of one instance: rescale, area weight, context fusion,
// encode, solve, decode.

#ifndef RULESEG_PIPELINE_HPP_
#define RULESEG_PIPELINE_HPP_

#include <cstddef>
#include <optional>
#include <vector>

#include "ruleseg/context.hpp"
#include "ruleseg/encode.hpp"
#include "ruleseg/scoring.hpp"
#include "ruleseg/solve.hpp"

namespace ruleseg {

struct InferenceConfig {
  ScoringParams scoring;
  SolverConfig solver;
  EncodeOptions encode;
};

enum class RuleOutcome { Satisfied, Violated, Skipped };

inline std::string_view to_string(RuleOutcome o) {
  switch (o) {
    case RuleOutcome::Satisfied: return "satisfied";
    case RuleOutcome::Violated: return "violated";
    case RuleOutcome::Skipped: return "skipped";
  }
  return "unknown";
}

struct InferenceResult {
  std::vector<LabelId> labels;  // empty when no labeling was found
  double objective = 0.0;
  SolveStatus status = SolveStatus::Aborted;
  double gap = 0.0;
  SolveStats stats;
  std::vector<RuleOutcome> rules;             // parallel to the input rules
  std::optional<std::vector<double>> prior;   // when context was applied
  std::size_t num_vars = 0;
  std::size_t num_rows = 0;
  std::vector<std::size_t> conflict;          // hard rules behind an infeasible result
};

/// Weights and candidate sets of an instance, with context fusion when a
/// model is given and the instance carries scene scores.
inline FusedScores instance_weights(const Instance& inst, const AssociationModel* model, const ScoringParams& params,
                                    std::optional<std::vector<double>>* prior_out = nullptr) {
  std::optional<std::vector<double>> prior;
  if (model && inst.scene_scores) prior = label_prior(*model, *inst.scene_scores);
  auto fused = compute_weights(inst, params, prior);
  if (prior_out) *prior_out = std::move(prior);
  return fused;
}

inline InferenceResult infer_instance(const Instance& inst, const std::vector<Rule>& rules,
                                      const AssociationModel* model, const InferenceConfig& cfg,
                                      IlpProblem* problem_out = nullptr) {
  InferenceResult out;
  const auto fused = instance_weights(inst, model, cfg.scoring, &out.prior);
  IlpProblem problem = build_problem(fused.weights, fused.candidates, rules, inst, cfg.encode);
  out.num_vars = problem.num_vars();
  out.num_rows = problem.rows.size();

  const Solution sol = solve(problem, cfg.solver);
  out.status = sol.status;
  out.gap = sol.gap;
  out.stats = sol.stats;
  out.rules.assign(rules.size(), RuleOutcome::Skipped);
  if (!sol.labels.empty()) {
    out.labels = sol.labels;
    out.objective = sol.objective;
    for (const auto& er : problem.rules)
      out.rules[er.source] =
          rule_satisfied(er, problem.structure, sol.labels) ? RuleOutcome::Satisfied : RuleOutcome::Violated;
  } else if (sol.status == SolveStatus::Infeasible) {
    out.conflict = find_conflicting_rules(fused.weights, fused.candidates, rules, inst, cfg.solver);
  }
  if (problem_out) *problem_out = std::move(problem);
  return out;
}

}  // namespace ruleseg

#endif  // RULESEG_PIPELINE_HPP_
