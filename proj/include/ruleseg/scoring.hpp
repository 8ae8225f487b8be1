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

// Turns raw classifier scores into the objective weights w(i, j):
// sigmoid rescaling, area weighting and fusion with a scene-level prior.

#ifndef RULESEG_SCORING_HPP_
#define RULESEG_SCORING_HPP_

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "ruleseg/metrics.hpp"
#include "ruleseg/model.hpp"

namespace ruleseg {

/// Candidate labels per region, ascending label ids.
using Candidates = std::vector<std::vector<LabelId>>;

struct SigmoidParams {
  double a = 2.0;  // slope, > 0
  double b = 0.5;  // midpoint
};

struct ScoringParams {
  SigmoidParams sigmoid;
  double beta = 1.0;
  double prune_eps = 0.01;
  bool rescale = true;
  bool area_weighting = true;
};

struct FusedScores {
  Matrix weights;
  Candidates candidates;
};

inline Candidates all_candidates(std::size_t num_regions, std::size_t num_labels) {
  std::vector<LabelId> every(num_labels);
  for (std::size_t j = 0; j < num_labels; ++j) every[j] = static_cast<LabelId>(j);
  return Candidates(num_regions, every);
}

/// Index of the largest entry of row `i`; the lowest index wins ties.
inline LabelId row_argmax(const Matrix& m, Eigen::Index i) {
  Eigen::Index best = 0;
  for (Eigen::Index j = 1; j < m.cols(); ++j)
    if (m(i, j) > m(i, best)) best = j;
  return static_cast<LabelId>(best);
}

inline std::vector<LabelId> argmax_labels(const Matrix& m) {
  std::vector<LabelId> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) out[static_cast<std::size_t>(i)] = row_argmax(m, i);
  return out;
}

/// Elementwise logistic rescaling 1 / (1 + exp(-a (x - b))).
inline Matrix rescale_scores(const Matrix& raw, const SigmoidParams& p) {
  if (!(p.a > 0.0) || !std::isfinite(p.a) || !std::isfinite(p.b))
    throw InputError("rescale_scores: slope must be positive and parameters finite");
  if (!raw.allFinite()) throw InputError("rescale_scores: non-finite raw score");
  return raw.unaryExpr([&](double x) { return 1.0 / (1.0 + std::exp(-p.a * (x - p.b))); });
}

/// Multiplies each row by its region's share of the total area.
inline Matrix area_weight(const Matrix& probs, const std::vector<Region>& regions) {
  if (static_cast<std::size_t>(probs.rows()) != regions.size())
    throw InputError("area_weight: row count does not match region count");
  double total = 0.0;
  for (const auto& r : regions) total += static_cast<double>(r.area);
  if (!(total > 0.0)) throw InputError("area_weight: total region area is zero");
  Matrix out = probs;
  for (std::size_t i = 0; i < regions.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) *= static_cast<double>(regions[i].area) / total;
  return out;
}

/// Multiplies column j by prior[j]^beta and prunes labels whose prior falls
/// below `prune_eps`. A label that is some region's argmax under `weights`
/// is never pruned, so every region keeps at least one candidate.
inline FusedScores fuse_with_context(const Matrix& weights, const std::vector<double>& prior, double beta,
                                     double prune_eps) {
  const auto l = static_cast<std::size_t>(weights.cols());
  if (prior.size() != l) throw InputError("fuse_with_context: prior length does not match label count");
  if (!(beta >= 0.0)) throw InputError("fuse_with_context: beta must be non-negative");

  FusedScores out;
  out.weights = weights;
  for (std::size_t j = 0; j < l; ++j) {
    const double factor = std::pow(prior[j], beta);
    out.weights.col(static_cast<Eigen::Index>(j)) *= factor;
  }

  std::vector<char> keep(l, 0);
  for (std::size_t j = 0; j < l; ++j) keep[j] = prior[j] >= prune_eps;
  for (Eigen::Index i = 0; i < weights.rows(); ++i) keep[static_cast<std::size_t>(row_argmax(weights, i))] = 1;

  std::vector<LabelId> kept;
  for (std::size_t j = 0; j < l; ++j)
    if (keep[j]) kept.push_back(static_cast<LabelId>(j));
  out.candidates.assign(static_cast<std::size_t>(weights.rows()), kept);
  return out;
}

/// Best label of each region restricted to its candidate set.
inline std::vector<LabelId> candidate_argmax(const Matrix& weights, const Candidates& candidates) {
  std::vector<LabelId> out(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& cand = candidates[i];
    LabelId best = cand.front();
    for (LabelId j : cand)
      if (weights(static_cast<Eigen::Index>(i), j) > weights(static_cast<Eigen::Index>(i), best)) best = j;
    out[i] = best;
  }
  return out;
}

/// Raw scores -> weights and candidate sets. `prior` is optional; without
/// it every label stays a candidate.
inline FusedScores compute_weights(const Instance& instance, const ScoringParams& params,
                                   const std::optional<std::vector<double>>& prior) {
  Matrix w = params.rescale ? rescale_scores(instance.raw_scores, params.sigmoid) : instance.raw_scores;
  if (params.area_weighting) w = area_weight(w, instance.regions);
  if (prior) return fuse_with_context(w, *prior, params.beta, params.prune_eps);
  FusedScores out;
  out.candidates = all_candidates(static_cast<std::size_t>(w.rows()), static_cast<std::size_t>(w.cols()));
  out.weights = std::move(w);
  return out;
}

struct SigmoidGrid {
  std::vector<double> slopes{1.0, 2.0, 4.0};
  std::vector<double> midpoints{0.3, 0.5, 0.7};
};

/// Grid search over sigmoid parameters on a validation set, maximizing the
/// pooled per-class accuracy of context-fused argmax labeling. Samples
/// without ground truth are skipped. `priors` is parallel to `validation`.
/// Ties keep the earliest grid point.
inline SigmoidParams tune_sigmoid(const Corpus& validation,
                                  const std::vector<std::optional<std::vector<double>>>& priors,
                                  ScoringParams base, const SigmoidGrid& grid = {}) {
  if (priors.size() != validation.size()) throw InputError("tune_sigmoid: one prior slot per sample required");
  SigmoidParams best = base.sigmoid;
  double best_score = -1.0;
  for (double a : grid.slopes) {
    for (double b : grid.midpoints) {
      base.sigmoid = {a, b};
      ClassAreaTally tally(validation.labels.size());
      for (std::size_t s = 0; s < validation.size(); ++s) {
        const auto& sample = validation.samples[s];
        if (!sample.truth) continue;
        const auto fused = compute_weights(sample.instance, base, priors[s]);
        tally.add(candidate_argmax(fused.weights, fused.candidates), sample.truth->labels, sample.instance.regions);
      }
      const double score = tally.per_class();
      if (score > best_score) {
        best_score = score;
        best = base.sigmoid;
      }
    }
  }
  return best;
}

}  // namespace ruleseg

#endif  // RULESEG_SCORING_HPP_
