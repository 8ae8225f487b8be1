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

// Scene-category -> label association learned by non-negative L1-regularized
// least squares,
//
//   min_{W >= 0}  ||Y - W X||_F^2 + lambda ||W||_1,
//
// with X (m x N) the scene confidences of N training images and Y (l x N)
// rarity-weighted label presence. Solved by monotone accelerated proximal
// gradient with backtracking; a final support-restricted solve polishes the
// result so the optimality conditions hold to near machine precision.

#ifndef RULESEG_CONTEXT_HPP_
#define RULESEG_CONTEXT_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "ruleseg/model.hpp"

namespace ruleseg {

struct AssociationModel {
  Matrix W;  // labels x scene categories, non-negative
  double lambda = 0.0;
  std::vector<std::string> labels;
  std::vector<std::string> scene_categories;
};

struct FitOptions {
  int max_iterations = 5000;
  double rel_tol = 1e-9;
  double kkt_tol = 1e-10;
  int power_iterations = 50;
  bool polish = true;
};

struct FitReport {
  int iterations = 0;
  double objective = 0.0;
  double kkt_residual = 0.0;
  std::vector<double> history;  // F(W_k), one entry per iteration including k = 0
};

/// Y[i][t] = 1 - n(l_i) / sum_j n(l_j) if label i occurs in instance t, else 0.
inline Matrix build_presence_targets(const Corpus& corpus) {
  const auto counts = label_counts(corpus);
  double total = 0.0;
  for (auto c : counts) total += static_cast<double>(c);
  const auto l = corpus.labels.size();
  Matrix Y = Matrix::Zero(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(corpus.size()));
  for (std::size_t t = 0; t < corpus.size(); ++t) {
    const auto present = present_labels(corpus.samples[t].truth->labels, l);
    for (std::size_t i = 0; i < l; ++i)
      if (present[i])
        Y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) = 1.0 - static_cast<double>(counts[i]) / total;
  }
  return Y;
}

/// Stacks per-instance scene confidences into an m x N matrix.
inline Matrix scene_matrix(const Corpus& corpus) {
  if (corpus.empty()) throw InputError("scene_matrix: empty corpus");
  std::size_t m = 0;
  for (const auto& s : corpus.samples) {
    if (!s.instance.scene_scores) throw InputError("instance '" + s.instance.name + "' has no scene_scores");
    if (m == 0) m = s.instance.scene_scores->size();
    if (s.instance.scene_scores->size() != m || m == 0)
      throw InputError("instance '" + s.instance.name + "' has inconsistent scene_scores length");
  }
  Matrix X(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(corpus.size()));
  for (std::size_t t = 0; t < corpus.size(); ++t)
    for (std::size_t k = 0; k < m; ++k)
      X(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(t)) = (*corpus.samples[t].instance.scene_scores)[k];
  return X;
}

namespace detail {

inline double smooth_loss(const Matrix& W, const Matrix& X, const Matrix& Y) { return (Y - W * X).squaredNorm(); }

inline Matrix smooth_gradient(const Matrix& W, const Matrix& X, const Matrix& Y) {
  return -2.0 * (Y - W * X) * X.transpose();
}

/// Largest eigenvalue of the PSD matrix M by power iteration from a constant vector.
inline double power_estimate(const Matrix& M, int iterations) {
  if (M.rows() == 0) return 0.0;
  Vector v = Vector::Constant(M.rows(), 1.0 / std::sqrt(static_cast<double>(M.rows())));
  double estimate = 0.0;
  for (int k = 0; k < iterations; ++k) {
    Vector next = M * v;
    const double norm = next.norm();
    if (norm == 0.0) return 0.0;
    v = next / norm;
    estimate = v.dot(M * v);
  }
  return estimate;
}

}  // namespace detail

inline double association_objective(const Matrix& W, const Matrix& X, const Matrix& Y, double lambda) {
  return detail::smooth_loss(W, X, Y) + lambda * W.cwiseAbs().sum();
}

/// Largest violation of the first-order conditions of the non-negative lasso:
/// |g_ij + lambda| for W_ij > 0 and max(0, -(g_ij + lambda)) for W_ij = 0.
inline double association_kkt_residual(const Matrix& W, const Matrix& X, const Matrix& Y, double lambda) {
  const Matrix G = detail::smooth_gradient(W, X, Y);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < W.rows(); ++i)
    for (Eigen::Index j = 0; j < W.cols(); ++j) {
      const double g = G(i, j) + lambda;
      worst = std::max(worst, W(i, j) > 0.0 ? std::abs(g) : std::max(0.0, -g));
    }
  return worst;
}

/// 0.1 * max |grad F(0)|, the default regularization weight.
inline double default_lambda(const Matrix& X, const Matrix& Y) {
  if (X.size() == 0 || Y.size() == 0) return 0.0;
  return 0.1 * (2.0 * Y * X.transpose()).cwiseAbs().maxCoeff();
}

namespace detail {

/// Re-solves each label row on its current support. Rows separate, so the
/// candidate is accepted row by row when it stays positive and lowers the
/// row's first-order residual.
inline void polish_support(Matrix& W, const Matrix& X, const Matrix& Y, double lambda) {
  for (Eigen::Index r = 0; r < W.rows(); ++r) {
    std::vector<Eigen::Index> support;
    for (Eigen::Index j = 0; j < W.cols(); ++j)
      if (W(r, j) > 0.0) support.push_back(j);
    if (support.empty()) continue;
    const auto s = static_cast<Eigen::Index>(support.size());
    Matrix Xs(s, X.cols());
    for (Eigen::Index k = 0; k < s; ++k) Xs.row(k) = X.row(support[static_cast<std::size_t>(k)]);
    const Matrix H = Xs * Xs.transpose();
    const Vector rhs = Xs * Y.row(r).transpose() - Vector::Constant(s, lambda / 2.0);
    const Vector ws = H.completeOrthogonalDecomposition().solve(rhs);
    if (!ws.allFinite() || (H * ws - rhs).norm() > 1e-9 * (1.0 + rhs.norm())) continue;
    if ((ws.array() <= 0.0).any()) continue;

    Matrix row_old = W.row(r), row_new = Matrix::Zero(1, W.cols());
    for (Eigen::Index k = 0; k < s; ++k) row_new(0, support[static_cast<std::size_t>(k)]) = ws(k);
    const Matrix Yr = Y.row(r);
    const double before = association_kkt_residual(row_old, X, Yr, lambda);
    const double after = association_kkt_residual(row_new, X, Yr, lambda);
    const double f_before = association_objective(row_old, X, Yr, lambda);
    const double f_after = association_objective(row_new, X, Yr, lambda);
    if (after < before && f_after <= f_before + 1e-12 * (1.0 + f_before)) W.row(r) = row_new;
  }
}

}  // namespace detail

/// Solves the non-negative lasso for W (l x m) given X (m x N) and Y (l x N).
inline Matrix fit_association_matrix(const Matrix& X, const Matrix& Y, double lambda, const FitOptions& opts = {},
                                     FitReport* report = nullptr) {
  if (X.cols() != Y.cols()) throw InputError("fit_association: X and Y must have the same number of columns");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InputError("fit_association: lambda must be finite and >= 0");
  if (!X.allFinite() || !Y.allFinite()) throw InputError("fit_association: non-finite input");

  const Matrix XXt = X * X.transpose();
  double L = 2.0 * detail::power_estimate(XXt, opts.power_iterations);
  if (!(L > 0.0)) L = 1.0;

  Matrix W = Matrix::Zero(Y.rows(), X.rows());
  Matrix extrapolated = W;
  double t = 1.0;
  double F = association_objective(W, X, Y, lambda);
  FitReport local;
  local.history.push_back(F);

  // KKT tolerance relative to the gradient scale at W = 0.
  const double kkt_scale = std::max(1.0, (2.0 * Y * X.transpose()).cwiseAbs().maxCoeff());
  int k = 0;
  for (; k < opts.max_iterations; ++k) {
    const double f_y = detail::smooth_loss(extrapolated, X, Y);
    const Matrix G = detail::smooth_gradient(extrapolated, X, Y);
    Matrix Z;
    for (;;) {
      Z = (extrapolated - G / L).array() - lambda / L;
      Z = Z.cwiseMax(0.0);
      const Matrix D = Z - extrapolated;
      const double model = f_y + (G.array() * D.array()).sum() + 0.5 * L * D.squaredNorm();
      if (detail::smooth_loss(Z, X, Y) <= model + 1e-12 * (1.0 + std::abs(model))) break;
      L *= 2.0;
    }
    const double FZ = association_objective(Z, X, Y, lambda);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    if (FZ <= F) {
      const Matrix previous = W;
      const double decrease = F - FZ;
      W = Z;
      const double F_prev = F;
      F = FZ;
      extrapolated = W + ((t - 1.0) / t_next) * (W - previous);
      t = t_next;
      local.history.push_back(F);
      const bool small_step = F_prev <= 0.0 || decrease / F_prev < opts.rel_tol;
      if (small_step && association_kkt_residual(W, X, Y, lambda) <= opts.kkt_tol * kkt_scale) {
        ++k;
        break;
      }
    } else {
      // Momentum overshot: restart from the current iterate.
      extrapolated = W;
      t = 1.0;
      local.history.push_back(F);
    }
  }

  if (opts.polish) {
    detail::polish_support(W, X, Y, lambda);
    F = association_objective(W, X, Y, lambda);
    if (F <= local.history.back()) local.history.push_back(F);
  }

  local.iterations = k;
  local.objective = association_objective(W, X, Y, lambda);
  local.kkt_residual = association_kkt_residual(W, X, Y, lambda);
  if (report) *report = std::move(local);
  return W;
}

/// Fits the association model on a corpus with ground truth and scene scores.
/// A negative `lambda` selects default_lambda.
inline AssociationModel fit_association(const Corpus& corpus, double lambda = -1.0, const FitOptions& opts = {},
                                        FitReport* report = nullptr) {
  const Matrix X = scene_matrix(corpus);
  const Matrix Y = build_presence_targets(corpus);
  AssociationModel model;
  model.lambda = lambda < 0.0 ? default_lambda(X, Y) : lambda;
  model.W = fit_association_matrix(X, Y, model.lambda, opts, report);
  model.labels = corpus.labels.names();
  model.scene_categories = corpus.scene_categories;
  if (model.scene_categories.empty())
    for (Eigen::Index k = 0; k < X.rows(); ++k) model.scene_categories.push_back("scene_" + std::to_string(k));
  return model;
}

/// p = W s rescaled by its largest entry; an all-zero product yields 1s.
inline std::vector<double> label_prior(const AssociationModel& model, const std::vector<double>& scene_scores) {
  if (static_cast<Eigen::Index>(scene_scores.size()) != model.W.cols())
    throw InputError("label_prior: scene score length does not match the model");
  const Vector s = Eigen::Map<const Vector>(scene_scores.data(), static_cast<Eigen::Index>(scene_scores.size()));
  const Vector p = model.W * s;
  std::vector<double> prior(static_cast<std::size_t>(p.size()), 1.0);
  const double top = p.size() ? p.maxCoeff() : 0.0;
  if (!(top > 0.0)) return prior;
  for (Eigen::Index i = 0; i < p.size(); ++i) prior[static_cast<std::size_t>(i)] = std::max(0.0, p(i)) / top;
  return prior;
}

}  // namespace ruleseg

#endif  // RULESEG_CONTEXT_HPP_
