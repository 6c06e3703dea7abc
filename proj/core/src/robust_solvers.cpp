//
// Copyright 2026 The huberdp Authors
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
//

#include "huberdp/robust_solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "huberdp/errors.hpp"

namespace huberdp {

void solve_regularized_normal(Eigen::Ref<Matrix> gram, double lambda,
                              Eigen::Ref<Vector> rhs) {
  const Eigen::Index q = gram.rows();
  gram.diagonal().array() += lambda;
  Eigen::LLT<Eigen::Ref<Matrix>> llt(gram);
  if (llt.info() != Eigen::Success) {
    throw SolverError("normal equations are not positive definite");
  }
  // LLT accepts tiny positive pivots; treat them as singular relative to the
  // scale of the system.
  const Matrix& factor = llt.matrixLLT();
  double max_diag = 0.0;
  double min_pivot = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < q; ++i) {
    const double p = factor(i, i) * factor(i, i);
    min_pivot = std::min(min_pivot, p);
    max_diag = std::max(max_diag, p);
  }
  if (q > 0 && min_pivot <= 1e-13 * max_diag) {
    throw SolverError(fmt::format(
        "normal equations are numerically singular (pivot ratio {:.3g})",
        min_pivot / max_diag));
  }
  llt.solveInPlace(rhs);
}

Vector ridge_solve(const Eigen::Ref<const Matrix>& design,
                   const Eigen::Ref<const Vector>& targets, double lambda,
                   std::span<const double> noise) {
  if (design.rows() != targets.size()) {
    throw ConfigError(fmt::format("ridge_solve: design has {} rows, targets {}",
                                  design.rows(), targets.size()));
  }
  if (!(lambda >= 0.0)) throw DomainError("ridge_solve: lambda must be >= 0");
  const Eigen::Index q = design.cols();
  if (!noise.empty() && static_cast<Eigen::Index>(noise.size()) != q) {
    throw ConfigError("ridge_solve: noise length must equal design columns");
  }
  Matrix gram = Matrix::Zero(q, q);
  gram.selfadjointView<Eigen::Lower>().rankUpdate(design.transpose());
  Vector rhs = design.transpose() * targets;
  if (!noise.empty()) {
    rhs += Eigen::Map<const Vector>(noise.data(), q);
  }
  solve_regularized_normal(gram, lambda, rhs);
  return rhs;
}

Vector irls_weights(std::span<const double> residuals, double alpha) {
  if (!(alpha > 0.0)) throw DomainError("irls_weights: alpha must be positive");
  Vector w(static_cast<Eigen::Index>(residuals.size()));
  for (std::size_t i = 0; i < residuals.size(); ++i) {
    const double r = std::abs(residuals[i]);
    w[static_cast<Eigen::Index>(i)] =
        (r < kZeroResidual || r <= alpha) ? 1.0 : alpha / r;
  }
  return w;
}

void validate(const IrlsConfig& config) {
  if (!(config.alpha > 0.0)) throw ConfigError("IrlsConfig: alpha must be > 0");
  if (!(config.lambda > 0.0)) {
    throw ConfigError("IrlsConfig: lambda must be > 0");
  }
  if (config.iterations < 1) {
    throw ConfigError("IrlsConfig: iterations must be >= 1");
  }
}

double huber_ridge_objective(const Eigen::Ref<const Matrix>& design,
                             const Eigen::Ref<const Vector>& targets,
                             const Eigen::Ref<const Vector>& theta,
                             double alpha, double lambda) {
  const Vector r = targets - design * theta;
  double loss = 0.0;
  for (Eigen::Index i = 0; i < r.size(); ++i) loss += huber_loss(r[i], alpha);
  return loss + 0.5 * lambda * theta.squaredNorm();
}

Vector r_irls(const Eigen::Ref<const Vector>& targets,
              const Eigen::Ref<const Matrix>& design, const IrlsConfig& config,
              RandomStream& rng, IrlsTrace* trace) {
  validate(config);
  if (design.rows() != targets.size()) {
    throw ConfigError(fmt::format("r_irls: design has {} rows, targets {}",
                                  design.rows(), targets.size()));
  }
  const Eigen::Index p = design.rows();
  const Eigen::Index q = design.cols();

  Vector theta(q);
  for (Eigen::Index k = 0; k < q; ++k) theta[k] = rng.standard_normal();

  if (trace != nullptr) {
    trace->objective.clear();
    trace->objective.push_back(huber_ridge_objective(design, targets, theta,
                                                     config.alpha, config.lambda));
  }

  const bool noisy = config.noise.kind() != MechanismKind::kNone;
  Vector residual(p);
  Vector noise = Vector::Zero(q);
  Matrix weighted(p, q);
  Matrix gram(q, q);
  for (int it = 0; it < config.iterations; ++it) {
    residual.noalias() = targets - design * theta;
    const Vector w = irls_weights({residual.data(), static_cast<std::size_t>(p)},
                                  config.alpha);
    if (noisy) {
      sample_into(config.noise, {noise.data(), static_cast<std::size_t>(q)}, rng);
      if (trace != nullptr) trace->noise_values += static_cast<std::uint64_t>(q);
    }
    weighted.noalias() = w.asDiagonal() * design;
    gram.noalias() = design.transpose() * weighted;
    theta.noalias() = weighted.transpose() * targets;
    theta += noise;
    solve_regularized_normal(gram, config.lambda, theta);
    if (trace != nullptr) {
      trace->objective.push_back(huber_ridge_objective(
          design, targets, theta, config.alpha, config.lambda));
    }
  }
  return theta;
}

}  // namespace huberdp
