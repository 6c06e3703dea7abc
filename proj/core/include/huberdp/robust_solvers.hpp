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

#ifndef HUBERDP_ROBUST_SOLVERS_HPP_
#define HUBERDP_ROBUST_SOLVERS_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "huberdp/mechanisms.hpp"
#include "huberdp/random.hpp"

namespace huberdp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Solves (gram + lambda I) x = rhs in place of rhs through a Cholesky
// factorization. `gram` must be symmetric positive semidefinite; only its
// lower triangle is read. Throws SolverError when the regularized system is
// not numerically positive definite.
void solve_regularized_normal(Eigen::Ref<Matrix> gram, double lambda,
                              Eigen::Ref<Vector> rhs);

// (A^T A + lambda I)^{-1} (A^T y + t). An empty `noise` span means t = 0.
Vector ridge_solve(const Eigen::Ref<const Matrix>& design,
                   const Eigen::Ref<const Vector>& targets, double lambda,
                   std::span<const double> noise = {});

// Residuals below this magnitude get weight 1, the limit of psi(r) / r.
inline constexpr double kZeroResidual = 1e-12;

// w_i = psi_alpha(r_i) / r_i = min(1, alpha / |r_i|).
Vector irls_weights(std::span<const double> residuals, double alpha);

struct IrlsConfig {
  double alpha = 1.0;  // Huber loss transition
  double lambda = 0.5;
  int iterations = 20;  // K
  MechanismConfig noise;
};

void validate(const IrlsConfig& config);

// sum_i rho_alpha(y_i - a_i^T theta) + (lambda / 2) ||theta||^2. Each R-IRLS
// step is a majorize-minimize step on this objective.
double huber_ridge_objective(const Eigen::Ref<const Matrix>& design,
                             const Eigen::Ref<const Vector>& targets,
                             const Eigen::Ref<const Vector>& theta,
                             double alpha, double lambda);

struct IrlsTrace {
  // Objective at the initial point followed by one entry per iteration.
  std::vector<double> objective;
  std::uint64_t noise_values = 0;
};

// Regularized IRLS: theta ~ N(0, I) from `rng`, then K rounds of
//   W <- diag(psi(r) / r),  t <- noise draw,
//   theta <- (A^T W A + lambda I)^{-1} (A^T W y + t).
Vector r_irls(const Eigen::Ref<const Vector>& targets,
              const Eigen::Ref<const Matrix>& design, const IrlsConfig& config,
              RandomStream& rng, IrlsTrace* trace = nullptr);

}  // namespace huberdp

#endif  // HUBERDP_ROBUST_SOLVERS_HPP_
