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

#include <cmath>
#include <vector>

#include <Eigen/LU>
#include <gtest/gtest.h>

#include "huberdp/errors.hpp"
#include "oracles.hpp"

namespace huberdp {
namespace {

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, RandomStream& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.standard_normal();
  return m;
}

Vector random_vector(Eigen::Index n, RandomStream& rng) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.standard_normal();
  return v;
}

// (A^T W A + lambda I)^{-1} (A^T W y + t) through an explicit LU inverse.
Vector explicit_solution(const Matrix& a, const Vector& w, const Vector& y, double lambda,
                         const Vector& t) {
  const Matrix g = a.transpose() * w.asDiagonal() * a +
                   lambda * Matrix::Identity(a.cols(), a.cols());
  return g.fullPivLu().inverse() * (a.transpose() * w.asDiagonal() * y + t);
}

TEST(RidgeSolve, MatchesExplicitInverse) {
  RandomStream rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = random_matrix(30, 6, rng);
    const Vector y = random_vector(30, rng);
    const Vector t = random_vector(6, rng);
    const Vector expected = explicit_solution(a, Vector::Ones(30), y, 0.5, t);
    const Vector got = ridge_solve(a, y, 0.5, {t.data(), 6});
    EXPECT_LT((got - expected).norm(), 1e-10 * (1.0 + expected.norm()));
    const Vector plain = ridge_solve(a, y, 0.5);
    EXPECT_LT((plain - explicit_solution(a, Vector::Ones(30), y, 0.5, Vector::Zero(6))).norm(),
              1e-10);
  }
}

TEST(RidgeSolve, UnderdeterminedSystemIsRegularized) {
  RandomStream rng(2);
  const Matrix a = random_matrix(2, 5, rng);
  const Vector y = random_vector(2, rng);
  const Vector got = ridge_solve(a, y, 0.5);
  EXPECT_LT((got - explicit_solution(a, Vector::Ones(2), y, 0.5, Vector::Zero(5))).norm(), 1e-10);
  // No observations: the solution is the scaled noise.
  const Matrix empty(0, 3);
  const Vector none(0);
  const std::vector<double> t{1.0, -2.0, 0.5};
  const Vector s = ridge_solve(empty, none, 0.5, t);
  EXPECT_NEAR(s[1], -4.0, 1e-14);
}

TEST(RidgeSolve, SingularSystemsThrow) {
  const Matrix a = Matrix::Ones(4, 2);  // rank 1
  const Vector y = Vector::Ones(4);
  EXPECT_THROW(ridge_solve(a, y, 0.0), SolverError);
  EXPECT_NO_THROW(ridge_solve(a, y, 0.5));
  EXPECT_THROW(ridge_solve(a, Vector::Ones(3), 0.5), ConfigError);
  EXPECT_THROW(ridge_solve(a, y, -1.0), DomainError);
}

TEST(IrlsWeights, ClampedRatio) {
  const std::vector<double> r{0.0, 0.5, -1.0, 4.0, -8.0, 1e-13};
  const Vector w = irls_weights(r, 2.0);
  EXPECT_DOUBLE_EQ(w[0], 1.0);
  EXPECT_DOUBLE_EQ(w[1], 1.0);
  EXPECT_DOUBLE_EQ(w[2], 1.0);
  EXPECT_DOUBLE_EQ(w[3], 0.5);
  EXPECT_DOUBLE_EQ(w[4], 0.25);
  EXPECT_DOUBLE_EQ(w[5], 1.0);
  // w r equals the influence function.
  for (std::size_t i = 1; i < 5; ++i) {
    EXPECT_DOUBLE_EQ(w[static_cast<Eigen::Index>(i)] * r[i], huber_influence(r[i], 2.0));
  }
}

TEST(RIrls, LargeAlphaReducesToRidge) {
  RandomStream data(3);
  const Matrix a = random_matrix(40, 5, data);
  const Vector y = random_vector(40, data);
  RandomStream rng(4);
  const Vector theta = r_irls(y, a, IrlsConfig{1e6, 0.5, 1, {}}, rng);
  EXPECT_LT((theta - ridge_solve(a, y, 0.5)).norm(), 1e-10);
}

TEST(RIrls, ConvergesToStationaryPoint) {
  RandomStream data(5);
  const Matrix a = random_matrix(60, 4, data);
  Vector y = a * Vector::LinSpaced(4, -1.0, 1.0);
  for (int i = 0; i < 60; i += 7) y[i] += 25.0;  // outliers
  RandomStream rng(6);
  const IrlsConfig cfg{1.0, 0.5, 300, {}};
  const Vector theta = r_irls(y, a, cfg, rng);
  // Gradient of the objective by central differences.
  for (Eigen::Index k = 0; k < 4; ++k) {
    const double g = oracle::central_difference(
        [&](double x) {
          Vector t = theta;
          t[k] = x;
          return huber_ridge_objective(a, y, t, cfg.alpha, cfg.lambda);
        },
        theta[k], 1e-6);
    EXPECT_NEAR(g, 0.0, 1e-5);
  }
  // Outliers barely move the robust fit; they wreck the ridge fit.
  const Vector truth = Vector::LinSpaced(4, -1.0, 1.0);
  EXPECT_LT((theta - truth).norm(), 0.5 * (ridge_solve(a, y, 0.5) - truth).norm());
}

TEST(RIrls, ObjectiveIsMonotone) {
  RandomStream data(7);
  for (int inst = 0; inst < 25; ++inst) {
    const Matrix a = random_matrix(50, 8, data);
    const Vector y = random_vector(50, data) * 3.0;
    RandomStream rng(derive_seed(8, {static_cast<std::uint64_t>(inst)}));
    IrlsTrace trace;
    r_irls(y, a, IrlsConfig{0.7, 0.5, 20, {}}, rng, &trace);
    ASSERT_EQ(trace.objective.size(), 21u);
    for (std::size_t k = 1; k < trace.objective.size(); ++k) {
      EXPECT_LE(trace.objective[k], trace.objective[k - 1] + 1e-10);
    }
  }
}

TEST(RIrls, NoiseIsInjectedEachIteration) {
  RandomStream data(9);
  const Matrix a = random_matrix(20, 3, data);
  const Vector y = random_vector(20, data);
  RandomStream r1(10), r2(10);
  IrlsTrace trace;
  const Vector noisy = r_irls(y, a, IrlsConfig{1.0, 0.5, 5, MechanismConfig::huber(1.0)}, r1,
                              &trace);
  const Vector clean = r_irls(y, a, IrlsConfig{1.0, 0.5, 5, {}}, r2);
  EXPECT_EQ(trace.noise_values, 15u);
  EXPECT_GT((noisy - clean).norm(), 1e-6);
}

TEST(RIrls, RejectsBadConfig) {
  RandomStream rng(1);
  const Matrix a = Matrix::Identity(3, 3);
  const Vector y = Vector::Ones(3);
  EXPECT_THROW(r_irls(y, a, IrlsConfig{0.0, 0.5, 5, {}}, rng), ConfigError);
  EXPECT_THROW(r_irls(y, a, IrlsConfig{1.0, 0.0, 5, {}}, rng), ConfigError);
  EXPECT_THROW(r_irls(y, a, IrlsConfig{1.0, 0.5, 0, {}}, rng), ConfigError);
  EXPECT_THROW(r_irls(Vector::Ones(2), a, IrlsConfig{}, rng), ConfigError);
}

}  // namespace
}  // namespace huberdp
