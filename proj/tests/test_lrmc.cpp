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

#include "huberdp/lrmc.hpp"

#include <cmath>
#include <vector>

#include <Eigen/LU>
#include <gtest/gtest.h>

#include "huberdp/data_io.hpp"
#include "huberdp/errors.hpp"

namespace huberdp {
namespace {

SyntheticData small_instance(std::uint64_t seed, double fraction = 0.5) {
  return generate_synthetic(SyntheticSpec{60, 50, 3, fraction, seed});
}

SolverConfig small_config(MechanismConfig mech = {}) {
  SolverConfig c;
  c.rank = 3;
  c.outer_iterations = 15;
  c.inner_iterations = 5;
  c.mechanism = mech;
  c.seed = 17;
  return c;
}

TEST(ObservedMatrix, Validation) {
  EXPECT_THROW(ObservedMatrix(2, 2, {{2, 0, 1.0}}), ConfigError);
  EXPECT_THROW(ObservedMatrix(2, 2, {{0, 0, 1.0}, {0, 0, 2.0}}), ConfigError);
  EXPECT_THROW(ObservedMatrix(2, 2, {{0, 0, std::nan("")}}), ConfigError);
  EXPECT_THROW(ObservedMatrix(2, 2, {}, {5.0, 1.0}), ConfigError);
  const ObservedMatrix m(2, 4, {{0, 1, 3.0}, {1, 3, 4.0}});
  EXPECT_DOUBLE_EQ(m.observed_fraction(), 0.25);
  EXPECT_FALSE(m.fully_observed());
  const IndexSets s = row_index_sets(m);
  EXPECT_EQ(s.by_row[0], std::vector<std::size_t>{1});
  EXPECT_EQ(s.by_col[3], std::vector<std::size_t>{1});
  EXPECT_TRUE(s.by_col[0].empty());
}

TEST(Solver, ConfigValidation) {
  const auto data = small_instance(1);
  SolverConfig c = small_config();
  c.rank = 51;
  EXPECT_THROW(noisy_als(data.observed, c), ConfigError);
  c = small_config();
  c.lambda = 0.0;
  EXPECT_THROW(noisy_als(data.observed, c), ConfigError);
  c = small_config();
  c.outer_iterations = 0;
  EXPECT_THROW(irls_huber(data.observed, c), ConfigError);
  EXPECT_EQ(parse_solver_kind("irls"), SolverKind::kIrls);
  EXPECT_THROW(parse_solver_kind("sgd"), ConfigError);
}

TEST(Als, RowSweepSolvesEachRidgeProblem) {
  const auto data = small_instance(2);
  const IndexSets sets = row_index_sets(data.observed);
  Matrix v_before;
  bool checked = false;
  SolveOptions opt;
  opt.observer = [&](int it, HalfSweep half, const FactorPair& f) {
    if (half == HalfSweep::kColumns) {
      v_before = f.V;
      return;
    }
    if (it != 2) return;
    for (std::size_t i = 0; i < 60; i += 7) {
      const auto& cols = sets.by_row[i];
      Matrix a(static_cast<Eigen::Index>(cols.size()), 3);
      Vector y(a.rows());
      for (std::size_t k = 0; k < cols.size(); ++k) {
        a.row(static_cast<Eigen::Index>(k)) = v_before.row(static_cast<Eigen::Index>(cols[k]));
        y[static_cast<Eigen::Index>(k)] =
            data.truth(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(cols[k]));
      }
      const Matrix g = a.transpose() * a + 0.5 * Matrix::Identity(3, 3);
      const Vector expected = g.fullPivLu().inverse() * (a.transpose() * y);
      EXPECT_LT((f.U.row(static_cast<Eigen::Index>(i)).transpose() - expected).norm(), 1e-10);
    }
    checked = true;
  };
  noisy_als(data.observed, small_config(), opt);
  EXPECT_TRUE(checked);
}

TEST(Als, NoiselessObjectiveIsMonotone) {
  const auto data = small_instance(3);
  std::vector<double> objective;
  SolveOptions opt;
  opt.observer = [&](int, HalfSweep, const FactorPair& f) {
    objective.push_back(als_objective(data.observed, f, 0.5));
  };
  noisy_als(data.observed, small_config(), opt);
  ASSERT_EQ(objective.size(), 31u);
  for (std::size_t k = 1; k < objective.size(); ++k) {
    EXPECT_LE(objective[k], objective[k - 1] * (1.0 + 1e-12));
  }
}

TEST(Als, RecoversLowRankMatrix) {
  const auto data = small_instance(4);
  SolverConfig c = small_config();
  c.outer_iterations = 50;
  const FactorPair f = noisy_als(data.observed, c);
  EXPECT_LT(rmse(data.truth, f), 0.1);
  EXPECT_LT(rmse(data.observed, f, RmseScope::kObservedEntries), 0.1);
}

TEST(Irls, NoiselessMatchesAls) {
  const auto data = small_instance(5);
  SolverConfig c = small_config();
  c.outer_iterations = 50;
  c.huber_loss_alpha = 3.0;
  const double als = rmse(data.truth, noisy_als(data.observed, c));
  const double irls = rmse(data.truth, irls_huber(data.observed, c));
  EXPECT_NEAR(irls, als, 0.01);
}

TEST(Solver, NoiseAccounting) {
  const auto data = small_instance(6);
  SolveStats als_stats, irls_stats, clean_stats;
  SolveOptions opt;
  opt.stats = &als_stats;
  const SolverConfig c = small_config(MechanismConfig::laplace(1.0));
  noisy_als(data.observed, c, opt);
  EXPECT_EQ(als_stats.noise_values, 15u * 50u * 3u);
  EXPECT_EQ(als_stats.noise_vectors, 15u * 50u);
  EXPECT_EQ(als_stats.row_sweep_noise_draws, 0u);
  EXPECT_GE(als_stats.noise_stream_draws, als_stats.noise_values * 2);

  opt.stats = &irls_stats;
  irls_huber(data.observed, c, opt);
  EXPECT_EQ(irls_stats.noise_values, 15u * 50u * 5u * 3u);
  EXPECT_EQ(irls_stats.row_sweep_noise_draws, 0u);

  opt.stats = &clean_stats;
  noisy_als(data.observed, small_config(), opt);
  EXPECT_EQ(clean_stats.noise_values, 0u);
  EXPECT_EQ(clean_stats.noise_stream_draws, 0u);
}

TEST(Solver, ThreadCountDoesNotChangeResults) {
  const auto data = small_instance(7);
  for (SolverKind kind : {SolverKind::kAls, SolverKind::kIrls}) {
    const SolverConfig c = small_config(MechanismConfig::huber(1.0));
    SolveOptions one, many;
    many.threads = 5;
    const FactorPair a = solve(kind, data.observed, c, one);
    const FactorPair b = solve(kind, data.observed, c, many);
    EXPECT_EQ(a.U, b.U);
    EXPECT_EQ(a.V, b.V);
  }
}

TEST(Solver, SeedControlsNoise) {
  const auto data = small_instance(8);
  SolverConfig c = small_config(MechanismConfig::gaussian(1.0));
  const FactorPair a = noisy_als(data.observed, c);
  const FactorPair b = noisy_als(data.observed, c);
  EXPECT_EQ(a.V, b.V);
  c.seed = 18;
  EXPECT_NE(noisy_als(data.observed, c).V, a.V);
}

TEST(Solver, NoiseDegradesAccuracy) {
  const auto data = small_instance(9);
  const double clean = rmse(data.truth, noisy_als(data.observed, small_config()));
  const double noisy =
      rmse(data.truth, noisy_als(data.observed, small_config(MechanismConfig::gaussian(2.0))));
  EXPECT_GT(noisy, clean);
}

TEST(Solver, EmptyColumnGetsPureNoiseUpdate) {
  // Column 2 has no observations: ALS sets it to t / lambda.
  const ObservedMatrix m(3, 3, {{0, 0, 1.0}, {1, 1, 2.0}, {2, 0, 1.5}, {0, 1, 0.5}});
  SolverConfig c;
  c.rank = 2;
  c.outer_iterations = 3;
  const FactorPair f = noisy_als(m, c);
  EXPECT_EQ(f.V.row(2).norm(), 0.0);
}

TEST(Metrics, Rmse) {
  FactorPair f{Matrix::Ones(2, 1), Matrix::Ones(3, 1)};
  Matrix truth = Matrix::Ones(2, 3);
  truth(1, 2) = 4.0;
  EXPECT_NEAR(rmse(truth, f), std::sqrt(9.0 / 6.0), 1e-15);
  const std::vector<Entry> cells{{1, 2, 4.0}, {0, 0, 1.0}};
  EXPECT_NEAR(rmse(cells, f), std::sqrt(4.5), 1e-15);
  const ObservedMatrix partial(2, 3, cells);
  EXPECT_THROW(rmse(partial, f, RmseScope::kAllEntries), UsageError);
  EXPECT_NEAR(rmse(partial, f, RmseScope::kObservedEntries), std::sqrt(4.5), 1e-15);
  EXPECT_THROW(rmse(std::span<const Entry>(), f), UsageError);
  EXPECT_THROW(rmse(Matrix::Ones(3, 3), f), UsageError);
}

TEST(Metrics, CompleteClips) {
  FactorPair f{Matrix::Constant(2, 1, 3.0), Matrix::Constant(2, 1, 3.0)};
  f.V(1, 0) = -1.0;
  const ObservedMatrix m(2, 2, {});
  const Matrix raw = complete(m, f);
  const Matrix clipped = complete(m, f, true);
  EXPECT_EQ(raw(0, 0), 9.0);
  EXPECT_EQ(clipped(0, 0), 5.0);
  EXPECT_EQ(clipped(0, 1), 1.0);
  EXPECT_THROW(complete(ObservedMatrix(3, 2, {}), f), UsageError);
}

}  // namespace
}  // namespace huberdp
