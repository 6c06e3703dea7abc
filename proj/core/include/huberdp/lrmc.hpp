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

#ifndef HUBERDP_LRMC_HPP_
#define HUBERDP_LRMC_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "huberdp/mechanisms.hpp"
#include "huberdp/robust_solvers.hpp"

namespace huberdp {

// One observed cell, 0-indexed.
struct Entry {
  std::size_t row = 0;
  std::size_t col = 0;
  double value = 0.0;

  bool operator==(const Entry&) const = default;
};

struct ValueRange {
  double lo = 1.0;
  double hi = 5.0;

  double width() const { return hi - lo; }
  bool operator==(const ValueRange&) const = default;
};

// Partially observed m x n matrix: the observed cells Omega and their values.
// Construction validates: indices in range, no duplicate cell, finite values,
// lo < hi.
class ObservedMatrix {
 public:
  ObservedMatrix(std::size_t rows, std::size_t cols, std::vector<Entry> entries,
                 ValueRange range = {});

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  const ValueRange& value_range() const { return range_; }

  // |Omega| / (m n).
  double observed_fraction() const;
  bool fully_observed() const { return size() == rows_ * cols_; }

  bool operator==(const ObservedMatrix&) const = default;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<Entry> entries_;
  ValueRange range_;
};

// Omega_i (observed columns of row i) and the column-wise sets (observed rows
// of column j), each sorted ascending.
struct IndexSets {
  std::vector<std::vector<std::size_t>> by_row;
  std::vector<std::vector<std::size_t>> by_col;
};

IndexSets row_index_sets(const ObservedMatrix& obs);

struct FactorPair {
  Matrix U;  // m x r
  Matrix V;  // n x r

  Eigen::Index rank() const { return U.cols(); }
};

enum class SolverKind { kAls, kIrls };

std::string_view to_string(SolverKind kind);
SolverKind parse_solver_kind(std::string_view name);

struct SolverConfig {
  int rank = 5;
  double lambda = 0.5;
  // T for ALS, N for IRLS+Huber.
  int outer_iterations = 50;
  // K, R-IRLS iterations per column update.
  int inner_iterations = 20;
  double huber_loss_alpha = kUnitVarianceAlpha;
  MechanismConfig mechanism;
  std::uint64_t seed = 0;
  int trials = 10;

  bool operator==(const SolverConfig&) const = default;
};

void validate(const SolverConfig& config, const ObservedMatrix& obs);

enum class HalfSweep { kRows, kColumns };

struct SolveStats {
  // Raw 64-bit draws taken from per-column noise streams.
  std::uint64_t noise_stream_draws = 0;
  // Raw draws taken from noise streams while the U half-sweeps ran.
  std::uint64_t row_sweep_noise_draws = 0;
  // Number of noise scalars added to right-hand sides.
  std::uint64_t noise_values = 0;
  // Number of noise vectors (releases).
  std::uint64_t noise_vectors = 0;
};

struct SolveOptions {
  // Worker threads for per-row / per-column solves. Results do not depend on
  // this value.
  int threads = 1;
  // Called after initialization (iteration -1) and after every half-sweep.
  std::function<void(int iteration, HalfSweep, const FactorPair&)> observer;
  SolveStats* stats = nullptr;
};

// Algorithm "Noisy ALS": noiseless ridge updates of U rows, noisy ridge
// updates of V rows (noise added to the right-hand side).
FactorPair noisy_als(const ObservedMatrix& obs, const SolverConfig& config,
                     const SolveOptions& options = {});

// Algorithm "IRLS+Huber": ridge updates of U rows, R-IRLS updates of V rows
// with noise injected in every R-IRLS iteration.
FactorPair irls_huber(const ObservedMatrix& obs, const SolverConfig& config,
                      const SolveOptions& options = {});

FactorPair solve(SolverKind kind, const ObservedMatrix& obs,
                 const SolverConfig& config, const SolveOptions& options = {});

// ||P_Omega(X - U V^T)||_F^2 + lambda (||U||_F^2 + ||V||_F^2).
double als_objective(const ObservedMatrix& obs, const FactorPair& factors,
                     double lambda);

// ||X - U V^T||_F / sqrt(m n).
double rmse(const Eigen::Ref<const Matrix>& truth, const FactorPair& factors);
// Root mean squared error over the given cells.
double rmse(std::span<const Entry> cells, const FactorPair& factors);

enum class RmseScope { kAllEntries, kObservedEntries };

// kAllEntries needs a fully observed matrix and throws UsageError otherwise.
double rmse(const ObservedMatrix& obs, const FactorPair& factors,
            RmseScope scope);

// U V^T, optionally clamped to the ratings range of `obs`.
Matrix complete(const ObservedMatrix& obs, const FactorPair& factors,
                bool clip = false);

}  // namespace huberdp

#endif  // HUBERDP_LRMC_HPP_
