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

#ifndef HUBERDP_EXPERIMENT_HPP_
#define HUBERDP_EXPERIMENT_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "huberdp/data_io.hpp"
#include "huberdp/lrmc.hpp"
#include "huberdp/mechanisms.hpp"

namespace huberdp {

// A solver kind plus its R-IRLS iteration count, e.g. "irls-2".
struct SolverVariant {
  SolverKind kind = SolverKind::kAls;
  // 0 means "use the plan's inner_iterations".
  int inner_iterations = 0;
  std::string label;

  bool operator==(const SolverVariant&) const = default;
};

// "als", "irls", or "irls-<K>".
SolverVariant parse_solver_variant(std::string_view name);

enum class DatasetKind { kSynthetic, kMovieLens, kSweetRS };

std::string_view to_string(DatasetKind kind);
DatasetKind parse_dataset_kind(std::string_view name);

struct DatasetPlan {
  DatasetKind kind = DatasetKind::kSynthetic;
  // Synthetic.
  std::size_t rows = 500;
  std::size_t cols = 500;
  std::size_t rank = 5;
  // Fresh ground-truth factors every trial instead of one X per sweep.
  bool regenerate_truth = false;
  // Real data.
  std::filesystem::path path;
  double holdout_fraction = 0.1;
  // Synthetic: observed fraction. Real: subsample targets; empty keeps the
  // file's own fraction.
  std::vector<double> fractions{0.05, 0.10, 0.15};
};

struct ExperimentPlan {
  DatasetPlan dataset;
  std::vector<SolverVariant> solvers{{SolverKind::kAls, 0, "als"},
                                     {SolverKind::kIrls, 0, "irls"}};
  std::vector<MechanismKind> mechanisms{MechanismKind::kNone,
                                        MechanismKind::kGaussian,
                                        MechanismKind::kLaplace,
                                        MechanismKind::kHuber};
  std::vector<double> variances{1.0, 2.0};
  int trials = 10;
  std::uint64_t seed = 0;

  int rank = 5;
  double lambda = 0.5;
  int outer_iterations = 50;
  int inner_iterations = 20;
  // Unset: the Huber alpha calibrated to the cell's noise variance.
  std::optional<double> huber_loss_alpha;
  bool clip = false;

  double delta_f = 5.0;
  double delta = 1e-5;
  LogBase log_base = LogBase::kNatural;

  // Concurrent (cell, trial) jobs and per-sweep solver threads. Output does
  // not depend on either.
  int jobs = 1;
  int solver_threads = 1;

  std::filesystem::path out_dir;
};

// Defaults for a dataset kind: synthetic follows T=50, K=20, lambda=0.5,
// trials=10, rank 5; MovieLens uses r=32, T=20; SweetRS r=32, T=100.
ExperimentPlan default_plan(DatasetKind kind);

void validate(const ExperimentPlan& plan);

// Missing keys take default_plan(dataset.kind) values.
ExperimentPlan plan_from_json(const std::string& text);
std::string plan_to_json(const ExperimentPlan& plan);

struct PlanResult {
  std::vector<RunRecord> records;
  bool all_ok = true;
};

PlanResult run_plan(const ExperimentPlan& plan);

// summary.csv plus one JSON record per cell under `dir`.
void write_outputs(const PlanResult& result, const std::filesystem::path& dir);

// Mean RMSE pivot: one row per (variance, fraction, solver), one column per
// mechanism.
std::string format_summary_table(std::span<const RunRecord> records);

// Budget table with a note on the Gaussian log-base convention.
std::string format_budget_table(std::span<const BudgetRow> rows,
                                const Sensitivity& sens, double delta,
                                LogBase log_base);

struct PrivacyCheck {
  double alpha = 0.0;
  double delta_f = 0.0;
  PrivacyGapReport report;
  double deviation = 0.0;  // max |route - alpha * delta_f|
};

struct PrivacyVerification {
  std::vector<PrivacyCheck> checks;
  double max_deviation = 0.0;
  bool passed = true;
};

PrivacyVerification verify_privacy(std::span<const double> alphas,
                                   std::span<const double> delta_fs);

struct CalibrationRow {
  double variance = 0.0;
  double alpha = 0.0;
  double epsilon = 0.0;
  double achieved_variance = 0.0;
  bool used_unit_variance_convention = false;
};

std::vector<CalibrationRow> calibrate_targets(std::span<const double> targets,
                                              double delta_f);

}  // namespace huberdp

#endif  // HUBERDP_EXPERIMENT_HPP_
