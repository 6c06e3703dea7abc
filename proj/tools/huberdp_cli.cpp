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

// huberdp command-line harness: privacy budgets, calibration, privacy-bound
// verification, synthetic data generation, and completion sweeps.

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "huberdp/data_io.hpp"
#include "huberdp/errors.hpp"
#include "huberdp/experiment.hpp"
#include "huberdp/mechanisms.hpp"

namespace {

using namespace huberdp;

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

std::vector<std::string> split(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  for (char c : text) {
    if (c == ',') {
      if (!item.empty()) out.push_back(item);
      item.clear();
    } else if (c != ' ') {
      item += c;
    }
  }
  if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<double> parse_doubles(const std::string& text, const char* flag) {
  std::vector<double> out;
  for (const std::string& s : split(text)) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw UsageError(fmt::format("{}: '{}' is not a number", flag, s));
    }
    out.push_back(v);
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot open plan '{}'", path));
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// ---------------------------------------------------------------- budget

struct BudgetArgs {
  std::string variances = "1,2,3,4";
  double delta_f = 5.0;
  double delta = 1e-5;
  std::string log_base = "natural";
  bool csv = false;
};

int cmd_budget(const BudgetArgs& a) {
  const std::vector<double> vars = parse_doubles(a.variances, "--variances");
  const Sensitivity sens = Sensitivity::uniform(a.delta_f);
  const LogBase base = parse_log_base(a.log_base);
  const std::vector<BudgetRow> rows = budget_table(vars, sens, a.delta, base);
  if (a.csv) {
    std::cout << "variance,gaussian_epsilon,gaussian_delta,laplace_epsilon,"
                 "huber_epsilon,huber_alpha,huber_unit_variance_convention\n";
    for (const BudgetRow& r : rows) {
      std::cout << fmt::format("{},{},{},{},{},{},{}\n", r.variance, r.gaussian.epsilon,
                               r.gaussian.delta, r.laplace.epsilon, r.huber.epsilon,
                               r.huber_alpha, r.huber_used_unit_variance_convention);
    }
    return 0;
  }
  std::cout << fmt::format("delta_f = {}, delta = {}, log base = {}\n", a.delta_f, a.delta,
                           to_string(base));
  std::cout << format_budget_table(rows, sens, a.delta, base);
  return 0;
}

// ------------------------------------------------------------- calibrate

struct CalibrateArgs {
  std::string variances = "2,3,4";
  double delta_f = 5.0;
};

int cmd_calibrate(const CalibrateArgs& a) {
  const std::vector<double> targets = parse_doubles(a.variances, "--variances");
  const std::vector<CalibrationRow> rows = calibrate_targets(targets, a.delta_f);
  std::cout << fmt::format("{:>10}  {:>12}  {:>10}  {:>12}\n", "variance", "alpha",
                           "epsilon", "achieved");
  for (const CalibrationRow& r : rows) {
    std::cout << fmt::format("{:>10}  {:>12.6f}  {:>10.3f}  {:>12.6f}{}\n", r.variance,
                             r.alpha, r.epsilon, r.achieved_variance,
                             r.used_unit_variance_convention ? " *" : "");
  }
  for (const CalibrationRow& r : rows) {
    if (r.used_unit_variance_convention) {
      std::cerr << fmt::format(
          "warning: variance {} is not attainable (Huber variance > 1 for every alpha); "
          "using alpha = {}\n",
          r.variance, kUnitVarianceAlpha);
    }
  }
  return 0;
}

// -------------------------------------------------------- verify-privacy

struct VerifyArgs {
  std::string alphas = "0.25,0.5,1,2,4,8";
  std::string delta_fs = "0.01,0.5,1,3,10,50";
  bool quiet = false;
};

int cmd_verify_privacy(const VerifyArgs& a) {
  const std::vector<double> alphas = parse_doubles(a.alphas, "--alphas");
  const std::vector<double> dfs = parse_doubles(a.delta_fs, "--delta-fs");
  const PrivacyVerification v = verify_privacy(alphas, dfs);
  if (!a.quiet) {
    std::cout << fmt::format("{:>8}  {:>8}  {:>6}  {:>14}  {:>14}  {:>14}  {:>10}\n", "alpha",
                             "delta_f", "case", "closed_form", "grid_max", "alpha*df",
                             "deviation");
    for (const PrivacyCheck& c : v.checks) {
      std::cout << fmt::format("{:>8}  {:>8}  {:>6}  {:>14.10g}  {:>14.10g}  {:>14.10g}  {:>10.3g}\n",
                               c.alpha, c.delta_f, c.report.narrow_shift ? "narrow" : "wide",
                               c.report.closed_form, c.report.grid_max, c.report.bound,
                               c.deviation);
    }
  }
  std::cout << fmt::format("checked {} cells, max deviation {:.3g}: {}\n", v.checks.size(),
                           v.max_deviation, v.passed ? "PASS" : "FAIL");
  return v.passed ? 0 : kExitFailure;
}

// ------------------------------------------------------------------- gen

struct GenArgs {
  std::size_t rows = 500;
  std::size_t cols = 500;
  std::size_t rank = 5;
  double fraction = 0.15;
  std::uint64_t seed = 0;
  std::string out;
  std::string truth;
};

int cmd_gen(const GenArgs& a) {
  const SyntheticData data =
      generate_synthetic(SyntheticSpec{a.rows, a.cols, a.rank, a.fraction, a.seed});
  auto write = [&](std::ostream& os) { write_triplets(os, data.observed); };
  if (a.out.empty() || a.out == "-") {
    write(std::cout);
  } else {
    std::ofstream os(a.out, std::ios::binary);
    if (!os) throw ConfigError(fmt::format("cannot write '{}'", a.out));
    write(os);
  }
  if (!a.truth.empty()) {
    std::ofstream os(a.truth, std::ios::binary);
    if (!os) throw ConfigError(fmt::format("cannot write '{}'", a.truth));
    for (Eigen::Index i = 0; i < data.truth.rows(); ++i) {
      for (Eigen::Index j = 0; j < data.truth.cols(); ++j) {
        os << (j ? "," : "") << fmt::format("{}", data.truth(i, j));
      }
      os << "\n";
    }
  }
  std::cerr << fmt::format("generated {}x{} rank {} with {} observed cells\n", a.rows, a.cols,
                           a.rank, data.observed.size());
  return 0;
}

// ------------------------------------------------------------------- run

struct RunArgs {
  std::string plan_path;
  std::optional<std::string> dataset;
  std::optional<std::string> data_path;
  std::optional<std::size_t> rows, cols, true_rank;
  std::optional<bool> regenerate_truth;
  std::optional<double> holdout;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials, rank, outer, irls_k, jobs, threads;
  std::optional<double> lambda, delta_f, delta, huber_loss_alpha;
  std::optional<std::string> mechanisms, variances, fractions, solvers, log_base;
  std::optional<bool> clip;
  std::string out;
  bool csv = false;
};

ExperimentPlan build_plan(const RunArgs& a) {
  ExperimentPlan plan;
  if (!a.plan_path.empty()) {
    plan = plan_from_json(read_file(a.plan_path));
  } else if (a.dataset) {
    plan = default_plan(parse_dataset_kind(*a.dataset));
  }
  if (a.dataset && !a.plan_path.empty()) {
    plan.dataset.kind = parse_dataset_kind(*a.dataset);
  }
  DatasetPlan& d = plan.dataset;
  if (a.data_path) d.path = *a.data_path;
  if (a.rows) d.rows = *a.rows;
  if (a.cols) d.cols = *a.cols;
  if (a.true_rank) d.rank = *a.true_rank;
  if (a.regenerate_truth) d.regenerate_truth = *a.regenerate_truth;
  if (a.holdout) d.holdout_fraction = *a.holdout;
  if (a.fractions) d.fractions = parse_doubles(*a.fractions, "--fraction");
  if (a.seed) plan.seed = *a.seed;
  if (a.trials) plan.trials = *a.trials;
  if (a.rank) plan.rank = *a.rank;
  if (a.outer) plan.outer_iterations = *a.outer;
  if (a.irls_k) plan.inner_iterations = *a.irls_k;
  if (a.jobs) plan.jobs = *a.jobs;
  if (a.threads) plan.solver_threads = *a.threads;
  if (a.lambda) plan.lambda = *a.lambda;
  if (a.delta_f) plan.delta_f = *a.delta_f;
  if (a.delta) plan.delta = *a.delta;
  if (a.huber_loss_alpha) plan.huber_loss_alpha = *a.huber_loss_alpha;
  if (a.clip) plan.clip = *a.clip;
  if (a.log_base) plan.log_base = parse_log_base(*a.log_base);
  if (a.variances) plan.variances = parse_doubles(*a.variances, "--variance");
  if (a.mechanisms) {
    plan.mechanisms.clear();
    for (const std::string& m : split(*a.mechanisms)) {
      if (m == "all") {
        plan.mechanisms = {MechanismKind::kNone, MechanismKind::kGaussian,
                           MechanismKind::kLaplace, MechanismKind::kHuber};
      } else {
        plan.mechanisms.push_back(parse_mechanism_kind(m));
      }
    }
  }
  if (a.solvers) {
    plan.solvers.clear();
    for (const std::string& s : split(*a.solvers)) {
      plan.solvers.push_back(parse_solver_variant(s));
    }
  }
  if (!a.out.empty()) plan.out_dir = a.out;
  if (d.kind == DatasetKind::kSynthetic && !d.path.empty()) {
    throw UsageError("--data needs --dataset movielens or --dataset sweetrs");
  }
  return plan;
}

int cmd_run(const RunArgs& a) {
  const ExperimentPlan plan = build_plan(a);
  validate(plan);
  const PlanResult result = run_plan(plan);
  if (!plan.out_dir.empty()) {
    write_outputs(result, plan.out_dir);
    std::ofstream(plan.out_dir / "plan.json", std::ios::binary) << plan_to_json(plan);
  }
  if (a.csv) {
    std::cout << summary_csv(result.records);
  } else {
    std::cout << format_summary_table(result.records);
  }
  for (const RunRecord& r : result.records) {
    if (!r.ok) {
      std::cerr << fmt::format("failed: {} {} variance {} fraction {}: {}\n", r.solver,
                               to_string(r.config.mechanism.kind()), r.variance, r.fraction,
                               r.error);
    }
  }
  return result.all_ok ? 0 : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Huber-mechanism differential privacy for matrix completion"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "huberdp 0.1.0");

  BudgetArgs budget;
  auto* b = app.add_subcommand("budget", "Privacy budget table for Gaussian, Laplace and Huber noise");
  b->add_option("--variances", budget.variances, "Comma-separated noise variances")
      ->capture_default_str();
  b->add_option("--delta-f", budget.delta_f, "Sensitivity")->capture_default_str();
  b->add_option("--delta", budget.delta, "Gaussian delta")->capture_default_str();
  b->add_option("--log-base", budget.log_base, "Gaussian bound log base")
      ->check(CLI::IsMember({"natural", "base10"}))
      ->capture_default_str();
  b->add_flag("--csv", budget.csv, "Emit CSV");

  CalibrateArgs calibrate;
  auto* c = app.add_subcommand("calibrate", "Huber alpha for target noise variances");
  c->add_option("--variances", calibrate.variances, "Comma-separated target variances")
      ->capture_default_str();
  c->add_option("--delta-f", calibrate.delta_f, "Sensitivity")->capture_default_str();

  VerifyArgs verify;
  auto* v = app.add_subcommand("verify-privacy", "Check sup of the Huber privacy gap against alpha * delta_f");
  v->add_option("--alphas", verify.alphas, "Comma-separated alpha grid")->capture_default_str();
  v->add_option("--delta-fs", verify.delta_fs, "Comma-separated sensitivity grid")
      ->capture_default_str();
  v->add_flag("--quiet", verify.quiet, "Print only the summary line");

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "Write a synthetic low-rank dataset as 1-indexed triplets");
  g->add_option("--rows", gen.rows)->capture_default_str();
  g->add_option("--cols", gen.cols)->capture_default_str();
  g->add_option("--rank", gen.rank)->capture_default_str();
  g->add_option("--fraction", gen.fraction, "Observed fraction")->capture_default_str();
  g->add_option("--seed", gen.seed)->capture_default_str();
  g->add_option("--out", gen.out, "Triplet output file (default stdout)");
  g->add_option("--truth", gen.truth, "Optional CSV file for the full matrix");

  RunArgs run;
  auto* r = app.add_subcommand("run", "Run a completion sweep");
  r->add_option("--plan", run.plan_path, "JSON plan file; flags override it");
  r->add_option("--dataset", run.dataset, "synthetic, movielens or sweetrs");
  r->add_option("--data", run.data_path, "Ratings file for real datasets");
  r->add_option("--rows", run.rows, "Synthetic rows");
  r->add_option("--cols", run.cols, "Synthetic columns");
  r->add_option("--true-rank", run.true_rank, "Rank of the synthetic ground truth");
  r->add_flag("--regenerate-truth,!--fixed-truth", run.regenerate_truth,
              "Fresh ground truth per trial");
  r->add_option("--holdout", run.holdout, "Real data test fraction");
  r->add_option("--seed", run.seed, "Master seed");
  r->add_option("--trials", run.trials);
  r->add_option("--rank", run.rank, "Factor rank");
  r->add_option("--lambda", run.lambda);
  r->add_option("--outer", run.outer, "Outer iterations");
  r->add_option("--irls-k", run.irls_k, "R-IRLS iterations per column update");
  r->add_option("--mechanism", run.mechanisms, "Comma list of none, gaussian, laplace, huber, or all");
  r->add_option("--variance", run.variances, "Comma list of noise variances");
  r->add_option("--fraction", run.fractions, "Comma list of observed fractions");
  r->add_option("--solver", run.solvers, "Comma list of als, irls, irls-<K>");
  r->add_option("--log-base", run.log_base)->check(CLI::IsMember({"natural", "base10"}));
  r->add_option("--delta-f", run.delta_f);
  r->add_option("--delta", run.delta);
  r->add_option("--huber-loss-alpha", run.huber_loss_alpha,
                "Huber loss alpha (default: calibrated to the noise variance)");
  r->add_flag("--clip,!--no-clip", run.clip, "Clip completions to the rating range");
  r->add_option("--jobs", run.jobs, "Concurrent jobs");
  r->add_option("--threads", run.threads, "Solver threads per job");
  r->add_option("--out", run.out, "Output directory for records and summary.csv");
  r->add_flag("--csv", run.csv, "Print the CSV summary instead of the table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitUsage;
  }

  try {
    if (b->parsed()) return cmd_budget(budget);
    if (c->parsed()) return cmd_calibrate(calibrate);
    if (v->parsed()) return cmd_verify_privacy(verify);
    if (g->parsed()) return cmd_gen(gen);
    if (r->parsed()) return cmd_run(run);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}
