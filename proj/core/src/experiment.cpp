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

#include "huberdp/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <thread>

#include <fmt/format.h>

#include "json.hpp"

#include "huberdp/errors.hpp"
#include "huberdp/random.hpp"

namespace huberdp {
namespace {

using nlohmann::json;

// One (trial, fraction) instance of the dataset, shared by every cell.
struct TrialData {
  std::shared_ptr<const Matrix> truth;  // synthetic only
  std::shared_ptr<const ObservedMatrix> train;
  std::vector<Entry> test;  // real data only
};

struct Cell {
  std::size_t variance_index;
  std::size_t fraction_index;
  std::size_t solver_index;
  std::size_t mechanism_index;
};

struct TrialOutcome {
  bool ok = false;
  std::string error;
  double rmse = 0.0;
  double observed_rmse = 0.0;
  SolveStats stats;
  double seconds = 0.0;
};

std::uint64_t trial_seed(std::uint64_t master, int trial) {
  return derive_seed(master, {tag(StreamTag::kTrial), static_cast<std::uint64_t>(trial)});
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j[key].is_null()) return fallback;
  return j[key].get<T>();
}

void reject_unknown_keys(const json& j, std::initializer_list<const char*> known,
                         const char* where) {
  for (const auto& [key, value] : j.items()) {
    if (std::find_if(known.begin(), known.end(),
                     [&](const char* k) { return key == k; }) == known.end()) {
      throw ConfigError(fmt::format("plan: unknown key '{}' in {}", key, where));
    }
  }
}

// Runs job(k) for k in [0, count) on `workers` threads.
template <typename Job>
void run_jobs(std::size_t count, int workers, Job&& job) {
  const std::size_t n = std::min<std::size_t>(std::max(workers, 1), std::max<std::size_t>(count, 1));
  if (n <= 1) {
    for (std::size_t k = 0; k < count; ++k) job(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(n);
  for (std::size_t w = 0; w < n; ++w) {
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < count; k = next++) job(k);
    });
  }
}

}  // namespace

SolverVariant parse_solver_variant(std::string_view name) {
  if (name == "als") return {SolverKind::kAls, 0, "als"};
  if (name == "irls") return {SolverKind::kIrls, 0, "irls"};
  if (name.starts_with("irls-")) {
    const std::string_view digits = name.substr(5);
    int k = 0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
    if (ec == std::errc() && ptr == digits.data() + digits.size() && k >= 1) {
      return {SolverKind::kIrls, k, std::string(name)};
    }
  }
  throw ConfigError(fmt::format("unknown solver '{}' (expected als, irls, irls-<K>)", name));
}

std::string_view to_string(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::kSynthetic:
      return "synthetic";
    case DatasetKind::kMovieLens:
      return "movielens";
    case DatasetKind::kSweetRS:
      return "sweetrs";
  }
  return "unknown";
}

DatasetKind parse_dataset_kind(std::string_view name) {
  if (name == "synthetic") return DatasetKind::kSynthetic;
  if (name == "movielens" || name == "movielens100k") return DatasetKind::kMovieLens;
  if (name == "sweetrs") return DatasetKind::kSweetRS;
  throw ConfigError(fmt::format("unknown dataset kind '{}'", name));
}

ExperimentPlan default_plan(DatasetKind kind) {
  ExperimentPlan plan;
  plan.dataset.kind = kind;
  switch (kind) {
    case DatasetKind::kSynthetic:
      break;
    case DatasetKind::kMovieLens:
      plan.rank = 32;
      plan.outer_iterations = 20;
      plan.dataset.fractions = {};
      break;
    case DatasetKind::kSweetRS:
      plan.rank = 32;
      plan.outer_iterations = 100;
      plan.dataset.fractions = {0.05, 0.10, 0.15};
      break;
  }
  return plan;
}

void validate(const ExperimentPlan& plan) {
  if (plan.trials < 1) throw ConfigError("plan: trials must be >= 1");
  if (plan.rank < 1) throw ConfigError("plan: rank must be >= 1");
  if (!(plan.lambda > 0.0)) throw ConfigError("plan: lambda must be > 0");
  if (plan.outer_iterations < 1) throw ConfigError("plan: outer_iterations must be >= 1");
  if (plan.inner_iterations < 1) throw ConfigError("plan: inner_iterations must be >= 1");
  if (plan.huber_loss_alpha && !(*plan.huber_loss_alpha > 0.0)) {
    throw ConfigError("plan: huber_loss_alpha must be > 0");
  }
  if (!(plan.delta_f >= 0.0)) throw ConfigError("plan: delta_f must be >= 0");
  if (!(plan.delta > 0.0 && plan.delta < 1.0)) {
    throw ConfigError("plan: delta must lie in (0, 1)");
  }
  if (plan.solvers.empty()) throw ConfigError("plan: no solvers");
  if (plan.mechanisms.empty()) throw ConfigError("plan: no mechanisms");
  if (plan.variances.empty()) throw ConfigError("plan: no variances");
  for (double v : plan.variances) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ConfigError(fmt::format("plan: variance {} must be positive", v));
    }
  }
  const DatasetPlan& d = plan.dataset;
  for (double f : d.fractions) {
    if (!(f > 0.0 && f <= 1.0)) {
      throw ConfigError(fmt::format("plan: fraction {} not in (0, 1]", f));
    }
  }
  if (d.kind == DatasetKind::kSynthetic) {
    if (d.fractions.empty()) throw ConfigError("plan: synthetic dataset needs fractions");
    validate(SyntheticSpec{d.rows, d.cols, d.rank, d.fractions.front(), 0});
    if (static_cast<std::size_t>(plan.rank) > std::min(d.rows, d.cols)) {
      throw ConfigError("plan: solver rank exceeds matrix dimensions");
    }
  } else {
    if (d.path.empty()) throw ConfigError("plan: real dataset needs a path");
    if (!(d.holdout_fraction > 0.0 && d.holdout_fraction < 1.0)) {
      throw ConfigError("plan: holdout_fraction must lie in (0, 1)");
    }
  }
}

ExperimentPlan plan_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("plan is not valid JSON: {}", e.what()));
  }
  if (!j.is_object()) throw ConfigError("plan must be a JSON object");
  reject_unknown_keys(j,
                      {"dataset", "solvers", "mechanisms", "variances", "trials",
                       "seed", "rank", "lambda", "outer_iterations",
                       "inner_iterations", "huber_loss_alpha", "clip", "delta_f",
                       "delta", "log_base", "jobs", "solver_threads", "out_dir"},
                      "plan");
  try {
    DatasetKind kind = DatasetKind::kSynthetic;
    const json dj = j.value("dataset", json::object());
    if (dj.contains("kind")) kind = parse_dataset_kind(dj["kind"].get<std::string>());
    ExperimentPlan plan = default_plan(kind);

    reject_unknown_keys(dj,
                        {"kind", "rows", "cols", "rank", "regenerate_truth",
                         "path", "holdout_fraction", "fractions"},
                        "dataset");
    DatasetPlan& d = plan.dataset;
    d.rows = get_or(dj, "rows", d.rows);
    d.cols = get_or(dj, "cols", d.cols);
    d.rank = get_or(dj, "rank", d.rank);
    d.regenerate_truth = get_or(dj, "regenerate_truth", d.regenerate_truth);
    d.path = get_or<std::string>(dj, "path", d.path.string());
    d.holdout_fraction = get_or(dj, "holdout_fraction", d.holdout_fraction);
    d.fractions = get_or(dj, "fractions", d.fractions);

    if (j.contains("solvers")) {
      plan.solvers.clear();
      for (const auto& s : j["solvers"]) {
        plan.solvers.push_back(parse_solver_variant(s.get<std::string>()));
      }
    }
    if (j.contains("mechanisms")) {
      plan.mechanisms.clear();
      for (const auto& m : j["mechanisms"]) {
        plan.mechanisms.push_back(parse_mechanism_kind(m.get<std::string>()));
      }
    }
    plan.variances = get_or(j, "variances", plan.variances);
    plan.trials = get_or(j, "trials", plan.trials);
    plan.seed = get_or(j, "seed", plan.seed);
    plan.rank = get_or(j, "rank", plan.rank);
    plan.lambda = get_or(j, "lambda", plan.lambda);
    plan.outer_iterations = get_or(j, "outer_iterations", plan.outer_iterations);
    plan.inner_iterations = get_or(j, "inner_iterations", plan.inner_iterations);
    if (j.contains("huber_loss_alpha") && !j["huber_loss_alpha"].is_null()) {
      plan.huber_loss_alpha = j["huber_loss_alpha"].get<double>();
    }
    plan.clip = get_or(j, "clip", plan.clip);
    plan.delta_f = get_or(j, "delta_f", plan.delta_f);
    plan.delta = get_or(j, "delta", plan.delta);
    if (j.contains("log_base")) plan.log_base = parse_log_base(j["log_base"].get<std::string>());
    plan.jobs = get_or(j, "jobs", plan.jobs);
    plan.solver_threads = get_or(j, "solver_threads", plan.solver_threads);
    plan.out_dir = get_or<std::string>(j, "out_dir", plan.out_dir.string());
    return plan;
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("malformed plan: {}", e.what()));
  }
}

std::string plan_to_json(const ExperimentPlan& plan) {
  json solvers = json::array();
  for (const auto& s : plan.solvers) solvers.push_back(s.label);
  json mechanisms = json::array();
  for (auto m : plan.mechanisms) mechanisms.push_back(to_string(m));
  json j{
      {"dataset",
       {{"kind", to_string(plan.dataset.kind)},
        {"rows", plan.dataset.rows},
        {"cols", plan.dataset.cols},
        {"rank", plan.dataset.rank},
        {"regenerate_truth", plan.dataset.regenerate_truth},
        {"path", plan.dataset.path.string()},
        {"holdout_fraction", plan.dataset.holdout_fraction},
        {"fractions", plan.dataset.fractions}}},
      {"solvers", solvers},
      {"mechanisms", mechanisms},
      {"variances", plan.variances},
      {"trials", plan.trials},
      {"seed", plan.seed},
      {"rank", plan.rank},
      {"lambda", plan.lambda},
      {"outer_iterations", plan.outer_iterations},
      {"inner_iterations", plan.inner_iterations},
      {"huber_loss_alpha",
       plan.huber_loss_alpha ? json(*plan.huber_loss_alpha) : json(nullptr)},
      {"clip", plan.clip},
      {"delta_f", plan.delta_f},
      {"delta", plan.delta},
      {"log_base", to_string(plan.log_base)},
      {"jobs", plan.jobs},
      {"solver_threads", plan.solver_threads},
      {"out_dir", plan.out_dir.string()},
  };
  return j.dump(2) + "\n";
}

PlanResult run_plan(const ExperimentPlan& plan) {
  validate(plan);
  const DatasetPlan& d = plan.dataset;
  const bool synthetic = d.kind == DatasetKind::kSynthetic;

  // Dataset instances per (trial, fraction).
  std::optional<ObservedMatrix> full;
  std::string dataset_name;
  std::vector<double> fractions = d.fractions;
  if (synthetic) {
    dataset_name = fmt::format("synthetic-{}x{}-r{}", d.rows, d.cols, d.rank);
  } else {
    full = parse_ratings(d.kind == DatasetKind::kMovieLens ? RatingsFormat::kMovieLens100k
                                                           : RatingsFormat::kSweetRS,
                         d.path)
               .matrix;
    dataset_name = std::string(to_string(d.kind));
    if (fractions.empty()) fractions = {full->observed_fraction()};
  }
  const bool subsampling = !synthetic && !d.fractions.empty();

  std::shared_ptr<const Matrix> shared_truth;
  if (synthetic && !d.regenerate_truth) {
    RandomStream rng(derive_seed(plan.seed, {tag(StreamTag::kTruth)}));
    shared_truth = std::make_shared<const Matrix>(generate_low_rank(d.rows, d.cols, d.rank, rng));
  }

  const std::size_t nf = fractions.size();
  std::vector<TrialData> data(static_cast<std::size_t>(plan.trials) * nf);
  for (int t = 0; t < plan.trials; ++t) {
    const std::uint64_t ts = trial_seed(plan.seed, t);
    std::shared_ptr<const Matrix> truth = shared_truth;
    if (synthetic && !truth) {
      RandomStream rng(derive_seed(ts, {tag(StreamTag::kTruth)}));
      truth = std::make_shared<const Matrix>(generate_low_rank(d.rows, d.cols, d.rank, rng));
    }
    for (std::size_t fi = 0; fi < nf; ++fi) {
      TrialData& td = data[static_cast<std::size_t>(t) * nf + fi];
      if (synthetic) {
        RandomStream mask(derive_seed(ts, {tag(StreamTag::kMask), fi}));
        td.truth = truth;
        td.train = std::make_shared<const ObservedMatrix>(mask_uniform(*truth, fractions[fi], mask));
      } else {
        ObservedMatrix source = *full;
        if (subsampling) {
          RandomStream sub(derive_seed(ts, {tag(StreamTag::kSubsample), fi}));
          source = subsample(*full, fractions[fi], sub);
        }
        RandomStream hold(derive_seed(ts, {tag(StreamTag::kHoldout), fi}));
        HoldoutSplit split = holdout_split(source, d.holdout_fraction, hold);
        td.train = std::make_shared<const ObservedMatrix>(std::move(split.train));
        td.test = std::move(split.test);
      }
    }
  }

  std::vector<Cell> cells;
  for (std::size_t vi = 0; vi < plan.variances.size(); ++vi)
    for (std::size_t fi = 0; fi < nf; ++fi)
      for (std::size_t si = 0; si < plan.solvers.size(); ++si)
        for (std::size_t mi = 0; mi < plan.mechanisms.size(); ++mi)
          cells.push_back({vi, fi, si, mi});

  // Cell configurations are resolved up front so calibration errors surface
  // per cell rather than inside workers.
  struct CellConfig {
    SolverConfig config;
    PrivacyBudget budget;
    std::string error;
  };
  std::vector<CellConfig> configs(cells.size());
  const Sensitivity sens = Sensitivity::uniform(plan.delta_f);
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const Cell& cell = cells[c];
    const double v = plan.variances[cell.variance_index];
    const SolverVariant& sv = plan.solvers[cell.solver_index];
    CellConfig& cc = configs[c];
    try {
      cc.config.rank = plan.rank;
      cc.config.lambda = plan.lambda;
      cc.config.outer_iterations = plan.outer_iterations;
      cc.config.inner_iterations = sv.inner_iterations > 0 ? sv.inner_iterations
                                                           : plan.inner_iterations;
      cc.config.huber_loss_alpha = plan.huber_loss_alpha
                                       ? *plan.huber_loss_alpha
                                       : calibrate_alpha_or_convention(v).alpha;
      cc.config.mechanism = mechanism_for_variance(plan.mechanisms[cell.mechanism_index], v);
      cc.config.seed = plan.seed;
      cc.config.trials = plan.trials;
      cc.budget = budget_for(cc.config.mechanism, sens, plan.delta, plan.log_base);
    } catch (const std::exception& e) {
      cc.error = e.what();
    }
  }

  const std::size_t trials = static_cast<std::size_t>(plan.trials);
  std::vector<TrialOutcome> outcomes(cells.size() * trials);
  run_jobs(outcomes.size(), plan.jobs, [&](std::size_t job) {
    const std::size_t c = job / trials;
    const std::size_t t = job % trials;
    TrialOutcome& out = outcomes[job];
    const CellConfig& cc = configs[c];
    if (!cc.error.empty()) {
      out.error = cc.error;
      return;
    }
    const auto start = std::chrono::steady_clock::now();
    try {
      const TrialData& td = data[t * nf + cells[c].fraction_index];
      SolverConfig config = cc.config;
      // Every cell of a trial shares initialization and noise streams.
      config.seed = derive_seed(trial_seed(plan.seed, static_cast<int>(t)),
                                {tag(StreamTag::kNoise)});
      SolveOptions options;
      options.threads = plan.solver_threads;
      options.stats = &out.stats;
      const FactorPair f =
          solve(plan.solvers[cells[c].solver_index].kind, *td.train, config, options);
      if (synthetic) {
        if (plan.clip) {
          out.rmse = rmse(*td.truth, FactorPair{complete(*td.train, f, true),
                                                Matrix::Identity(td.truth->cols(),
                                                                 td.truth->cols())});
        } else {
          out.rmse = rmse(*td.truth, f);
        }
      } else {
        if (plan.clip) {
          const Matrix z = complete(*td.train, f, true);
          auto over = [&](std::span<const Entry> cellset) {
            double s = 0.0;
            for (const Entry& e : cellset) {
              const double r = e.value - z(static_cast<Eigen::Index>(e.row),
                                           static_cast<Eigen::Index>(e.col));
              s += r * r;
            }
            return std::sqrt(s / static_cast<double>(cellset.size()));
          };
          out.rmse = over(td.test);
          out.observed_rmse = over(td.train->entries());
        } else {
          out.rmse = rmse(std::span<const Entry>(td.test), f);
          out.observed_rmse = rmse(*td.train, f, RmseScope::kObservedEntries);
        }
      }
      if (!std::isfinite(out.rmse) || !std::isfinite(out.observed_rmse)) {
        throw SolverError("solver produced a non-finite completion");
      }
      out.ok = true;
    } catch (const std::exception& e) {
      out.error = e.what();
    }
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  });

  PlanResult result;
  result.records.reserve(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const Cell& cell = cells[c];
    const CellConfig& cc = configs[c];
    RunRecord r;
    r.dataset = dataset_name;
    const TrialData& first = data[cell.fraction_index];
    r.rows = first.train->rows();
    r.cols = first.train->cols();
    r.observed_entries = first.train->size() + first.test.size();
    r.observed_fraction = static_cast<double>(r.observed_entries) /
                          (static_cast<double>(r.rows) * static_cast<double>(r.cols));
    r.fraction = fractions[cell.fraction_index];
    r.solver = plan.solvers[cell.solver_index].label;
    r.solver_kind = plan.solvers[cell.solver_index].kind;
    r.config = cc.config;
    r.variance = plan.variances[cell.variance_index];
    r.clip = plan.clip;
    r.budget = cc.budget;
    r.delta_f = plan.delta_f;
    r.log_base = plan.log_base;
    r.rmse_scope = synthetic ? "all_entries" : "holdout";
    r.seed = plan.seed;
    for (std::size_t t = 0; t < trials; ++t) {
      const TrialOutcome& o = outcomes[c * trials + t];
      r.trial_seeds.push_back(trial_seed(plan.seed, static_cast<int>(t)));
      r.wall_clock_seconds += o.seconds;
      if (!o.ok) {
        r.ok = false;
        if (r.error.empty()) r.error = fmt::format("trial {}: {}", t, o.error);
        continue;
      }
      r.rmse_trials.push_back(o.rmse);
      if (!synthetic) r.observed_rmse_trials.push_back(o.observed_rmse);
      r.noise_draws.push_back(o.stats.noise_stream_draws);
      r.noise_values.push_back(o.stats.noise_values);
    }
    const TrialStats s = trial_stats(r.rmse_trials);
    r.rmse_mean = s.mean;
    r.rmse_std = s.stddev;
    result.all_ok = result.all_ok && r.ok;
    result.records.push_back(std::move(r));
  }
  return result;
}

void write_outputs(const PlanResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "records");
  {
    std::ofstream csv(dir / "summary.csv", std::ios::binary);
    if (!csv) throw std::runtime_error(fmt::format("cannot write '{}'", (dir / "summary.csv").string()));
    csv << summary_csv(result.records);
  }
  for (std::size_t k = 0; k < result.records.size(); ++k) {
    const RunRecord& r = result.records[k];
    const std::string name =
        fmt::format("{:03d}_{}_{}_v{}_f{}.json", k, r.solver,
                    to_string(r.config.mechanism.kind()), r.variance, r.fraction);
    persist_run(r, dir / "records" / name);
  }
}

std::string format_summary_table(std::span<const RunRecord> records) {
  // Column order follows first appearance of each mechanism.
  std::vector<MechanismKind> columns;
  for (const RunRecord& r : records) {
    const MechanismKind k = r.config.mechanism.kind();
    if (std::find(columns.begin(), columns.end(), k) == columns.end()) columns.push_back(k);
  }
  const auto header_name = [](MechanismKind k) -> std::string {
    switch (k) {
      case MechanismKind::kNone:
        return "Vanilla";
      case MechanismKind::kGaussian:
        return "Gaussian";
      case MechanismKind::kLaplace:
        return "Laplacian";
      case MechanismKind::kHuber:
        return "Huber";
    }
    return "?";
  };

  std::string out = fmt::format("{:>8}  {:>9}  {:<9}", "Variance", "Fraction", "Algorithm");
  for (auto k : columns) out += fmt::format("  {:>10}", header_name(k));
  out += "\n";

  struct Row {
    double variance;
    double fraction;
    std::string solver;
    std::map<MechanismKind, const RunRecord*> cells;
  };
  std::vector<Row> rows;
  for (const RunRecord& r : records) {
    auto it = std::find_if(rows.begin(), rows.end(), [&](const Row& row) {
      return row.variance == r.variance && row.fraction == r.fraction &&
             row.solver == r.solver;
    });
    if (it == rows.end()) {
      rows.push_back({r.variance, r.fraction, r.solver, {}});
      it = rows.end() - 1;
    }
    it->cells[r.config.mechanism.kind()] = &r;
  }
  for (const Row& row : rows) {
    out += fmt::format("{:>8}  {:>8.4g}%  {:<9}", row.variance, 100.0 * row.fraction,
                       row.solver);
    for (auto k : columns) {
      const auto it = row.cells.find(k);
      if (it == row.cells.end()) {
        out += fmt::format("  {:>10}", "-");
      } else if (!it->second->ok) {
        out += fmt::format("  {:>10}", "FAILED");
      } else {
        out += fmt::format("  {:>10.4f}", it->second->rmse_mean);
      }
    }
    out += "\n";
  }
  return out;
}

std::string format_budget_table(std::span<const BudgetRow> rows,
                                const Sensitivity& sens, double delta,
                                LogBase log_base) {
  std::string out = fmt::format("{:>8}  {:>22}  {:>16}  {:>16}  {:>8}\n", "variance",
                                "gaussian (eps, delta)", "laplace (eps, 0)",
                                "huber (eps, 0)", "alpha");
  bool convention = false;
  for (const BudgetRow& r : rows) {
    out += fmt::format("{:>8}  {:>22}  {:>16}  {:>16}  {:>8.4f}{}\n", r.variance,
                       fmt::format("({:.3f}, {:g})", r.gaussian.epsilon, r.gaussian.delta),
                       fmt::format("({:.3f}, 0)", r.laplace.epsilon),
                       fmt::format("({:.3f}, 0)", r.huber.epsilon), r.huber_alpha,
                       r.huber_used_unit_variance_convention ? " *" : "");
    convention = convention || r.huber_used_unit_variance_convention;
  }
  if (!rows.empty()) {
    const LogBase other = log_base == LogBase::kNatural ? LogBase::kBase10 : LogBase::kNatural;
    std::string alt;
    for (const BudgetRow& r : rows) {
      alt += fmt::format("{}{:.3f}", alt.empty() ? "" : ", ",
                         epsilon_gaussian(std::sqrt(r.variance), delta, sens, other).epsilon);
    }
    if (log_base == LogBase::kBase10) {
      out += fmt::format(
          "note: Gaussian epsilon uses log10(1.25/delta); the standard natural-log "
          "bound gives eps = {{{}}}.\n",
          alt);
    } else {
      out += fmt::format(
          "note: Gaussian epsilon uses the standard natural-log bound ln(1.25/delta); "
          "with --log-base base10 the values are {{{}}}.\n",
          alt);
    }
  }
  if (convention) {
    out += fmt::format(
        "* Huber variance exceeds 1 for every finite alpha; alpha = {} is used for "
        "variance <= 1 (actual variance {:.4f}).\n",
        kUnitVarianceAlpha, huber_variance(kUnitVarianceAlpha));
  }
  return out;
}

PrivacyVerification verify_privacy(std::span<const double> alphas,
                                   std::span<const double> delta_fs) {
  PrivacyVerification v;
  for (double a : alphas) {
    for (double df : delta_fs) {
      PrivacyCheck check;
      check.alpha = a;
      check.delta_f = df;
      check.report = privacy_gap_report(a, df);
      check.deviation = std::max(std::abs(check.report.closed_form - check.report.bound),
                                 std::abs(check.report.grid_max - check.report.bound));
      v.max_deviation = std::max(v.max_deviation, check.deviation);
      v.checks.push_back(check);
    }
  }
  v.passed = v.max_deviation <= 1e-9;
  return v;
}

std::vector<CalibrationRow> calibrate_targets(std::span<const double> targets,
                                              double delta_f) {
  const Sensitivity sens = Sensitivity::uniform(delta_f);
  std::vector<CalibrationRow> rows;
  for (double v : targets) {
    const HuberCalibration cal = calibrate_alpha_or_convention(v);
    CalibrationRow row;
    row.variance = v;
    row.alpha = cal.alpha;
    row.epsilon = epsilon_huber(HuberParams(cal.alpha), sens).epsilon;
    row.achieved_variance = huber_variance(cal.alpha);
    row.used_unit_variance_convention = cal.used_unit_variance_convention;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace huberdp
