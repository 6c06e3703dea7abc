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

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include <fmt/format.h>

#include "huberdp/errors.hpp"
#include "huberdp/random.hpp"

namespace huberdp {
namespace {

// Observed cells grouped by row (or by column), CSR style.
struct Compressed {
  std::vector<std::size_t> offsets;
  std::vector<std::size_t> index;
  std::vector<double> value;

  std::size_t count(std::size_t k) const { return offsets[k + 1] - offsets[k]; }
};

Compressed compress(const ObservedMatrix& obs, bool by_row) {
  const std::size_t outer = by_row ? obs.rows() : obs.cols();
  Compressed c;
  c.offsets.assign(outer + 1, 0);
  for (const Entry& e : obs.entries()) ++c.offsets[(by_row ? e.row : e.col) + 1];
  for (std::size_t k = 0; k < outer; ++k) c.offsets[k + 1] += c.offsets[k];
  c.index.resize(obs.size());
  c.value.resize(obs.size());
  std::vector<std::size_t> cursor(c.offsets.begin(), c.offsets.end() - 1);
  for (const Entry& e : obs.entries()) {
    const std::size_t slot = cursor[by_row ? e.row : e.col]++;
    c.index[slot] = by_row ? e.col : e.row;
    c.value[slot] = e.value;
  }
  // Sort each segment by inner index so summation order does not depend on
  // the order of entries in the input.
  for (std::size_t k = 0; k < outer; ++k) {
    const std::size_t b = c.offsets[k];
    const std::size_t n = c.count(k);
    std::vector<std::pair<std::size_t, double>> seg(n);
    for (std::size_t a = 0; a < n; ++a) seg[a] = {c.index[b + a], c.value[b + a]};
    std::sort(seg.begin(), seg.end());
    for (std::size_t a = 0; a < n; ++a) {
      c.index[b + a] = seg[a].first;
      c.value[b + a] = seg[a].second;
    }
  }
  return c;
}

// Runs body(k) for k in [0, count), split into contiguous chunks across
// `threads` workers. The first exception thrown by any worker is rethrown.
template <typename Body>
void parallel_for(std::size_t count, int threads, Body&& body) {
  const std::size_t workers =
      std::min<std::size_t>(std::max(threads, 1), std::max<std::size_t>(count, 1));
  if (workers <= 1) {
    for (std::size_t k = 0; k < count; ++k) body(k);
    return;
  }
  std::exception_ptr error;
  std::mutex mu;
  std::atomic<bool> failed{false};
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = count * w / workers;
      const std::size_t end = count * (w + 1) / workers;
      pool.emplace_back([&, begin, end] {
        try {
          for (std::size_t k = begin; k < end && !failed.load(); ++k) body(k);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!error) error = std::current_exception();
          failed = true;
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

struct Gathered {
  Matrix design;
  Vector targets;
};

// Rows of `other` selected by segment k of `layout`, with the matching values.
Gathered gather(const Compressed& layout, std::size_t k, const Matrix& other) {
  const std::size_t b = layout.offsets[k];
  const auto n = static_cast<Eigen::Index>(layout.count(k));
  Gathered g{Matrix(n, other.cols()), Vector(n)};
  for (Eigen::Index a = 0; a < n; ++a) {
    g.design.row(a) = other.row(static_cast<Eigen::Index>(layout.index[b + a]));
    g.targets[a] = layout.value[b + a];
  }
  return g;
}

Vector ridge_update(const Gathered& g, double lambda, const Vector* noise) {
  const Eigen::Index r = g.design.cols();
  Matrix gram = Matrix::Zero(r, r);
  gram.selfadjointView<Eigen::Lower>().rankUpdate(g.design.transpose());
  Vector rhs = g.design.transpose() * g.targets;
  if (noise != nullptr) rhs += *noise;
  solve_regularized_normal(gram, lambda, rhs);
  return rhs;
}

FactorPair initialize(const ObservedMatrix& obs, const SolverConfig& config) {
  RandomStream init(derive_seed(config.seed, {tag(StreamTag::kInit)}));
  const auto m = static_cast<Eigen::Index>(obs.rows());
  const auto n = static_cast<Eigen::Index>(obs.cols());
  const Eigen::Index r = config.rank;
  const double scale = 1.0 / std::sqrt(static_cast<double>(r));
  FactorPair f{Matrix(m, r), Matrix(n, r)};
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index k = 0; k < r; ++k) f.U(i, k) = scale * init.standard_normal();
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index k = 0; k < r; ++k) f.V(j, k) = scale * init.standard_normal();
  return f;
}

enum class ColumnUpdate { kNoisyRidge, kRirls };

FactorPair alternate(const ObservedMatrix& obs, const SolverConfig& config,
                     const SolveOptions& options, ColumnUpdate column_update) {
  validate(config, obs);
  const Compressed rows = compress(obs, /*by_row=*/true);
  const Compressed cols = compress(obs, /*by_row=*/false);
  FactorPair f = initialize(obs, config);
  const Eigen::Index r = config.rank;
  const bool noisy = config.mechanism.kind() != MechanismKind::kNone;

  std::atomic<std::uint64_t> noise_draws{0};
  std::atomic<std::uint64_t> noise_values{0};
  std::atomic<std::uint64_t> noise_vectors{0};
  std::uint64_t row_sweep_draws = 0;

  const IrlsConfig irls{config.huber_loss_alpha, config.lambda,
                        config.inner_iterations, config.mechanism};

  if (options.observer) options.observer(-1, HalfSweep::kColumns, f);

  for (int it = 0; it < config.outer_iterations; ++it) {
    const std::uint64_t draws_before = noise_draws.load();
    parallel_for(obs.rows(), options.threads, [&](std::size_t i) {
      f.U.row(static_cast<Eigen::Index>(i)) =
          ridge_update(gather(rows, i, f.V), config.lambda, nullptr).transpose();
    });
    row_sweep_draws += noise_draws.load() - draws_before;
    if (options.observer) options.observer(it, HalfSweep::kRows, f);

    parallel_for(obs.cols(), options.threads, [&](std::size_t j) {
      RandomStream stream(
          derive_seed(config.seed, {tag(StreamTag::kNoise),
                                    static_cast<std::uint64_t>(it), j}),
          &noise_draws);
      const Gathered g = gather(cols, j, f.U);
      Vector v;
      if (column_update == ColumnUpdate::kNoisyRidge) {
        Vector t = Vector::Zero(r);
        if (noisy) {
          sample_into(config.mechanism, {t.data(), static_cast<std::size_t>(r)},
                      stream);
          noise_values += static_cast<std::uint64_t>(r);
          ++noise_vectors;
        }
        v = ridge_update(g, config.lambda, &t);
      } else {
        IrlsTrace trace;
        v = r_irls(g.targets, g.design, irls, stream, &trace);
        noise_values += trace.noise_values;
        if (noisy) noise_vectors += static_cast<std::uint64_t>(irls.iterations);
      }
      f.V.row(static_cast<Eigen::Index>(j)) = v.transpose();
    });
    if (options.observer) options.observer(it, HalfSweep::kColumns, f);
  }

  if (options.stats != nullptr) {
    options.stats->noise_stream_draws = noise_draws.load();
    options.stats->row_sweep_noise_draws = row_sweep_draws;
    options.stats->noise_values = noise_values.load();
    options.stats->noise_vectors = noise_vectors.load();
  }
  return f;
}

}  // namespace

ObservedMatrix::ObservedMatrix(std::size_t rows, std::size_t cols,
                               std::vector<Entry> entries, ValueRange range)
    : rows_(rows), cols_(cols), entries_(std::move(entries)), range_(range) {
  if (!(range_.lo < range_.hi) || !std::isfinite(range_.lo) ||
      !std::isfinite(range_.hi)) {
    throw ConfigError(fmt::format("ObservedMatrix: value range ({}, {}) is empty",
                                  range_.lo, range_.hi));
  }
  std::vector<std::size_t> keys;
  keys.reserve(entries_.size());
  for (const Entry& e : entries_) {
    if (e.row >= rows_ || e.col >= cols_) {
      throw ConfigError(fmt::format(
          "ObservedMatrix: cell ({}, {}) outside {} x {}", e.row, e.col, rows_,
          cols_));
    }
    if (!std::isfinite(e.value)) {
      throw ConfigError(fmt::format("ObservedMatrix: cell ({}, {}) is not finite",
                                    e.row, e.col));
    }
    keys.push_back(e.row * cols_ + e.col);
  }
  std::sort(keys.begin(), keys.end());
  const auto dup = std::adjacent_find(keys.begin(), keys.end());
  if (dup != keys.end()) {
    throw ConfigError(fmt::format("ObservedMatrix: duplicate cell ({}, {})",
                                  *dup / cols_, *dup % cols_));
  }
}

double ObservedMatrix::observed_fraction() const {
  if (rows_ == 0 || cols_ == 0) return 0.0;
  return static_cast<double>(entries_.size()) /
         (static_cast<double>(rows_) * static_cast<double>(cols_));
}

IndexSets row_index_sets(const ObservedMatrix& obs) {
  IndexSets sets;
  sets.by_row.resize(obs.rows());
  sets.by_col.resize(obs.cols());
  for (const Entry& e : obs.entries()) {
    sets.by_row[e.row].push_back(e.col);
    sets.by_col[e.col].push_back(e.row);
  }
  for (auto& s : sets.by_row) std::sort(s.begin(), s.end());
  for (auto& s : sets.by_col) std::sort(s.begin(), s.end());
  return sets;
}

std::string_view to_string(SolverKind kind) {
  return kind == SolverKind::kAls ? "als" : "irls";
}

SolverKind parse_solver_kind(std::string_view name) {
  if (name == "als") return SolverKind::kAls;
  if (name == "irls") return SolverKind::kIrls;
  throw ConfigError(fmt::format("unknown solver '{}'", name));
}

void validate(const SolverConfig& config, const ObservedMatrix& obs) {
  if (config.rank < 1) throw ConfigError("SolverConfig: rank must be >= 1");
  if (static_cast<std::size_t>(config.rank) > std::min(obs.rows(), obs.cols())) {
    throw ConfigError(fmt::format("SolverConfig: rank {} exceeds min(m, n) = {}",
                                  config.rank, std::min(obs.rows(), obs.cols())));
  }
  if (!(config.lambda > 0.0) || !std::isfinite(config.lambda)) {
    throw ConfigError("SolverConfig: lambda must be > 0");
  }
  if (config.outer_iterations < 1) {
    throw ConfigError("SolverConfig: outer_iterations must be >= 1");
  }
  if (config.inner_iterations < 1) {
    throw ConfigError("SolverConfig: inner_iterations must be >= 1");
  }
  if (!(config.huber_loss_alpha > 0.0)) {
    throw ConfigError("SolverConfig: huber_loss_alpha must be > 0");
  }
  if (config.trials < 1) throw ConfigError("SolverConfig: trials must be >= 1");
}

FactorPair noisy_als(const ObservedMatrix& obs, const SolverConfig& config,
                     const SolveOptions& options) {
  return alternate(obs, config, options, ColumnUpdate::kNoisyRidge);
}

FactorPair irls_huber(const ObservedMatrix& obs, const SolverConfig& config,
                      const SolveOptions& options) {
  return alternate(obs, config, options, ColumnUpdate::kRirls);
}

FactorPair solve(SolverKind kind, const ObservedMatrix& obs,
                 const SolverConfig& config, const SolveOptions& options) {
  return kind == SolverKind::kAls ? noisy_als(obs, config, options)
                                  : irls_huber(obs, config, options);
}

double als_objective(const ObservedMatrix& obs, const FactorPair& factors,
                     double lambda) {
  double fit = 0.0;
  for (const Entry& e : obs.entries()) {
    const double pred = factors.U.row(static_cast<Eigen::Index>(e.row))
                            .dot(factors.V.row(static_cast<Eigen::Index>(e.col)));
    fit += (e.value - pred) * (e.value - pred);
  }
  return fit + lambda * (factors.U.squaredNorm() + factors.V.squaredNorm());
}

double rmse(const Eigen::Ref<const Matrix>& truth, const FactorPair& factors) {
  if (truth.rows() != factors.U.rows() || truth.cols() != factors.V.rows()) {
    throw UsageError("rmse: truth and factor dimensions disagree");
  }
  if (truth.size() == 0) throw UsageError("rmse: empty matrix");
  const double frob = (truth - factors.U * factors.V.transpose()).norm();
  return frob / std::sqrt(static_cast<double>(truth.size()));
}

double rmse(std::span<const Entry> cells, const FactorPair& factors) {
  if (cells.empty()) throw UsageError("rmse: empty index set");
  double sum = 0.0;
  for (const Entry& e : cells) {
    if (static_cast<Eigen::Index>(e.row) >= factors.U.rows() ||
        static_cast<Eigen::Index>(e.col) >= factors.V.rows()) {
      throw UsageError("rmse: cell outside factor dimensions");
    }
    const double pred = factors.U.row(static_cast<Eigen::Index>(e.row))
                            .dot(factors.V.row(static_cast<Eigen::Index>(e.col)));
    sum += (e.value - pred) * (e.value - pred);
  }
  return std::sqrt(sum / static_cast<double>(cells.size()));
}

double rmse(const ObservedMatrix& obs, const FactorPair& factors,
            RmseScope scope) {
  if (scope == RmseScope::kAllEntries && !obs.fully_observed()) {
    throw UsageError(
        "rmse: all-entries scope needs a fully known matrix; use the observed "
        "or held-out index set instead");
  }
  return rmse(std::span<const Entry>(obs.entries()), factors);
}

Matrix complete(const ObservedMatrix& obs, const FactorPair& factors,
                bool clip) {
  if (factors.U.rows() != static_cast<Eigen::Index>(obs.rows()) ||
      factors.V.rows() != static_cast<Eigen::Index>(obs.cols()) ||
      factors.U.cols() != factors.V.cols()) {
    throw UsageError("complete: factor dimensions do not match the matrix");
  }
  Matrix z = factors.U * factors.V.transpose();
  if (clip) {
    z = z.cwiseMax(obs.value_range().lo).cwiseMin(obs.value_range().hi);
  }
  return z;
}

}  // namespace huberdp
