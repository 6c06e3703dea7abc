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

#ifndef HUBERDP_DATA_IO_HPP_
#define HUBERDP_DATA_IO_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "huberdp/lrmc.hpp"
#include "huberdp/mechanisms.hpp"
#include "huberdp/random.hpp"

namespace huberdp {

// ---------------------------------------------------------------------------
// Synthetic data

struct SyntheticSpec {
  std::size_t rows = 500;
  std::size_t cols = 500;
  std::size_t rank = 5;
  double observed_fraction = 0.15;
  std::uint64_t seed = 0;
};

void validate(const SyntheticSpec& spec);

struct SyntheticData {
  Matrix truth;
  ObservedMatrix observed;
};

// X = U V^T / sqrt(rank) with U, V i.i.d. standard normal, so each entry of X
// has unit variance.
Matrix generate_low_rank(std::size_t rows, std::size_t cols, std::size_t rank,
                         RandomStream& rng);

// Keeps floor(fraction * m * n) cells of `truth`, chosen uniformly without
// replacement. Entries are returned in row-major order.
ObservedMatrix mask_uniform(const Matrix& truth, double fraction,
                            RandomStream& rng, ValueRange range = {});

// Truth and mask come from independent streams derived from spec.seed.
SyntheticData generate_synthetic(const SyntheticSpec& spec);

// floor(fraction * total), tolerant of fractions that were themselves computed
// as count / total.
std::size_t fraction_count(double fraction, std::size_t total);

// ---------------------------------------------------------------------------
// Ratings files

enum class RatingsFormat { kMovieLens100k, kSweetRS };

struct RatingsIngest {
  ObservedMatrix matrix;
  std::size_t records = 0;       // data lines read
  std::size_t duplicates = 0;    // later record replaced an earlier one
  std::size_t out_of_range = 0;  // rating outside the 1..5 scale, retained
};

// MovieLens u.data: `user \t item \t rating \t timestamp`, 1-indexed ids.
// m = max user id, n = max item id.
RatingsIngest parse_movielens(std::istream& in);
RatingsIngest parse_movielens(const std::filesystem::path& path);

// SweetRS dump: `user<sep>item<sep>rating[<sep>...]` with sep one of , ; or
// tab, optional header line. Ids are remapped to dense 0-based indices in
// ascending id order.
RatingsIngest parse_sweetrs(std::istream& in);
RatingsIngest parse_sweetrs(const std::filesystem::path& path);

RatingsIngest parse_ratings(RatingsFormat format,
                            const std::filesystem::path& path);

// Uniform subset of floor(target_fraction * m * n) entries, kept in their
// original order. Throws ConfigError when target exceeds the current fraction.
ObservedMatrix subsample(const ObservedMatrix& obs, double target_fraction,
                         RandomStream& rng);

struct HoldoutSplit {
  ObservedMatrix train;
  std::vector<Entry> test;
};

// Disjoint partition of Omega with floor(test_fraction * |Omega|) test cells.
HoldoutSplit holdout_split(const ObservedMatrix& obs, double test_fraction,
                           RandomStream& rng);

// Writes cells as `row \t col \t value` lines, 1-indexed.
void write_triplets(std::ostream& out, const ObservedMatrix& obs);

// ---------------------------------------------------------------------------
// Run records

inline constexpr int kRunRecordSchemaVersion = 1;

struct RunRecord {
  int schema_version = kRunRecordSchemaVersion;

  // Dataset descriptor.
  std::string dataset;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t observed_entries = 0;
  double observed_fraction = 0.0;
  // Requested visible fraction (the sweep coordinate).
  double fraction = 0.0;

  // Configuration snapshot. `solver` is the display label ("als", "irls",
  // "irls-2"); the solver kind and K live in `config`.
  std::string solver;
  SolverKind solver_kind = SolverKind::kAls;
  SolverConfig config;
  double variance = 0.0;
  bool clip = false;

  // Privacy accounting of one noise release.
  PrivacyBudget budget;
  double delta_f = 5.0;
  LogBase log_base = LogBase::kNatural;

  // "all_entries" (synthetic) or "holdout" (real data).
  std::string rmse_scope;
  std::vector<double> rmse_trials;
  // Real data only: RMSE over the training cells.
  std::vector<double> observed_rmse_trials;
  double rmse_mean = 0.0;
  double rmse_std = 0.0;

  std::uint64_t seed = 0;
  std::vector<std::uint64_t> trial_seeds;
  std::vector<std::uint64_t> noise_draws;
  std::vector<std::uint64_t> noise_values;
  double wall_clock_seconds = 0.0;

  bool ok = true;
  std::string error;

  bool operator==(const RunRecord&) const = default;
};

struct TrialStats {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 for a single trial
};

TrialStats trial_stats(std::span<const double> values);

std::string to_json_string(const RunRecord& record);
RunRecord run_record_from_json_string(const std::string& text);

void persist_run(const RunRecord& record, const std::filesystem::path& path);
RunRecord load_run(const std::filesystem::path& path);

inline constexpr const char* kSummaryCsvHeader =
    "dataset,mechanism,solver,variance,fraction,rank,epsilon,delta,rmse_mean,"
    "rmse_std,seed";

// One row per record, header first.
std::string summary_csv(std::span<const RunRecord> records);

}  // namespace huberdp

#endif  // HUBERDP_DATA_IO_HPP_
