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

#include "huberdp/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <string_view>
#include <unordered_map>

#include <fmt/format.h>

#include "json.hpp"

#include "huberdp/errors.hpp"

namespace huberdp {
namespace {

using nlohmann::json;

constexpr double kRatingLo = 1.0;
constexpr double kRatingHi = 5.0;

// Partial Fisher-Yates: the first k positions of `pool` become a uniform
// sample without replacement.
template <typename T>
void partial_shuffle(std::vector<T>& pool, std::size_t k, RandomStream& rng) {
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.uniform_index(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(sep, start);
    out.push_back(trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

bool parse_id(std::string_view field, std::uint64_t& out) {
  if (field.empty()) return false;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, out);
  return ec == std::errc() && ptr == end;
}

bool parse_real(std::string_view field, double& out) {
  if (field.empty()) return false;
  // std::from_chars for double is not available in every libstdc++ we target.
  std::string buf(field);
  char* end = nullptr;
  out = std::strtod(buf.c_str(), &end);
  return end == buf.c_str() + buf.size() && std::isfinite(out);
}

struct RawRating {
  std::uint64_t user;
  std::uint64_t item;
  double rating;
};

// Applies last-write-wins and counts out-of-range ratings.
struct RatingAccumulator {
  std::vector<RawRating> ratings;
  std::unordered_map<std::uint64_t, std::size_t> slot;  // key -> index
  std::size_t records = 0;
  std::size_t duplicates = 0;
  std::size_t out_of_range = 0;

  void add(const RawRating& r) {
    ++records;
    if (r.rating < kRatingLo || r.rating > kRatingHi) ++out_of_range;
    const std::uint64_t key = (r.user << 32) ^ r.item;
    const auto [it, inserted] = slot.try_emplace(key, ratings.size());
    if (inserted) {
      ratings.push_back(r);
    } else {
      ++duplicates;
      ratings[it->second].rating = r.rating;
    }
  }
};

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open '{}'", path.string()));
  return in;
}

json budget_to_json(const PrivacyBudget& b) {
  json j;
  if (std::isfinite(b.epsilon)) {
    j["epsilon"] = b.epsilon;
  } else {
    j["epsilon"] = "inf";
  }
  j["delta"] = b.delta;
  return j;
}

PrivacyBudget budget_from_json(const json& j) {
  PrivacyBudget b;
  const json& e = j.at("epsilon");
  b.epsilon = e.is_string() ? std::numeric_limits<double>::infinity()
                            : e.get<double>();
  b.delta = j.at("delta").get<double>();
  return b;
}

json mechanism_to_json(const MechanismConfig& m) {
  return json{{"kind", to_string(m.kind())}, {"scale", m.scale()}};
}

MechanismConfig mechanism_from_json(const json& j) {
  const MechanismKind kind = parse_mechanism_kind(j.at("kind").get<std::string>());
  const double scale = j.at("scale").get<double>();
  switch (kind) {
    case MechanismKind::kNone:
      return MechanismConfig::none();
    case MechanismKind::kHuber:
      return MechanismConfig::huber(scale);
    case MechanismKind::kLaplace:
      return MechanismConfig::laplace(scale);
    case MechanismKind::kGaussian:
      return MechanismConfig::gaussian(scale);
  }
  return MechanismConfig::none();
}

std::string csv_number(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  return fmt::format("{}", x);
}

}  // namespace

// ---------------------------------------------------------------------------
// Synthetic data

void validate(const SyntheticSpec& spec) {
  if (spec.rows == 0 || spec.cols == 0) {
    throw ConfigError("SyntheticSpec: dimensions must be positive");
  }
  if (spec.rank == 0 || spec.rank > std::min(spec.rows, spec.cols)) {
    throw ConfigError(fmt::format("SyntheticSpec: rank {} not in [1, {}]",
                                  spec.rank, std::min(spec.rows, spec.cols)));
  }
  if (!(spec.observed_fraction > 0.0 && spec.observed_fraction <= 1.0)) {
    throw ConfigError(fmt::format(
        "SyntheticSpec: observed_fraction {} not in (0, 1]", spec.observed_fraction));
  }
}

std::size_t fraction_count(double fraction, std::size_t total) {
  const double exact = fraction * static_cast<double>(total);
  const auto count = static_cast<std::size_t>(std::floor(exact * (1.0 + 1e-12)));
  return std::min(count, total);
}

Matrix generate_low_rank(std::size_t rows, std::size_t cols, std::size_t rank,
                         RandomStream& rng) {
  const auto m = static_cast<Eigen::Index>(rows);
  const auto n = static_cast<Eigen::Index>(cols);
  const auto r = static_cast<Eigen::Index>(rank);
  Matrix u(m, r);
  Matrix v(n, r);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index k = 0; k < r; ++k) u(i, k) = rng.standard_normal();
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index k = 0; k < r; ++k) v(j, k) = rng.standard_normal();
  return (u * v.transpose()) / std::sqrt(static_cast<double>(rank));
}

ObservedMatrix mask_uniform(const Matrix& truth, double fraction,
                            RandomStream& rng, ValueRange range) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw ConfigError(fmt::format("mask_uniform: fraction {} not in (0, 1]", fraction));
  }
  const auto rows = static_cast<std::size_t>(truth.rows());
  const auto cols = static_cast<std::size_t>(truth.cols());
  const std::size_t total = rows * cols;
  const std::size_t keep = fraction_count(fraction, total);
  std::vector<std::size_t> cells(total);
  std::iota(cells.begin(), cells.end(), std::size_t{0});
  partial_shuffle(cells, keep, rng);
  cells.resize(keep);
  std::sort(cells.begin(), cells.end());
  std::vector<Entry> entries;
  entries.reserve(keep);
  for (std::size_t c : cells) {
    const std::size_t i = c / cols;
    const std::size_t j = c % cols;
    entries.push_back({i, j, truth(static_cast<Eigen::Index>(i),
                                   static_cast<Eigen::Index>(j))});
  }
  return ObservedMatrix(rows, cols, std::move(entries), range);
}

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  validate(spec);
  RandomStream truth_rng(derive_seed(spec.seed, {tag(StreamTag::kTruth)}));
  RandomStream mask_rng(derive_seed(spec.seed, {tag(StreamTag::kMask)}));
  Matrix truth = generate_low_rank(spec.rows, spec.cols, spec.rank, truth_rng);
  ObservedMatrix observed = mask_uniform(truth, spec.observed_fraction, mask_rng);
  return {std::move(truth), std::move(observed)};
}

// ---------------------------------------------------------------------------
// Ratings files

RatingsIngest parse_movielens(std::istream& in) {
  RatingAccumulator acc;
  std::uint64_t max_user = 0;
  std::uint64_t max_item = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(line, '\t');
    if (fields.size() != 4) {
      throw ParseError(fmt::format("expected 4 tab-separated fields, found {}",
                                   fields.size()),
                       line_no);
    }
    RawRating r{};
    std::uint64_t timestamp = 0;
    if (!parse_id(fields[0], r.user) || r.user == 0) {
      throw ParseError(fmt::format("bad user id '{}'", fields[0]), line_no);
    }
    if (!parse_id(fields[1], r.item) || r.item == 0) {
      throw ParseError(fmt::format("bad item id '{}'", fields[1]), line_no);
    }
    if (!parse_real(fields[2], r.rating)) {
      throw ParseError(fmt::format("bad rating '{}'", fields[2]), line_no);
    }
    if (!parse_id(fields[3], timestamp)) {
      throw ParseError(fmt::format("bad timestamp '{}'", fields[3]), line_no);
    }
    if (r.user > 0xffffffffULL || r.item > 0xffffffffULL) {
      throw ParseError("id exceeds 32 bits", line_no);
    }
    max_user = std::max(max_user, r.user);
    max_item = std::max(max_item, r.item);
    acc.add(r);
  }
  if (acc.records == 0) throw EmptyDatasetError("MovieLens input has no ratings");

  std::vector<Entry> entries;
  entries.reserve(acc.ratings.size());
  for (const RawRating& r : acc.ratings) {
    entries.push_back({static_cast<std::size_t>(r.user - 1),
                       static_cast<std::size_t>(r.item - 1), r.rating});
  }
  return {ObservedMatrix(max_user, max_item, std::move(entries),
                         {kRatingLo, kRatingHi}),
          acc.records, acc.duplicates, acc.out_of_range};
}

RatingsIngest parse_movielens(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  return parse_movielens(in);
}

RatingsIngest parse_sweetrs(std::istream& in) {
  RatingAccumulator acc;
  std::string line;
  std::size_t line_no = 0;
  char sep = 0;
  bool first_content = true;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view content = trim(line);
    if (content.empty()) continue;
    if (sep == 0) {
      for (char c : {'\t', ';', ','}) {
        if (content.find(c) != std::string_view::npos) {
          sep = c;
          break;
        }
      }
      if (sep == 0) {
        throw ParseError("no field separator (expected ',', ';' or tab)", line_no);
      }
    }
    const auto fields = split(content, sep);
    if (fields.size() < 3) {
      throw ParseError(fmt::format("expected at least 3 fields, found {}",
                                   fields.size()),
                       line_no);
    }
    RawRating r{};
    const bool numeric_ids = parse_id(fields[0], r.user) && parse_id(fields[1], r.item);
    if (first_content) {
      first_content = false;
      if (!numeric_ids) continue;  // header
    }
    if (!numeric_ids) {
      throw ParseError(fmt::format("bad user/item id '{}', '{}'", fields[0], fields[1]),
                       line_no);
    }
    if (!parse_real(fields[2], r.rating)) {
      throw ParseError(fmt::format("bad rating '{}'", fields[2]), line_no);
    }
    if (r.user > 0xffffffffULL || r.item > 0xffffffffULL) {
      throw ParseError("id exceeds 32 bits", line_no);
    }
    acc.add(r);
  }
  if (acc.records == 0) throw EmptyDatasetError("SweetRS input has no ratings");

  std::map<std::uint64_t, std::size_t> users;
  std::map<std::uint64_t, std::size_t> items;
  for (const RawRating& r : acc.ratings) {
    users.emplace(r.user, 0);
    items.emplace(r.item, 0);
  }
  std::size_t next = 0;
  for (auto& [id, index] : users) index = next++;
  next = 0;
  for (auto& [id, index] : items) index = next++;

  std::vector<Entry> entries;
  entries.reserve(acc.ratings.size());
  for (const RawRating& r : acc.ratings) {
    entries.push_back({users.at(r.user), items.at(r.item), r.rating});
  }
  return {ObservedMatrix(users.size(), items.size(), std::move(entries),
                         {kRatingLo, kRatingHi}),
          acc.records, acc.duplicates, acc.out_of_range};
}

RatingsIngest parse_sweetrs(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  return parse_sweetrs(in);
}

RatingsIngest parse_ratings(RatingsFormat format,
                            const std::filesystem::path& path) {
  return format == RatingsFormat::kMovieLens100k ? parse_movielens(path)
                                                 : parse_sweetrs(path);
}

ObservedMatrix subsample(const ObservedMatrix& obs, double target_fraction,
                         RandomStream& rng) {
  if (!(target_fraction > 0.0)) {
    throw ConfigError(fmt::format("subsample: target fraction {} must be > 0",
                                  target_fraction));
  }
  const double current = obs.observed_fraction();
  if (target_fraction > current * (1.0 + 1e-12)) {
    throw ConfigError(fmt::format(
        "subsample: target fraction {} exceeds the observed fraction {}",
        target_fraction, current));
  }
  const std::size_t keep =
      std::min(fraction_count(target_fraction, obs.rows() * obs.cols()), obs.size());
  if (keep == obs.size()) return obs;

  std::vector<std::size_t> order(obs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  partial_shuffle(order, keep, rng);
  order.resize(keep);
  std::sort(order.begin(), order.end());
  std::vector<Entry> entries;
  entries.reserve(keep);
  for (std::size_t k : order) entries.push_back(obs.entries()[k]);
  return ObservedMatrix(obs.rows(), obs.cols(), std::move(entries),
                        obs.value_range());
}

HoldoutSplit holdout_split(const ObservedMatrix& obs, double test_fraction,
                           RandomStream& rng) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ConfigError(fmt::format("holdout_split: test fraction {} not in (0, 1)",
                                  test_fraction));
  }
  const std::size_t test_size = fraction_count(test_fraction, obs.size());
  if (test_size == 0 || test_size == obs.size()) {
    throw ConfigError(fmt::format(
        "holdout_split: {} of {} entries leaves an empty side", test_size,
        obs.size()));
  }
  std::vector<std::size_t> order(obs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  partial_shuffle(order, test_size, rng);
  std::vector<bool> is_test(obs.size(), false);
  for (std::size_t k = 0; k < test_size; ++k) is_test[order[k]] = true;

  std::vector<Entry> train;
  std::vector<Entry> test;
  train.reserve(obs.size() - test_size);
  test.reserve(test_size);
  for (std::size_t k = 0; k < obs.size(); ++k) {
    (is_test[k] ? test : train).push_back(obs.entries()[k]);
  }
  return {ObservedMatrix(obs.rows(), obs.cols(), std::move(train),
                         obs.value_range()),
          std::move(test)};
}

void write_triplets(std::ostream& out, const ObservedMatrix& obs) {
  for (const Entry& e : obs.entries()) {
    out << fmt::format("{}\t{}\t{}\n", e.row + 1, e.col + 1, e.value);
  }
}

// ---------------------------------------------------------------------------
// Run records

TrialStats trial_stats(std::span<const double> values) {
  TrialStats s;
  if (values.empty()) return s;
  const double n = static_cast<double>(values.size());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / (n - 1.0));
  }
  return s;
}

std::string to_json_string(const RunRecord& r) {
  json config{
      {"rank", r.config.rank},
      {"lambda", r.config.lambda},
      {"outer_iterations", r.config.outer_iterations},
      {"inner_iterations", r.config.inner_iterations},
      {"huber_loss_alpha", r.config.huber_loss_alpha},
      {"mechanism", mechanism_to_json(r.config.mechanism)},
      {"seed", r.config.seed},
      {"trials", r.config.trials},
  };
  json j{
      {"schema_version", r.schema_version},
      {"dataset",
       {{"name", r.dataset},
        {"rows", r.rows},
        {"cols", r.cols},
        {"observed_entries", r.observed_entries},
        {"observed_fraction", r.observed_fraction},
        {"fraction", r.fraction}}},
      {"solver", r.solver},
      {"solver_kind", to_string(r.solver_kind)},
      {"config", config},
      {"variance", r.variance},
      {"clip", r.clip},
      {"budget", budget_to_json(r.budget)},
      {"delta_f", r.delta_f},
      {"log_base", to_string(r.log_base)},
      {"rmse_scope", r.rmse_scope},
      {"rmse_trials", r.rmse_trials},
      {"observed_rmse_trials", r.observed_rmse_trials},
      {"rmse_mean", r.rmse_mean},
      {"rmse_std", r.rmse_std},
      {"seed", r.seed},
      {"trial_seeds", r.trial_seeds},
      {"noise_draws", r.noise_draws},
      {"noise_values", r.noise_values},
      {"wall_clock_seconds", r.wall_clock_seconds},
      {"ok", r.ok},
      {"error", r.error},
  };
  return j.dump(2) + "\n";
}

RunRecord run_record_from_json_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(fmt::format("run record is not valid JSON: {}", e.what()));
  }
  if (!j.contains("schema_version") || !j["schema_version"].is_number_integer()) {
    throw SchemaVersionError("run record has no integer schema_version");
  }
  const int version = j["schema_version"].get<int>();
  if (version != kRunRecordSchemaVersion) {
    throw SchemaVersionError(fmt::format(
        "run record schema_version {} is not supported (expected {})", version,
        kRunRecordSchemaVersion));
  }
  try {
    RunRecord r;
    r.schema_version = version;
    const json& d = j.at("dataset");
    r.dataset = d.at("name").get<std::string>();
    r.rows = d.at("rows").get<std::size_t>();
    r.cols = d.at("cols").get<std::size_t>();
    r.observed_entries = d.at("observed_entries").get<std::size_t>();
    r.observed_fraction = d.at("observed_fraction").get<double>();
    r.fraction = d.at("fraction").get<double>();
    r.solver = j.at("solver").get<std::string>();
    r.solver_kind = parse_solver_kind(j.at("solver_kind").get<std::string>());
    const json& c = j.at("config");
    r.config.rank = c.at("rank").get<int>();
    r.config.lambda = c.at("lambda").get<double>();
    r.config.outer_iterations = c.at("outer_iterations").get<int>();
    r.config.inner_iterations = c.at("inner_iterations").get<int>();
    r.config.huber_loss_alpha = c.at("huber_loss_alpha").get<double>();
    r.config.mechanism = mechanism_from_json(c.at("mechanism"));
    r.config.seed = c.at("seed").get<std::uint64_t>();
    r.config.trials = c.at("trials").get<int>();
    r.variance = j.at("variance").get<double>();
    r.clip = j.at("clip").get<bool>();
    r.budget = budget_from_json(j.at("budget"));
    r.delta_f = j.at("delta_f").get<double>();
    r.log_base = parse_log_base(j.at("log_base").get<std::string>());
    r.rmse_scope = j.at("rmse_scope").get<std::string>();
    r.rmse_trials = j.at("rmse_trials").get<std::vector<double>>();
    r.observed_rmse_trials = j.at("observed_rmse_trials").get<std::vector<double>>();
    r.rmse_mean = j.at("rmse_mean").get<double>();
    r.rmse_std = j.at("rmse_std").get<double>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.trial_seeds = j.at("trial_seeds").get<std::vector<std::uint64_t>>();
    r.noise_draws = j.at("noise_draws").get<std::vector<std::uint64_t>>();
    r.noise_values = j.at("noise_values").get<std::vector<std::uint64_t>>();
    r.wall_clock_seconds = j.at("wall_clock_seconds").get<double>();
    r.ok = j.at("ok").get<bool>();
    r.error = j.at("error").get<std::string>();
    return r;
  } catch (const json::exception& e) {
    throw std::runtime_error(fmt::format("malformed run record: {}", e.what()));
  }
}

void persist_run(const RunRecord& record, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
  out << to_json_string(record);
  if (!out) throw std::runtime_error(fmt::format("write to '{}' failed", path.string()));
}

RunRecord load_run(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  std::stringstream buf;
  buf << in.rdbuf();
  return run_record_from_json_string(buf.str());
}

std::string summary_csv(std::span<const RunRecord> records) {
  std::string out = std::string(kSummaryCsvHeader) + "\n";
  for (const RunRecord& r : records) {
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", r.dataset,
                       to_string(r.config.mechanism.kind()), r.solver,
                       csv_number(r.variance), csv_number(r.fraction),
                       r.config.rank, csv_number(r.budget.epsilon),
                       csv_number(r.budget.delta),
                       r.ok ? csv_number(r.rmse_mean) : "failed",
                       r.ok ? csv_number(r.rmse_std) : "failed", r.seed);
  }
  return out;
}

}  // namespace huberdp
