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

#include <vector>

#include <benchmark/benchmark.h>

#include "huberdp/data_io.hpp"
#include "huberdp/lrmc.hpp"
#include "huberdp/mechanisms.hpp"
#include "huberdp/robust_solvers.hpp"

namespace {

using namespace huberdp;

void BM_SampleNoise(benchmark::State& state) {
  const auto kind = static_cast<MechanismKind>(state.range(0));
  const MechanismConfig config = mechanism_for_variance(kind, 2.0);
  std::vector<double> out(4096);
  RandomStream rng(1);
  for (auto _ : state) {
    sample_into(config, out, rng);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(out.size()));
  state.SetLabel(std::string(to_string(kind)));
}
BENCHMARK(BM_SampleNoise)
    ->Arg(static_cast<int>(MechanismKind::kHuber))
    ->Arg(static_cast<int>(MechanismKind::kLaplace))
    ->Arg(static_cast<int>(MechanismKind::kGaussian));

void BM_CalibrateAlpha(benchmark::State& state) {
  double v = 1.5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(calibrate_alpha(v));
    v = v > 100.0 ? 1.5 : v * 1.1;
  }
}
BENCHMARK(BM_CalibrateAlpha);

void BM_RidgeSolve(benchmark::State& state) {
  const auto p = state.range(0);
  const auto q = state.range(1);
  RandomStream rng(2);
  Matrix a(p, q);
  Vector y(p);
  for (Eigen::Index i = 0; i < p; ++i) {
    y[i] = rng.standard_normal();
    for (Eigen::Index k = 0; k < q; ++k) a(i, k) = rng.standard_normal();
  }
  for (auto _ : state) benchmark::DoNotOptimize(ridge_solve(a, y, 0.5));
}
BENCHMARK(BM_RidgeSolve)->Args({75, 5})->Args({500, 5})->Args({1000, 32});

void BM_RIrls(benchmark::State& state) {
  RandomStream data(3);
  Matrix a(75, 5);
  Vector y(75);
  for (Eigen::Index i = 0; i < 75; ++i) {
    y[i] = data.standard_normal();
    for (Eigen::Index k = 0; k < 5; ++k) a(i, k) = data.standard_normal();
  }
  const IrlsConfig config{1.0, 0.5, static_cast<int>(state.range(0)),
                          MechanismConfig::huber(1.0)};
  RandomStream rng(4);
  for (auto _ : state) benchmark::DoNotOptimize(r_irls(y, a, config, rng));
}
BENCHMARK(BM_RIrls)->Arg(1)->Arg(20);

void BM_Sweep(benchmark::State& state) {
  const auto kind = static_cast<SolverKind>(state.range(0));
  const SyntheticData d = generate_synthetic(SyntheticSpec{500, 500, 5, 0.15, 5});
  SolverConfig config;
  config.outer_iterations = 1;
  config.mechanism = MechanismConfig::huber(1.0);
  SolveOptions options;
  options.threads = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(solve(kind, d.observed, config, options));
  state.SetLabel(std::string(to_string(kind)));
}
BENCHMARK(BM_Sweep)
    ->Args({static_cast<int>(SolverKind::kAls), 1})
    ->Args({static_cast<int>(SolverKind::kIrls), 1})
    ->Args({static_cast<int>(SolverKind::kIrls), 4})
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
