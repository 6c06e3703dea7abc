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

#ifndef HUBERDP_RANDOM_HPP_
#define HUBERDP_RANDOM_HPP_

#include <atomic>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace huberdp {

// Counter-based seed split. Mixes a master seed with a list of stream
// coordinates (purpose tag, trial, iteration, column, ...) through the
// SplitMix64 finalizer. The same coordinates always give the same child seed,
// independent of the order in which streams are created, which is what makes
// parallel sweeps bit-identical to sequential ones.
std::uint64_t derive_seed(std::uint64_t master,
                          std::initializer_list<std::uint64_t> coordinates);

// Stream purpose tags used with derive_seed.
enum class StreamTag : std::uint64_t {
  kTruth = 0x7472757468ULL,
  kMask = 0x6d61736bULL,
  kInit = 0x696e6974ULL,
  kNoise = 0x6e6f697365ULL,
  kSubsample = 0x73756273ULL,
  kHoldout = 0x686f6c64ULL,
  kTrial = 0x747269616cULL,
};

constexpr std::uint64_t tag(StreamTag t) { return static_cast<std::uint64_t>(t); }

// Seeded pseudo-random stream. All variate conversions are written out here
// (rather than delegated to <random> distributions) so that results are
// identical across standard library implementations.
//
// Not thread-safe; each concurrent caller owns its own stream. An optional
// shared counter accumulates raw draws across many streams for auditing.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed,
                        std::atomic<std::uint64_t>* shared_counter = nullptr);

  std::uint64_t next_u64();

  // Uniform on the open interval (0, 1).
  double uniform();
  double standard_normal();
  // Exponential with the given rate (mean 1 / rate).
  double exponential(double rate);
  // Uniform integer in [0, n); n > 0.
  std::uint64_t uniform_index(std::uint64_t n);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t draws() const { return draws_; }

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
  std::uint64_t draws_ = 0;
  std::atomic<std::uint64_t>* shared_counter_;
};

// Phi^{-1}(p) for p in (0, 1).
double standard_normal_quantile(double p);
// Phi(x).
double standard_normal_cdf(double x);

}  // namespace huberdp

#endif  // HUBERDP_RANDOM_HPP_
