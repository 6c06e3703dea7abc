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

#include "huberdp/random.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/special_functions/erf.hpp>

#include "huberdp/errors.hpp"

namespace huberdp {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master,
                          std::initializer_list<std::uint64_t> coordinates) {
  std::uint64_t h = splitmix64(master);
  for (std::uint64_t c : coordinates) {
    h = splitmix64(h ^ splitmix64(c + 0x632be59bd9b4e019ULL));
  }
  return h;
}

RandomStream::RandomStream(std::uint64_t seed,
                           std::atomic<std::uint64_t>* shared_counter)
    : engine_(seed), seed_(seed), shared_counter_(shared_counter) {}

std::uint64_t RandomStream::next_u64() {
  ++draws_;
  if (shared_counter_ != nullptr) {
    shared_counter_->fetch_add(1, std::memory_order_relaxed);
  }
  return engine_();
}

double RandomStream::uniform() {
  // 53 random mantissa bits, centred in their cell so 0 and 1 never occur.
  constexpr double kScale = 1.0 / 9007199254740992.0;  // 2^-53
  return (static_cast<double>(next_u64() >> 11) + 0.5) * kScale;
}

double RandomStream::standard_normal() {
  return standard_normal_quantile(uniform());
}

double RandomStream::exponential(double rate) {
  return -std::log(uniform()) / rate;
}

std::uint64_t RandomStream::uniform_index(std::uint64_t n) {
  if (n == 0) throw DomainError("uniform_index: empty range");
  // Rejection on the largest multiple of n below 2^64.
  const std::uint64_t limit = -n % n;  // 2^64 mod n
  for (;;) {
    const std::uint64_t x = next_u64();
    if (x >= limit) return x % n;
  }
}

double standard_normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("standard_normal_quantile: p must lie in (0, 1)");
  }
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

double standard_normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

}  // namespace huberdp
