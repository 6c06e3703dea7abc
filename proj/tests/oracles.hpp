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

// Independent numerical oracles shared by the test suites.

#ifndef HUBERDP_TESTS_ORACLES_HPP_
#define HUBERDP_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace huberdp::oracle {

// Adaptive Gauss-Kronrod integral; a or b may be infinite.
inline double integrate(const std::function<double(double)>& f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 20, 1e-13);
}

// Integral over the real line split at the given breakpoints.
inline double integrate_line(const std::function<double(double)>& f,
                             std::vector<double> breaks) {
  std::sort(breaks.begin(), breaks.end());
  const double inf = std::numeric_limits<double>::infinity();
  double total = integrate(f, -inf, breaks.front());
  for (std::size_t k = 1; k < breaks.size(); ++k) total += integrate(f, breaks[k - 1], breaks[k]);
  return total + integrate(f, breaks.back(), inf);
}

inline double central_difference(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

// Two-sided one-sample Kolmogorov-Smirnov statistic.
inline double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

// Asymptotic 1% critical value of the KS statistic.
inline double ks_critical_1pct(std::size_t n) {
  return 1.6276 / std::sqrt(static_cast<double>(n));
}

inline double sample_variance(const std::vector<double>& x) {
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double s = 0.0;
  for (double v : x) s += (v - mean) * (v - mean);
  return s / static_cast<double>(x.size() - 1);
}

// Brute-force maximum of f over a uniform grid on [a, b].
inline double grid_max(const std::function<double(double)>& f, double a, double b, int points) {
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < points; ++i) {
    best = std::max(best, f(a + (b - a) * static_cast<double>(i) / (points - 1)));
  }
  return best;
}

}  // namespace huberdp::oracle

#endif  // HUBERDP_TESTS_ORACLES_HPP_
