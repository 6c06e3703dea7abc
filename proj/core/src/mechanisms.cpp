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

#include "huberdp/mechanisms.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/special_functions/erf.hpp>
#include <fmt/format.h>

#include "huberdp/errors.hpp"

namespace huberdp {
namespace {

constexpr double kSqrtTwoPi = 2.5066282746310002;  // sqrt(2 pi)

void check_alpha(double alpha, const char* who) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw DomainError(fmt::format("{}: alpha must be positive and finite, got {}",
                                  who, alpha));
  }
}

void check_finite(double t, const char* who) {
  if (!std::isfinite(t)) {
    throw DomainError(fmt::format("{}: argument must be finite", who));
  }
}

// 2 Phi(alpha) - 1 written as erf(alpha / sqrt 2), which keeps full relative
// precision for small alpha.
double center_erf(double alpha) { return std::erf(alpha / std::numbers::sqrt2); }

}  // namespace

HuberParams::HuberParams(double alpha) : alpha_(alpha) {
  check_alpha(alpha, "HuberParams");
}

std::string_view to_string(MechanismKind kind) {
  switch (kind) {
    case MechanismKind::kNone:
      return "none";
    case MechanismKind::kHuber:
      return "huber";
    case MechanismKind::kLaplace:
      return "laplace";
    case MechanismKind::kGaussian:
      return "gaussian";
  }
  return "unknown";
}

MechanismKind parse_mechanism_kind(std::string_view name) {
  if (name == "none" || name == "vanilla") return MechanismKind::kNone;
  if (name == "huber") return MechanismKind::kHuber;
  if (name == "laplace" || name == "laplacian") return MechanismKind::kLaplace;
  if (name == "gaussian") return MechanismKind::kGaussian;
  throw ConfigError(fmt::format("unknown mechanism '{}'", name));
}

std::string_view to_string(LogBase base) {
  return base == LogBase::kNatural ? "natural" : "base10";
}

LogBase parse_log_base(std::string_view name) {
  if (name == "natural" || name == "ln") return LogBase::kNatural;
  if (name == "base10" || name == "log10") return LogBase::kBase10;
  throw ConfigError(fmt::format("unknown log base '{}'", name));
}

MechanismConfig::MechanismConfig(MechanismKind kind, double scale)
    : kind_(kind), scale_(scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw ConfigError(fmt::format("{} mechanism: scale must be positive, got {}",
                                  to_string(kind), scale));
  }
}

MechanismConfig MechanismConfig::huber(double alpha) {
  return {MechanismKind::kHuber, alpha};
}
MechanismConfig MechanismConfig::laplace(double beta) {
  return {MechanismKind::kLaplace, beta};
}
MechanismConfig MechanismConfig::gaussian(double sigma) {
  return {MechanismKind::kGaussian, sigma};
}

Sensitivity::Sensitivity(double l1, double l2) : l1_(l1), l2_(l2) {
  if (!(l1 >= 0.0) || !(l2 >= 0.0) || !std::isfinite(l1) ||
      !std::isfinite(l2)) {
    throw DomainError("Sensitivity: l1 and l2 must be finite and nonnegative");
  }
  if (l2 > l1) {
    throw DomainError(
        fmt::format("Sensitivity: l2 ({}) must not exceed l1 ({})", l2, l1));
  }
}

double huber_loss(double t, double alpha) {
  check_alpha(alpha, "huber_loss");
  check_finite(t, "huber_loss");
  const double a = std::abs(t);
  return a <= alpha ? 0.5 * t * t : alpha * (a - 0.5 * alpha);
}

double huber_influence(double t, double alpha) {
  check_alpha(alpha, "huber_influence");
  check_finite(t, "huber_influence");
  return std::clamp(t, -alpha, alpha);
}

double huber_normalizer(double alpha) {
  check_alpha(alpha, "huber_normalizer");
  const double tails = (2.0 / alpha) * std::exp(-0.5 * alpha * alpha);
  return 1.0 / (tails + kSqrtTwoPi * center_erf(alpha));
}

double huber_pdf(double t, double alpha) {
  return huber_normalizer(alpha) * std::exp(-huber_loss(t, alpha));
}

double huber_cdf(double t, double alpha) {
  check_alpha(alpha, "huber_cdf");
  if (std::isnan(t)) throw DomainError("huber_cdf: argument is NaN");
  if (t == -std::numeric_limits<double>::infinity()) return 0.0;
  if (t == std::numeric_limits<double>::infinity()) return 1.0;

  const double kappa = huber_normalizer(alpha);
  const auto lower_tail = [&](double x) {  // x <= -alpha
    return (kappa / alpha) * std::exp(0.5 * alpha * alpha + alpha * x);
  };
  if (t <= -alpha) return lower_tail(t);
  if (t >= alpha) return 1.0 - lower_tail(-t);
  return 0.5 + 0.5 * kappa * kSqrtTwoPi * std::erf(t / std::numbers::sqrt2);
}

double huber_center_mass(double alpha) {
  return huber_normalizer(alpha) * kSqrtTwoPi * center_erf(alpha);
}

double huber_variance(double alpha) {
  check_alpha(alpha, "huber_variance");
  // Centre: int_{-a}^{a} t^2 e^{-t^2/2} = sqrt(2 pi) erf(a / sqrt 2)
  //                                       - 2 a e^{-a^2/2}.
  // Tails: 2 int_a^inf t^2 e^{-a(t - a/2)} = 2 e^{-a^2/2} (a + 2/a + 2/a^3).
  // The 2 a e^{-a^2/2} terms cancel.
  const double a = alpha;
  const double tail = 2.0 * std::exp(-0.5 * a * a) * (2.0 / a + 2.0 / (a * a * a));
  return huber_normalizer(a) * (kSqrtTwoPi * center_erf(a) + tail);
}

double calibrate_alpha(double target_variance) {
  if (!std::isfinite(target_variance) || !(target_variance > 1.0)) {
    throw CalibrationInfeasibleError(fmt::format(
        "calibrate_alpha: Huber noise variance exceeds 1 for every finite "
        "alpha; target {} is not reachable (convention: alpha = {} for unit "
        "variance)",
        target_variance, kUnitVarianceAlpha));
  }
  // huber_variance decreases strictly from +inf (alpha -> 0) to 1
  // (alpha -> inf).
  double lo = 1e-3;
  while (huber_variance(lo) < target_variance) {
    lo *= 0.5;
    if (lo < 1e-300) {
      throw CalibrationInfeasibleError("calibrate_alpha: lower bracket failed");
    }
  }
  double hi = 1.0;
  while (huber_variance(hi) > target_variance) {
    hi *= 2.0;
    if (hi > 1e6) {
      throw CalibrationInfeasibleError("calibrate_alpha: upper bracket failed");
    }
  }
  for (int i = 0; i < 400; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (huber_variance(mid) > target_variance) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double v_lo = huber_variance(lo) - target_variance;
  const double v_hi = target_variance - huber_variance(hi);
  const double alpha = v_lo <= v_hi ? lo : hi;
  const double residual = std::abs(huber_variance(alpha) - target_variance);
  if (residual >= 1e-8) {
    throw ConsistencyError(fmt::format(
        "calibrate_alpha: residual {} at target {} exceeds 1e-8", residual,
        target_variance));
  }
  return alpha;
}

HuberCalibration calibrate_alpha_or_convention(double target_variance) {
  if (!(target_variance > 0.0) || !std::isfinite(target_variance)) {
    throw DomainError(fmt::format(
        "noise variance must be positive and finite, got {}", target_variance));
  }
  if (target_variance <= 1.0) return {kUnitVarianceAlpha, true};
  return {calibrate_alpha(target_variance), false};
}

double noise_variance(const MechanismConfig& config) {
  const double s = config.scale();
  switch (config.kind()) {
    case MechanismKind::kNone:
      return 0.0;
    case MechanismKind::kHuber:
      return huber_variance(s);
    case MechanismKind::kLaplace:
      return 2.0 * s * s;
    case MechanismKind::kGaussian:
      return s * s;
  }
  return 0.0;
}

MechanismConfig mechanism_for_variance(MechanismKind kind, double variance) {
  if (kind == MechanismKind::kNone) return MechanismConfig::none();
  if (!(variance > 0.0) || !std::isfinite(variance)) {
    throw ConfigError(fmt::format(
        "noise variance must be positive and finite, got {}", variance));
  }
  switch (kind) {
    case MechanismKind::kHuber:
      return MechanismConfig::huber(calibrate_alpha_or_convention(variance).alpha);
    case MechanismKind::kLaplace:
      return MechanismConfig::laplace(std::sqrt(0.5 * variance));
    case MechanismKind::kGaussian:
      return MechanismConfig::gaussian(std::sqrt(variance));
    case MechanismKind::kNone:
      break;
  }
  return MechanismConfig::none();
}

void sample_into(const MechanismConfig& config, std::span<double> out,
                 RandomStream& rng) {
  const double s = config.scale();
  switch (config.kind()) {
    case MechanismKind::kNone:
      std::fill(out.begin(), out.end(), 0.0);
      return;
    case MechanismKind::kGaussian:
      for (double& x : out) x = s * rng.standard_normal();
      return;
    case MechanismKind::kLaplace:
      for (double& x : out) {
        const double magnitude = s * rng.exponential(1.0);
        x = rng.uniform() < 0.5 ? -magnitude : magnitude;
      }
      return;
    case MechanismKind::kHuber: {
      // Mixture: Gaussian centre truncated to [-alpha, alpha] with mass
      // p_center, otherwise alpha + Exp(alpha) with a random sign.
      const double alpha = s;
      const double p_center = huber_center_mass(alpha);
      const double center_span = center_erf(alpha);
      for (double& x : out) {
        if (rng.uniform() < p_center) {
          // Phi^{-1} of a uniform on [Phi(-alpha), Phi(alpha)], in erf form.
          const double v = (2.0 * rng.uniform() - 1.0) * center_span;
          x = std::numbers::sqrt2 * boost::math::erf_inv(v);
        } else {
          const double magnitude = alpha + rng.exponential(alpha);
          x = rng.uniform() < 0.5 ? -magnitude : magnitude;
        }
      }
      return;
    }
  }
}

NoiseDraw sample(const MechanismConfig& config, std::size_t k,
                 RandomStream& rng) {
  NoiseDraw draw;
  draw.values.resize(k);
  draw.stream_seed = rng.seed();
  const std::uint64_t before = rng.draws();
  sample_into(config, draw.values, rng);
  draw.raw_draws = rng.draws() - before;
  return draw;
}

PrivacyBudget epsilon_huber(const HuberParams& params, const Sensitivity& sens) {
  return {params.alpha() * sens.l1(), 0.0};
}

PrivacyBudget epsilon_laplace(double beta, const Sensitivity& sens) {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw DomainError(fmt::format("epsilon_laplace: beta must be positive, got {}",
                                  beta));
  }
  return {sens.l1() / beta, 0.0};
}

PrivacyBudget epsilon_gaussian(double sigma, double delta,
                               const Sensitivity& sens, LogBase log_base) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw DomainError(
        fmt::format("epsilon_gaussian: sigma must be positive, got {}", sigma));
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw DomainError(
        fmt::format("epsilon_gaussian: delta must lie in (0, 1), got {}", delta));
  }
  const double log_term = log_base == LogBase::kNatural
                              ? std::log(1.25 / delta)
                              : std::log10(1.25 / delta);
  return {std::sqrt(2.0 * log_term / (sigma * sigma)) * sens.l2(), delta};
}

PrivacyBudget budget_for(const MechanismConfig& config, const Sensitivity& sens,
                         double gaussian_delta, LogBase log_base) {
  switch (config.kind()) {
    case MechanismKind::kNone:
      return {std::numeric_limits<double>::infinity(), 0.0};
    case MechanismKind::kHuber:
      return epsilon_huber(HuberParams(config.scale()), sens);
    case MechanismKind::kLaplace:
      return epsilon_laplace(config.scale(), sens);
    case MechanismKind::kGaussian:
      return epsilon_gaussian(config.scale(), gaussian_delta, sens, log_base);
  }
  return {};
}

std::vector<BudgetRow> budget_table(std::span<const double> variances,
                                    const Sensitivity& sens, double delta,
                                    LogBase log_base) {
  std::vector<BudgetRow> rows;
  rows.reserve(variances.size());
  for (double v : variances) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw DomainError(
          fmt::format("budget_table: variance must be positive, got {}", v));
    }
    BudgetRow row;
    row.variance = v;
    row.gaussian = epsilon_gaussian(std::sqrt(v), delta, sens, log_base);
    row.laplace = epsilon_laplace(std::sqrt(0.5 * v), sens);
    const HuberCalibration cal = calibrate_alpha_or_convention(v);
    row.huber_alpha = cal.alpha;
    row.huber_used_unit_variance_convention = cal.used_unit_variance_convention;
    row.huber = epsilon_huber(HuberParams(cal.alpha), sens);
    rows.push_back(row);
  }
  return rows;
}

double huber_shift_gap(double t, double alpha, double delta_f) {
  return huber_loss(t + delta_f, alpha) - huber_loss(t, alpha);
}

PrivacyGapReport privacy_gap_report(double alpha, double delta_f) {
  check_alpha(alpha, "privacy_gap");
  if (!(delta_f > 0.0) || !std::isfinite(delta_f)) {
    throw DomainError(
        fmt::format("privacy_gap: delta_f must be positive, got {}", delta_f));
  }
  const double a = alpha;
  const double d = delta_f;

  PrivacyGapReport report;
  report.bound = a * d;
  report.narrow_shift = d <= 2.0 * a;

  // Interval maxima of g, scanning t from -inf upward.
  std::array<double, 5> maxima{};
  if (report.narrow_shift) {
    maxima = {
        -a * d,                  // t < -d - a: both arguments in the left tail
        d * (d - 2.0 * a) / 2.0,  // [-d - a, -a], attained at t = -a
        a * d - d * d / 2.0,      // (-a, a - d], attained at t = a - d
        a * d,                    // (a - d, a], attained at t = a
        a * d,                    // t > a: constant plateau
    };
  } else {
    maxima = {
        -a * d,                 // t < -d - a
        a * (2.0 * a - d),      // [-d - a, a - d], attained at t = a - d
        a * d - 2.0 * a * a,    // (a - d, -a], attained at t = -a
        a * d,                  // (-a, a], attained at t = a
        a * d,                  // t > a
    };
  }
  report.closed_form = *std::max_element(maxima.begin(), maxima.end());

  constexpr int kGridPoints = 100000;
  const double lo = -d - 2.0 * a - 1.0;
  const double hi = 2.0 * a + d + 1.0;
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < kGridPoints; ++i) {
    const double t = lo + (hi - lo) * static_cast<double>(i) / (kGridPoints - 1);
    best = std::max(best, huber_shift_gap(t, a, d));
  }
  for (double t : {-d - a, -a, a - d, a, a + 1.0, a + d, 2.0 * a + d}) {
    best = std::max(best, huber_shift_gap(t, a, d));
  }
  report.grid_max = best;

  constexpr double kTolerance = 1e-9;
  if (std::abs(report.closed_form - report.grid_max) > kTolerance ||
      std::abs(report.closed_form - report.bound) > kTolerance) {
    throw ConsistencyError(fmt::format(
        "privacy_gap(alpha={}, delta_f={}): closed form {} and grid maximum {} "
        "disagree with alpha*delta_f = {}",
        a, d, report.closed_form, report.grid_max, report.bound));
  }
  return report;
}

double privacy_gap(double alpha, double delta_f) {
  return privacy_gap_report(alpha, delta_f).closed_form;
}

}  // namespace huberdp
