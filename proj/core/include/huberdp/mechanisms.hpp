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

#ifndef HUBERDP_MECHANISMS_HPP_
#define HUBERDP_MECHANISMS_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "huberdp/random.hpp"

namespace huberdp {

// Alpha used for "unit variance" Huber noise. The Huber variance exceeds 1 for
// every finite alpha, so variance 1 cannot be calibrated exactly; alpha = 3
// gives variance 1.0036.
inline constexpr double kUnitVarianceAlpha = 3.0;

// Transition parameter of the Huber loss / Huber distribution.
class HuberParams {
 public:
  explicit HuberParams(double alpha);
  double alpha() const { return alpha_; }

 private:
  double alpha_;
};

enum class MechanismKind { kNone, kHuber, kLaplace, kGaussian };

std::string_view to_string(MechanismKind kind);
// Accepts "none"/"vanilla", "huber", "laplace"/"laplacian", "gaussian".
MechanismKind parse_mechanism_kind(std::string_view name);

// Noise distribution plus its scale parameter: alpha for Huber, beta for
// Laplace, sigma for Gaussian. Kind None carries no scale.
class MechanismConfig {
 public:
  MechanismConfig() = default;

  static MechanismConfig none() { return {}; }
  static MechanismConfig huber(double alpha);
  static MechanismConfig laplace(double beta);
  static MechanismConfig gaussian(double sigma);

  MechanismKind kind() const { return kind_; }
  double scale() const { return scale_; }

  bool operator==(const MechanismConfig&) const = default;

 private:
  MechanismConfig(MechanismKind kind, double scale);

  MechanismKind kind_ = MechanismKind::kNone;
  double scale_ = 0.0;
};

// l1 and l2 sensitivities of the protected query. For the single-coordinate
// neighbouring relation used throughout, l2 <= l1.
class Sensitivity {
 public:
  Sensitivity(double l1, double l2);
  // Delta f_1 = Delta f_2 = delta_f.
  static Sensitivity uniform(double delta_f) { return {delta_f, delta_f}; }

  double l1() const { return l1_; }
  double l2() const { return l2_; }

 private:
  double l1_;
  double l2_;
};

struct PrivacyBudget {
  double epsilon = 0.0;
  double delta = 0.0;

  bool operator==(const PrivacyBudget&) const = default;
};

// The vector t added to a query output.
struct NoiseDraw {
  std::vector<double> values;
  std::uint64_t stream_seed = 0;
  // Raw 64-bit draws consumed from the stream.
  std::uint64_t raw_draws = 0;
};

enum class LogBase { kNatural, kBase10 };

std::string_view to_string(LogBase base);
LogBase parse_log_base(std::string_view name);

// Huber loss rho_alpha(t): t^2/2 inside [-alpha, alpha], alpha(|t| - alpha/2)
// outside.
double huber_loss(double t, double alpha);

// psi_alpha(t) = sign(t) min(|t|, alpha), the derivative of huber_loss.
double huber_influence(double t, double alpha);

// kappa_alpha, the normalizing constant of the Huber density.
double huber_normalizer(double alpha);

double huber_pdf(double t, double alpha);
double huber_cdf(double t, double alpha);

// Probability mass of the Gaussian centre [-alpha, alpha].
double huber_center_mass(double alpha);

// Var[T] for T ~ Huber(alpha), closed form.
double huber_variance(double alpha);

// Returns alpha with |huber_variance(alpha) - target_variance| < 1e-8.
// Throws CalibrationInfeasibleError when target_variance <= 1.
double calibrate_alpha(double target_variance);

struct HuberCalibration {
  double alpha = 0.0;
  // True when the target was infeasible and kUnitVarianceAlpha was used.
  bool used_unit_variance_convention = false;
};

// calibrate_alpha with the alpha = 3 fallback for targets <= 1.
HuberCalibration calibrate_alpha_or_convention(double target_variance);

// Variance of one coordinate of the mechanism's noise (0 for None).
double noise_variance(const MechanismConfig& config);

// Scale parameter giving the requested per-coordinate variance. Gaussian:
// sigma = sqrt(v); Laplace: beta = sqrt(v / 2); Huber: calibrated alpha (with
// the unit-variance convention); None ignores the variance.
MechanismConfig mechanism_for_variance(MechanismKind kind, double variance);

// Fills `out` with i.i.d. draws from the configured distribution.
void sample_into(const MechanismConfig& config, std::span<double> out,
                 RandomStream& rng);

NoiseDraw sample(const MechanismConfig& config, std::size_t k,
                 RandomStream& rng);

// epsilon = alpha * Delta f_1, delta = 0.
PrivacyBudget epsilon_huber(const HuberParams& params, const Sensitivity& sens);
// epsilon = Delta f_1 / beta, delta = 0.
PrivacyBudget epsilon_laplace(double beta, const Sensitivity& sens);
// epsilon = sqrt(2 log(1.25 / delta) / sigma^2) Delta f_2. Natural log is the
// standard bound; kBase10 gives the smaller base-10 variant.
PrivacyBudget epsilon_gaussian(double sigma, double delta,
                               const Sensitivity& sens,
                               LogBase log_base = LogBase::kNatural);

// Budget of one release through `config`. None is not private and reports
// epsilon = +inf.
PrivacyBudget budget_for(const MechanismConfig& config, const Sensitivity& sens,
                         double gaussian_delta, LogBase log_base);

struct BudgetRow {
  double variance = 0.0;
  PrivacyBudget gaussian;
  PrivacyBudget laplace;
  PrivacyBudget huber;
  double huber_alpha = 0.0;
  bool huber_used_unit_variance_convention = false;
};

// Budgets of the three mechanisms at matched noise variance.
std::vector<BudgetRow> budget_table(std::span<const double> variances,
                                    const Sensitivity& sens, double delta,
                                    LogBase log_base);

// g(t) = rho(t + delta_f) - rho(t), the log likelihood ratio of the Huber
// density between two outputs delta_f apart.
double huber_shift_gap(double t, double alpha, double delta_f);

struct PrivacyGapReport {
  double closed_form = 0.0;  // max over the five analytic interval maxima
  double grid_max = 0.0;     // numeric maximum over grid + breakpoints
  double bound = 0.0;        // alpha * delta_f
  bool narrow_shift = false;  // delta_f <= 2 alpha
};

// Computes sup_t g(t) analytically and numerically. Throws ConsistencyError
// if either route deviates from alpha * delta_f by more than 1e-9.
PrivacyGapReport privacy_gap_report(double alpha, double delta_f);

double privacy_gap(double alpha, double delta_f);

}  // namespace huberdp

#endif  // HUBERDP_MECHANISMS_HPP_
