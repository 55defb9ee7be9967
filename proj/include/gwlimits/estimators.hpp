#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gwlimits {

// Non-negative generation weights b_1, b_2, ... for the ratio estimator.
// scale multiplies every weight; the estimate itself is scale invariant.
struct WeightScheme {
  enum class Rule { all_ones, geometric, finite_list };

  Rule rule = Rule::all_ones;
  double ratio = 0.5;          // geometric: b_j = ratio^{j-1}
  std::vector<double> values;  // finite-list: b_1..b_d, zero afterwards
  double scale = 1.0;

  static WeightScheme all_ones(double scale = 1.0);
  static WeightScheme geometric(double ratio, double scale = 1.0);
  static WeightScheme finite_list(std::vector<double> values, double scale = 1.0);

  void validate() const;
  // Requires sum b_j/m^j and sum b_j^2/m^j finite at this m (checked per rule).
  void validate_for_mean(double m) const;
  double weight(std::uint64_t j) const;  // b_j, j >= 1
  std::string describe() const;
};

// kappa = sum_j b_j / m^j and the weight fractions theta_k = (b_k/m^k)/kappa.
// The reported table stops once the residual drops below 1e-12; the residual
// is carried explicitly so the table plus residual sums to one.
struct KappaTheta {
  double kappa = 0.0;
  std::vector<double> theta;
  double residual = 0.0;
};

KappaTheta kappa_theta(const WeightScheme& weights, double m);

// Limit variance (sigma^2 / kappa) sum_j b_j^2 / m^j.
double lambda_sq(const WeightScheme& weights, double m, double sigma2);

struct MeanInterval {
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.0;
  double mean_estimate = 0.0;
  double sigma2_estimate = 0.0;
  double lambda_sq_estimate = 0.0;
  double quantile = 0.0;  // t quantile actually applied to Lambda_hat/sqrt(D_n)
};

// Weighted ratio statistic for one trajectory Z_0..Z_n at a supplied
// (true or hypothesized) mean m. X_n = (N_n/D_n - m) sqrt(D_n), zero when
// D_n = 0.
struct RatioEstimate {
  double weighted_numerator = 0.0;    // N_n
  double weighted_denominator = 0.0;  // D_n
  double mean_estimate = 0.0;         // N_n / D_n (0 when D_n = 0)
  double studentized = 0.0;           // X_n
  double reference_mean = 0.0;        // the m the statistic was evaluated at
  KappaTheta kappa_theta;
  double lambda_sq = 0.0;
  std::optional<MeanInterval> interval;
};

RatioEstimate ratio_statistic(std::span<const std::uint64_t> trajectory,
                              const WeightScheme& weights, double m);

// Plug-in confidence interval for m: m_hat +/- z Lambda_hat / sqrt(D_n).
// sigma^2 is estimated by the D_n-weighted average of Z_{n-j} (R_j - m_hat)^2
// over generations with live parents, where R_j = Z_{n-j+1}/Z_{n-j}.
MeanInterval mean_confidence_interval(std::span<const std::uint64_t> trajectory,
                                      const WeightScheme& weights, double level);

}  // namespace gwlimits
