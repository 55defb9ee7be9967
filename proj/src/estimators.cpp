#include "gwlimits/estimators.hpp"

#include <cmath>
#include <stdexcept>

#include "gwlimits/limit_laws.hpp"

namespace gwlimits {

namespace {

constexpr double kThetaTableResidual = 1e-12;
constexpr std::size_t kThetaTableMax = 200000;

// sum_j b_j / m^j and sum_j b_j^2 / m^j, exact per rule.
double weight_series(const WeightScheme& w, double m, bool squared) {
  const double s = squared ? w.scale * w.scale : w.scale;
  switch (w.rule) {
    case WeightScheme::Rule::all_ones:
      return s / (m - 1.0);
    case WeightScheme::Rule::geometric: {
      const double r = squared ? w.ratio * w.ratio : w.ratio;
      return s / (m - r);
    }
    case WeightScheme::Rule::finite_list: {
      double sum = 0.0;
      double mp = 1.0;
      for (double v : w.values) {
        mp *= m;
        sum += (squared ? v * v : v) / mp;
      }
      return s * sum;
    }
  }
  return 0.0;
}

}  // namespace

WeightScheme WeightScheme::all_ones(double scale) {
  WeightScheme w;
  w.rule = Rule::all_ones;
  w.scale = scale;
  w.validate();
  return w;
}

WeightScheme WeightScheme::geometric(double ratio, double scale) {
  WeightScheme w;
  w.rule = Rule::geometric;
  w.ratio = ratio;
  w.scale = scale;
  w.validate();
  return w;
}

WeightScheme WeightScheme::finite_list(std::vector<double> values, double scale) {
  WeightScheme w;
  w.rule = Rule::finite_list;
  w.values = std::move(values);
  w.scale = scale;
  w.validate();
  return w;
}

void WeightScheme::validate() const {
  if (!(scale > 0.0)) throw std::invalid_argument("weights: scale must be positive");
  switch (rule) {
    case Rule::all_ones:
      break;
    case Rule::geometric:
      if (!(ratio > 0.0)) throw std::invalid_argument("weights: geometric ratio must be positive");
      break;
    case Rule::finite_list: {
      bool any = false;
      for (double v : values) {
        if (v < 0.0) throw std::invalid_argument("weights: b_j must be non-negative");
        if (v > 0.0) any = true;
      }
      if (!any) throw std::invalid_argument("weights: some b_j must be positive");
      break;
    }
  }
}

void WeightScheme::validate_for_mean(double m) const {
  validate();
  if (!(m > 1.0)) throw std::invalid_argument("weights: growth series requires m > 1");
  if (rule == Rule::geometric) {
    if (!(ratio < m)) {
      throw std::invalid_argument("weights: geometric ratio must satisfy ratio < m");
    }
    if (!(ratio * ratio < m)) {
      throw std::invalid_argument("weights: geometric ratio must satisfy ratio^2 < m");
    }
  }
}

double WeightScheme::weight(std::uint64_t j) const {
  if (j == 0) throw std::invalid_argument("weights: index starts at 1");
  switch (rule) {
    case Rule::all_ones:
      return scale;
    case Rule::geometric:
      return scale * std::pow(ratio, static_cast<double>(j - 1));
    case Rule::finite_list:
      return j <= values.size() ? scale * values[j - 1] : 0.0;
  }
  return 0.0;
}

std::string WeightScheme::describe() const {
  switch (rule) {
    case Rule::all_ones:
      return "all-ones";
    case Rule::geometric:
      return "geometric(ratio=" + std::to_string(ratio) + ")";
    case Rule::finite_list:
      return "finite-list(" + std::to_string(values.size()) + " weights)";
  }
  return "weights";
}

KappaTheta kappa_theta(const WeightScheme& weights, double m) {
  weights.validate_for_mean(m);
  KappaTheta out;
  out.kappa = weight_series(weights, m, /*squared=*/false);
  if (!(out.kappa > 0.0) || !std::isfinite(out.kappa)) {
    throw std::invalid_argument("kappa_theta: kappa is zero or divergent");
  }
  double mp = 1.0;
  double cum = 0.0;
  for (std::size_t j = 1; j <= kThetaTableMax; ++j) {
    mp *= m;
    const double theta = weights.weight(j) / mp / out.kappa;
    out.theta.push_back(theta);
    cum += theta;
    if (1.0 - cum < kThetaTableResidual) break;
    if (weights.rule == WeightScheme::Rule::finite_list && j >= weights.values.size()) break;
  }
  out.residual = std::max(0.0, 1.0 - cum);
  return out;
}

double lambda_sq(const WeightScheme& weights, double m, double sigma2) {
  weights.validate_for_mean(m);
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
    throw std::invalid_argument("lambda_sq: sigma^2 must lie in (0, infinity)");
  }
  const double kappa = weight_series(weights, m, /*squared=*/false);
  const double sq = weight_series(weights, m, /*squared=*/true);
  if (!std::isfinite(sq) || !(sq > 0.0)) {
    throw std::invalid_argument("lambda_sq: sum b_j^2/m^j is divergent");
  }
  return sigma2 / kappa * sq;
}

RatioEstimate ratio_statistic(std::span<const std::uint64_t> trajectory,
                              const WeightScheme& weights, double m) {
  weights.validate();
  if (trajectory.size() < 2) {
    throw std::invalid_argument("ratio_statistic: trajectory needs Z_0 and at least one generation");
  }
  const std::size_t n = trajectory.size() - 1;
  RatioEstimate out;
  out.reference_mean = m;
  double numer = 0.0;
  double denom = 0.0;
  for (std::size_t j = 1; j <= n; ++j) {
    const double b = weights.weight(j);
    if (b == 0.0) continue;
    numer += b * static_cast<double>(trajectory[n - j + 1]);
    denom += b * static_cast<double>(trajectory[n - j]);
  }
  out.weighted_numerator = numer;
  out.weighted_denominator = denom;
  if (denom > 0.0) {
    out.mean_estimate = numer / denom;
    out.studentized = (numer / denom - m) * std::sqrt(denom);
  } else {
    out.mean_estimate = 0.0;
    out.studentized = 0.0;  // X_n is zero by definition when D_n = 0
  }
  if (m > 1.0) {
    bool series_ok = true;
    if (weights.rule == WeightScheme::Rule::geometric &&
        (weights.ratio >= m || weights.ratio * weights.ratio >= m)) {
      series_ok = false;
    }
    if (series_ok) {
      out.kappa_theta = kappa_theta(weights, m);
    }
  }
  return out;
}

MeanInterval mean_confidence_interval(std::span<const std::uint64_t> trajectory,
                                      const WeightScheme& weights, double level) {
  weights.validate();
  if (!(level > 0.0 && level < 1.0)) {
    throw std::invalid_argument("mean_confidence_interval: level outside (0,1)");
  }
  const RatioEstimate base = ratio_statistic(trajectory, weights, 1.0);
  const double d_n = base.weighted_denominator;
  if (!(d_n > 0.0)) {
    throw std::invalid_argument("mean_confidence_interval: D_n = 0, no interval available");
  }
  const double m_hat = base.mean_estimate;
  if (!(m_hat > 1.0)) {
    throw std::invalid_argument(
        "mean_confidence_interval: estimated mean not above 1; plug-in variance undefined");
  }

  // Offspring-variance plug-in: every live generation contributes the
  // studentized squared residual (Z_{n-j+1} - m_hat Z_{n-j})^2 / Z_{n-j},
  // whose conditional expectation is sigma^2. Equal weighting keeps the
  // effective degrees of freedom near the horizon; a D_n-weighted average
  // would concentrate on the last ~m/(m-1) generations and undercover. One
  // degree of freedom is spent on m_hat.
  const std::size_t n = trajectory.size() - 1;
  double sigma2_hat = 0.0;
  std::size_t live = 0;
  for (std::size_t j = 1; j <= n; ++j) {
    const double parent = static_cast<double>(trajectory[n - j]);
    if (parent == 0.0) continue;
    const double resid = static_cast<double>(trajectory[n - j + 1]) - m_hat * parent;
    sigma2_hat += resid * resid / parent;
    ++live;
  }
  if (live < 2) {
    throw std::invalid_argument("mean_confidence_interval: need at least two live generations");
  }
  sigma2_hat /= static_cast<double>(live - 1);
  if (!(sigma2_hat > 0.0)) {
    throw std::invalid_argument("mean_confidence_interval: zero residual variance");
  }
  if (weights.rule == WeightScheme::Rule::geometric &&
      (weights.ratio >= m_hat || weights.ratio * weights.ratio >= m_hat)) {
    throw std::invalid_argument(
        "mean_confidence_interval: weight series diverges at the estimated mean");
  }

  const double lambda_hat_sq = lambda_sq(weights, m_hat, sigma2_hat);
  // Student-t quantile via Cornish-Fisher around the normal quantile; the
  // variance plug-in has live-1 degrees of freedom, and the z quantile alone
  // measurably undercovers at desk horizons.
  const double z = std_normal_quantile(0.5 * (1.0 + level));
  const double nu = static_cast<double>(live - 1);
  const double t = z + (z * z * z + z) / (4.0 * nu) +
                   (5.0 * std::pow(z, 5.0) + 16.0 * z * z * z + 3.0 * z) / (96.0 * nu * nu);
  const double half_width = t * std::sqrt(lambda_hat_sq / d_n);
  MeanInterval out;
  out.level = level;
  out.quantile = t;
  out.mean_estimate = m_hat;
  out.sigma2_estimate = sigma2_hat;
  out.lambda_sq_estimate = lambda_hat_sq;
  out.lower = m_hat - half_width;
  out.upper = m_hat + half_width;
  return out;
}

}  // namespace gwlimits
