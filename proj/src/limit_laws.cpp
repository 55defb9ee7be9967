#include "gwlimits/limit_laws.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "gwlimits/rng.hpp"

namespace gwlimits {

namespace {

constexpr double kSqrt2 = 1.4142135623730950488;

// log Phi(x) without cancellation for either sign.
double log_std_normal_cdf(double x) { return std::log1p(-0.5 * std::erfc(x / kSqrt2)); }

// log(2 Phi(x) - 1) = log(erf(x / sqrt 2)) for x >= 0.
double log_two_phi_minus_one(double x) { return std::log1p(-std::erfc(x / kSqrt2)); }

}  // namespace

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

double std_normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("std_normal_quantile: p outside (0,1)");
  // Acklam's rational approximation, then two Newton corrections against the
  // erfc-based cdf to push the error to machine level.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;
  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  for (int it = 0; it < 2; ++it) {
    const double err = std_normal_cdf(x) - p;
    const double pdf = std::exp(-0.5 * x * x) * 0.3989422804014326779399461;
    if (pdf <= 0.0) break;
    x -= err / pdf;
  }
  return x;
}

double gumbel_cdf(double x) { return std::exp(-std::exp(-x)); }

double frechet_cdf(double x, double alpha) {
  if (!(alpha > 1.0)) throw std::invalid_argument("frechet_cdf: alpha must exceed 1");
  if (x <= 0.0) return 0.0;
  return std::exp(-std::pow(x, -alpha));
}

double brownian_sup_cdf(double x) {
  if (x < 0.0) return 0.0;
  return 2.0 * std_normal_cdf(x) - 1.0;
}

// ---------------------------------------------------------------------------
// Weighted-sup product law
//
// P(sup_j lambda_j |G_j| <= x) = prod_j (2 Phi(x/lambda_j) - 1). Factors with
// x/lambda_j beyond ~39 are 1 to machine precision, so the evaluated product
// is short; the certificate below bounds what the truncation can still hide.

namespace {

// Smallest J with sum_{j>J} exp(-x^2 / (2 lambda_j^2)) provably below tol,
// using P(|G| > y) <= exp(-y^2/2). Terms are summed directly; they decrease,
// and the final step checks a geometric domination to certify the infinite
// remainder. Throws when no certificate is found within the index budget.
std::size_t certify_truncation(const LambdaSeq& lambda, double x, double tol) {
  constexpr std::size_t kBudget = 50'000'000;
  double bound_prev = 0.0;
  for (std::size_t j = 1; j <= kBudget; ++j) {
    const double lj = lambda.value(j);
    const double y = x / lj;
    const double bound = std::exp(-0.5 * y * y);
    if (j > 1 && bound > bound_prev) {
      throw std::runtime_error("weighted_sup_cdf: lambda sequence is not decreasing");
    }
    bound_prev = bound;
    if (bound < 0.5) {
      // Ratio of consecutive bounds keeps shrinking for both built-in kinds
      // (lambda_j^{-2} has increasing gaps in j once log terms stabilize), so
      // the remainder is dominated by a geometric series with this ratio.
      const double lj1 = lambda.value(j + 1);
      const double y1 = x / lj1;
      const double next_bound = std::exp(-0.5 * y1 * y1);
      if (next_bound <= 0.0) return j;  // underflow: the remainder vanishes
      const double ratio = next_bound / bound;
      if (ratio < 1.0) {
        const double remainder = next_bound / (1.0 - ratio);
        if (remainder < tol) return j;
      }
    }
  }
  throw std::runtime_error("weighted_sup_cdf: no truncation certificate within budget");
}

}  // namespace

WeightedSupValue weighted_sup_cdf(const LambdaSeq& lambda, double x, bool absolute,
                                  double tol) {
  lambda.validate();
  if (!(tol > 0.0)) throw std::invalid_argument("weighted_sup_cdf: tol must be positive");
  WeightedSupValue out;
  if (x <= 0.0) {
    // One-sided: infinitely many factors Phi(x/lambda_j) <= 1/2. Absolute:
    // every factor is zero.
    out.value = 0.0;
    out.truncation_index = 0;
    return out;
  }
  out.truncation_index = certify_truncation(lambda, x, tol);
  double log_sum = 0.0;
  for (std::size_t j = 1; j <= out.truncation_index; ++j) {
    const double y = x / lambda.value(j);
    if (y > 40.0) break;  // remaining factors are 1 at machine precision
    log_sum += absolute ? log_two_phi_minus_one(y) : log_std_normal_cdf(y);
  }
  out.value = std::exp(log_sum);
  return out;
}

std::vector<double> weighted_sup_samples(const LambdaSeq& lambda, double min_x, bool absolute,
                                         double tol, std::size_t n, std::uint64_t seed) {
  lambda.validate();
  const std::size_t trunc = certify_truncation(lambda, min_x, tol);
  std::vector<double> lambdas(trunc);
  for (std::size_t j = 0; j < trunc; ++j) lambdas[j] = lambda.value(j + 1);
  std::vector<double> out(n);
  RngStream base(seed);
  for (std::size_t i = 0; i < n; ++i) {
    RngStream stream = base.derived(i);
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < trunc; ++j) {
      const double g = stream.next_normal();
      const double v = lambdas[j] * (absolute ? std::fabs(g) : g);
      if (v > best) best = v;
    }
    out[i] = best;
  }
  return out;
}

// ---------------------------------------------------------------------------
// W mixture

WMixtureValue w_mixture_joint(std::span<const double> thresholds,
                              std::span<const WSample> samples) {
  if (samples.empty()) throw std::invalid_argument("w_mixture_joint: empty sample set");
  double sum = 0.0;
  double sum_sq = 0.0;
  for (const WSample& s : samples) {
    double term = 0.0;
    if (s.survived) {
      term = 1.0;
      const double root = std::sqrt(std::max(s.w, 0.0));
      for (double t : thresholds) term *= std_normal_cdf(t * root);
    }
    sum += term;
    sum_sq += term * term;
  }
  const double n = static_cast<double>(samples.size());
  WMixtureValue out;
  out.samples = samples.size();
  out.value = sum / n;
  const double var = std::max(0.0, sum_sq / n - out.value * out.value);
  out.std_error = std::sqrt(var / n);
  return out;
}

// ---------------------------------------------------------------------------
// Subcritical mixture

SubcriticalMixture::SubcriticalMixture(const OffspringSpec& spec, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("SubcriticalMixture: tol must be positive");
  const MomentSummary mom = moments(spec);
  if (mom.criticality != Criticality::subcritical || !mom.variance.has_value()) {
    throw std::invalid_argument("SubcriticalMixture: requires a subcritical spec with finite variance");
  }
  mean_ = mom.mean;

  const PmfVector yaglom = yaglom_pmf(spec, std::min(tol * 0.25, 1e-6));
  // Keep theta terms until the dropped mass is below tol/2.
  double kept = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < yaglom.probs.size(); ++i) {
    kept += yaglom.probs[i];
    count = i + 1;
    if (1.0 - kept < 0.5 * tol) break;
  }
  theta_.assign(yaglom.probs.begin(), yaglom.probs.begin() + count);
  theta_mass_ = kept;
  theta_residual_ = std::max(0.0, 1.0 - kept);

  // Exact S_k distributions by iterated convolution; per-k truncation keeps
  // the lost mass below tol/4 overall.
  const double inner_tol = 0.25 * tol;
  const std::size_t k_max = theta_.size();
  // Offspring support long enough that a k_max-fold sum rarely truncates.
  std::size_t xi_len = 2;
  while (offspring_tail(spec, static_cast<std::int64_t>(xi_len)) >
         inner_tol / (8.0 * static_cast<double>(k_max) * static_cast<double>(k_max))) {
    ++xi_len;
  }
  std::vector<double> xi(xi_len + 1);
  for (std::size_t i = 0; i <= xi_len; ++i) xi[i] = offspring_pmf(spec, i);

  sum_cdf_.reserve(k_max);
  std::vector<double> conv{1.0};
  for (std::size_t k = 1; k <= k_max; ++k) {
    std::vector<double> next(conv.size() + xi_len, 0.0);
    for (std::size_t i = 0; i < conv.size(); ++i) {
      const double c = conv[i];
      if (c == 0.0) continue;
      for (std::size_t l = 0; l <= xi_len; ++l) next[i + l] += c * xi[l];
    }
    conv.swap(next);
    std::vector<double> cdf(conv.size());
    double cum = 0.0;
    for (std::size_t i = 0; i < conv.size(); ++i) {
      cum += conv[i];
      cdf[i] = cum;
    }
    sum_cdf_.push_back(std::move(cdf));
  }
}

double SubcriticalMixture::cdf(double x) const {
  double total = 0.0;
  for (std::size_t k = 1; k <= theta_.size(); ++k) {
    const double kd = static_cast<double>(k);
    const double threshold = mean_ * kd + x * std::sqrt(kd);
    // S_k is lattice; the 1e-9 guard keeps atoms that land exactly on the
    // threshold inside the event.
    const double flo = std::floor(threshold + 1e-9);
    if (flo < 0.0) continue;
    const auto& cdf = sum_cdf_[k - 1];
    const std::size_t idx = std::min(cdf.size() - 1, static_cast<std::size_t>(flo));
    total += theta_[k - 1] * cdf[idx];
  }
  return total;
}

double subcritical_mixture_cdf(const OffspringSpec& spec, double x, double tol) {
  return SubcriticalMixture(spec, tol).cdf(x);
}

// ---------------------------------------------------------------------------
// ReferenceCdf factories

ReferenceCdf ReferenceCdf::std_normal() {
  return ReferenceCdf("std-normal", [](double x) { return std_normal_cdf(x); });
}

ReferenceCdf ReferenceCdf::normal_scale(double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("ReferenceCdf: sigma must be positive");
  return ReferenceCdf("normal(sd=" + std::to_string(sigma) + ")",
                      [sigma](double x) { return std_normal_cdf(x / sigma); });
}

ReferenceCdf ReferenceCdf::gumbel() {
  return ReferenceCdf("gumbel", [](double x) { return gumbel_cdf(x); });
}

ReferenceCdf ReferenceCdf::frechet(double alpha) {
  return ReferenceCdf("frechet(alpha=" + std::to_string(alpha) + ")",
                      [alpha](double x) { return frechet_cdf(x, alpha); });
}

ReferenceCdf ReferenceCdf::brownian_sup() {
  return ReferenceCdf("brownian-sup", [](double x) { return brownian_sup_cdf(x); });
}

ReferenceCdf ReferenceCdf::weighted_sup(const LambdaSeq& lambda, bool absolute, double tol) {
  lambda.validate();
  const std::string id = std::string("weighted-sup(") + (absolute ? "abs," : "one-sided,") +
                         lambda.describe() + ")";
  return ReferenceCdf(id, [lambda, absolute, tol](double x) {
    return weighted_sup_cdf(lambda, x, absolute, tol).value;
  });
}

ReferenceCdf ReferenceCdf::subcritical_mixture(const OffspringSpec& spec, double tol) {
  auto mixture = std::make_shared<SubcriticalMixture>(spec, tol);
  return ReferenceCdf("subcritical-mixture(" + spec.describe() + ")",
                      [mixture](double x) { return mixture->cdf(x); });
}

ReferenceCdf ReferenceCdf::discrete(PmfVector pmf) {
  auto shared = std::make_shared<PmfVector>(std::move(pmf));
  const auto cum_through = [shared](std::int64_t top) {
    double cum = 0.0;
    for (std::size_t i = 0; i < shared->probs.size(); ++i) {
      const std::int64_t k = shared->offset + static_cast<std::int64_t>(i);
      if (k > top) break;
      cum += shared->probs[i];
    }
    return cum;
  };
  return ReferenceCdf(
      "discrete-pmf",
      [cum_through](double x) {
        return cum_through(static_cast<std::int64_t>(std::floor(x + 1e-9)));
      },
      [cum_through](double x) {
        // mass strictly below x: drop the atom when x sits on one
        const double flo = std::floor(x + 1e-9);
        const bool on_atom = std::fabs(x - flo) <= 1e-9;
        return cum_through(static_cast<std::int64_t>(flo) - (on_atom ? 1 : 0));
      });
}

}  // namespace gwlimits
