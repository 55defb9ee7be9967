#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "gwlimits/rng.hpp"

namespace gwlimits {

// Exact samplers for the aggregate offspring laws. Each draws from the
// stated distribution exactly (rejection methods included); the number of
// uniforms consumed per draw may vary, which is fine because every
// generation owns a derived stream.

// Gamma(shape >= 1, scale) by the Marsaglia-Tsang squeeze.
inline double sample_gamma(double shape, double scale, RngStream& rng) {
  if (shape < 1.0) throw std::invalid_argument("sample_gamma: shape must be >= 1");
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x;
    double v;
    do {
      x = rng.next_normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.next_unit();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v * scale;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v * scale;
  }
}

// Poisson(mu). Knuth's product method below mu = 10, Hormann's PTRS
// transformed rejection above it.
inline std::uint64_t sample_poisson(double mu, RngStream& rng) {
  if (mu < 0.0) throw std::invalid_argument("sample_poisson: negative mean");
  if (mu == 0.0) return 0;
  if (mu < 10.0) {
    const double limit = std::exp(-mu);
    std::uint64_t k = 0;
    double prod = rng.next_unit();
    while (prod > limit) {
      ++k;
      prod *= rng.next_unit();
    }
    return k;
  }
  const double smu = std::sqrt(mu);
  const double b = 0.931 + 2.53 * smu;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);
  const double log_mu = std::log(mu);
  for (;;) {
    const double u = rng.next_unit() - 0.5;
    const double v = rng.next_unit();
    const double us = 0.5 - std::fabs(u);
    const double kf = std::floor((2.0 * a / us + b) * u + mu + 0.43);
    if (us >= 0.07 && v <= v_r) return static_cast<std::uint64_t>(kf);
    if (kf < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
        kf * log_mu - mu - std::lgamma(kf + 1.0)) {
      return static_cast<std::uint64_t>(kf);
    }
  }
}

// Binomial(n, p) by inversion, walking outward from the mode. Expected
// number of pmf steps is O(sqrt(n p (1-p))).
inline std::uint64_t sample_binomial(std::uint64_t n, double p, RngStream& rng) {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("sample_binomial: p outside [0,1]");
  if (n == 0 || p == 0.0) return 0;
  if (p == 1.0) return n;
  if (n <= 32) {
    std::uint64_t k = 0;
    for (std::uint64_t i = 0; i < n; ++i) {
      if (rng.next_unit() < p) ++k;
    }
    return k;
  }
  const double nd = static_cast<double>(n);
  const double q = 1.0 - p;
  const double mode = std::floor((nd + 1.0) * p);
  const double log_pmf_mode = std::lgamma(nd + 1.0) - std::lgamma(mode + 1.0) -
                              std::lgamma(nd - mode + 1.0) + mode * std::log(p) +
                              (nd - mode) * std::log(q);
  const double ratio_up = p / q;
  double u = rng.next_unit();

  double lo = mode;
  double hi = mode;
  double p_lo = std::exp(log_pmf_mode);
  double p_hi = p_lo;
  u -= p_lo;
  if (u <= 0.0) return static_cast<std::uint64_t>(mode);
  for (;;) {
    const bool can_up = hi < nd;
    const bool can_dn = lo > 0.0;
    if (!can_up && !can_dn) return static_cast<std::uint64_t>(mode);  // fp dust
    double next_up = can_up ? p_hi * ((nd - hi) / (hi + 1.0)) * ratio_up : -1.0;
    double next_dn = can_dn ? p_lo * (lo / (nd - lo + 1.0)) / ratio_up : -1.0;
    if (next_up >= next_dn) {
      hi += 1.0;
      p_hi = next_up;
      u -= p_hi;
      if (u <= 0.0) return static_cast<std::uint64_t>(hi);
    } else {
      lo -= 1.0;
      p_lo = next_dn;
      u -= p_lo;
      if (u <= 0.0) return static_cast<std::uint64_t>(lo);
    }
  }
}

// Negative binomial: failures before the r-th success, success probability p.
// Sum of r iid geometric(p) counts. Gamma-Poisson mixture for large r.
inline std::uint64_t sample_negative_binomial(std::uint64_t r, double p, RngStream& rng) {
  if (p <= 0.0 || p >= 1.0) throw std::invalid_argument("sample_negative_binomial: p outside (0,1)");
  if (r == 0) return 0;
  const double q = 1.0 - p;
  if (r < 16) {
    const double inv_log_q = 1.0 / std::log(q);
    std::uint64_t total = 0;
    for (std::uint64_t i = 0; i < r; ++i) {
      total += static_cast<std::uint64_t>(std::log(rng.next_unit()) * inv_log_q);
    }
    return total;
  }
  const double lambda = sample_gamma(static_cast<double>(r), q / p, rng);
  return sample_poisson(lambda, rng);
}

}  // namespace gwlimits
