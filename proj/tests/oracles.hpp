#pragma once

// Independent oracles for the test suites. Everything here recomputes
// quantities from first principles (closed forms, brute-force enumeration,
// series) without touching the implementation paths under test.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace oracles {

// ---------------------------------------------------------------------------
// Linear-fractional (geometric offspring) closed forms via Mobius iteration.
//
// f(s) = p / (1 - q s) acts as the Mobius map with matrix [[0, p], [-q, 1]].
// Composition is matrix multiplication, so f_n comes from the n-th power.

struct Mobius {
  // (a s + b) / (c s + d)
  double a, b, c, d;

  double apply(double s) const { return (a * s + b) / (c * s + d); }

  Mobius times(const Mobius& o) const {
    return Mobius{a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
  }

  void normalize() {
    const double scale = std::max(std::max(std::fabs(a), std::fabs(b)),
                                  std::max(std::fabs(c), std::fabs(d)));
    if (scale > 0) {
      a /= scale;
      b /= scale;
      c /= scale;
      d /= scale;
    }
  }
};

inline Mobius geometric_mobius(double p) { return Mobius{0.0, p, -(1.0 - p), 1.0}; }

inline Mobius mobius_power(Mobius base, int n) {
  Mobius acc{1.0, 0.0, 0.0, 1.0};
  for (int i = 0; i < n; ++i) {
    acc = base.times(acc);
    acc.normalize();
  }
  return acc;
}

// f_n(s) for geometric(p) offspring.
inline double lf_pgf_iterate(double p, int n, double s) {
  return mobius_power(geometric_mobius(p), n).apply(s);
}

inline double lf_survival(double p, int n) { return 1.0 - lf_pgf_iterate(p, n, 0.0); }

// P(Z_n = k) for geometric(p) offspring: f_n is linear fractional, so Z_n
// restricted to {1,2,...} is geometric with ratio r_n = -c_n/d_n and
// P(Z_n = k) = det_n / d_n^2 * r_n^{k-1}.
inline double lf_zn_pmf(double p, int n, std::uint64_t k) {
  const Mobius m = mobius_power(geometric_mobius(p), n);
  if (k == 0) return m.apply(0.0);
  const double det = m.a * m.d - m.b * m.c;
  const double r = -m.c / m.d;
  return det / (m.d * m.d) * std::pow(r, static_cast<double>(k - 1));
}

// Limit of the conditional geometric ratio: the Yaglom law of a subcritical
// linear-fractional process is geometric on {1,2,...} with this ratio.
inline double lf_yaglom_ratio(double p, int n = 400) {
  const Mobius m = mobius_power(geometric_mobius(p), n);
  return -m.c / m.d;
}

// ---------------------------------------------------------------------------
// Standard normal CDF by series: Phi(x) = 1/2 + phi(x) sum_k x^(2k+1)/(2k+1)!!.
// Independent of erfc; accurate to ~1e-15 for |x| <= 6.

inline double normal_cdf_series(double x) {
  if (x < 0.0) return 1.0 - normal_cdf_series(-x);
  const double phi = std::exp(-0.5 * x * x) / std::sqrt(2.0 * 3.14159265358979323846);
  double term = x;
  double sum = 0.0;
  for (int k = 0; k < 400; ++k) {
    sum += term;
    term *= x * x / (2.0 * k + 3.0);
    if (term < 1e-18 * (1.0 + sum)) break;
  }
  return 0.5 + phi * sum;
}

// ---------------------------------------------------------------------------
// Brute-force functional recomputation from stored draws.

struct BruteDonsker {
  double endpoint, sup, inf, sup_abs;
  std::vector<double> grid;
};

inline BruteDonsker brute_donsker(const std::vector<double>& draws, double m, double sigma,
                                  int grid_n) {
  const std::size_t k = draws.size();
  std::vector<double> prefix(k + 1, 0.0);
  for (std::size_t j = 0; j < k; ++j) prefix[j + 1] = prefix[j] + (draws[j] - m);
  const double scale = 1.0 / (sigma * std::sqrt(static_cast<double>(k)));
  BruteDonsker out;
  out.endpoint = prefix[k] * scale;
  double mx = 0.0, mn = 0.0;
  for (double v : prefix) {
    mx = std::max(mx, v);
    mn = std::min(mn, v);
  }
  out.sup = mx * scale;
  out.inf = mn * scale;
  out.sup_abs = std::max(mx, -mn) * scale;
  out.grid.resize(static_cast<std::size_t>(grid_n) + 1);
  for (int i = 0; i <= grid_n; ++i) {
    const double t = static_cast<double>(i) / grid_n;
    const double tk = t * static_cast<double>(k);
    const std::size_t fl = std::min(k, static_cast<std::size_t>(std::floor(tk)));
    double v = prefix[fl];
    if (fl < k) v += (tk - static_cast<double>(fl)) * (draws[fl] - m);
    out.grid[static_cast<std::size_t>(i)] = v * scale;
  }
  // the implementation pins t=1 to the exact endpoint
  out.grid.back() = out.endpoint;
  return out;
}

inline double brute_darling_erdos_raw_max(const std::vector<double>& draws, double m,
                                          double sigma) {
  double sum = 0.0;
  double best = -1e300;
  for (std::size_t j = 0; j < draws.size(); ++j) {
    sum += draws[j] - m;
    best = std::max(best, sum / std::sqrt(static_cast<double>(j + 1)));
  }
  return best / sigma;
}

inline std::vector<double> brute_extremal_grid(const std::vector<double>& draws,
                                               double normalizer, int grid_n) {
  const std::size_t k = draws.size();
  std::vector<double> run_max(k + 1, 0.0);
  for (std::size_t j = 0; j < k; ++j) run_max[j + 1] = std::max(run_max[j], draws[j]);
  std::vector<double> grid(static_cast<std::size_t>(grid_n) + 1);
  for (int i = 0; i <= grid_n; ++i) {
    const double t = static_cast<double>(i) / grid_n;
    const std::size_t fl = std::min(k, static_cast<std::size_t>(std::floor(t * k)));
    grid[static_cast<std::size_t>(i)] = run_max[fl] / normalizer;
  }
  return grid;
}

// ---------------------------------------------------------------------------
// KS distance by brute force over the merged evaluation grid.

template <typename Cdf>
double brute_ks(std::vector<double> samples, const Cdf& cdf) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double best = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    best = std::max(best, std::fabs((static_cast<double>(i) + 1.0) / n - f));
    best = std::max(best, std::fabs(static_cast<double>(i) / n - f));
  }
  return best;
}

}  // namespace oracles
