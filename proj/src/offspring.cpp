#include "gwlimits/offspring.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "gwlimits/samplers.hpp"

namespace gwlimits {

namespace {

constexpr double kTableTolerance = 1e-12;
constexpr double kMassSkipThreshold = 1e-280;

double pow_int_neg(double base, double exponent) { return std::pow(base, -exponent); }

}  // namespace

// ---------------------------------------------------------------------------
// OffspringSpec

OffspringSpec OffspringSpec::binary_split(double a) {
  OffspringSpec s;
  s.family = OffspringFamily::binary_split;
  s.split_prob = a;
  s.validate();
  return s;
}

OffspringSpec OffspringSpec::geometric(double p) {
  OffspringSpec s;
  s.family = OffspringFamily::geometric;
  s.success_prob = p;
  s.validate();
  return s;
}

OffspringSpec OffspringSpec::poisson(double lambda) {
  OffspringSpec s;
  s.family = OffspringFamily::poisson;
  s.poisson_mean = lambda;
  s.validate();
  return s;
}

OffspringSpec OffspringSpec::discrete_pareto(double alpha, std::uint64_t x_min) {
  OffspringSpec s;
  s.family = OffspringFamily::discrete_pareto;
  s.pareto_alpha = alpha;
  s.pareto_x_min = x_min;
  s.validate();
  return s;
}

OffspringSpec OffspringSpec::explicit_table(std::vector<double> probs) {
  OffspringSpec s;
  s.family = OffspringFamily::explicit_table;
  s.table = std::move(probs);
  s.validate();
  return s;
}

void OffspringSpec::validate() const {
  switch (family) {
    case OffspringFamily::binary_split:
      if (!(split_prob > 0.0 && split_prob <= 1.0)) {
        throw std::invalid_argument("binary-split: a must lie in (0,1]");
      }
      break;
    case OffspringFamily::geometric:
      if (!(success_prob > 0.0 && success_prob < 1.0)) {
        throw std::invalid_argument("geometric: p must lie in (0,1)");
      }
      // p_0 + p_1 = p + pq < 1 automatically for p in (0,1).
      break;
    case OffspringFamily::poisson:
      if (!(poisson_mean > 0.0)) throw std::invalid_argument("poisson: mean must be positive");
      break;
    case OffspringFamily::discrete_pareto:
      if (!(pareto_alpha > 1.0)) {
        throw std::invalid_argument("discrete-pareto: alpha must exceed 1 for a finite mean");
      }
      if (pareto_x_min < 1) throw std::invalid_argument("discrete-pareto: x_min must be >= 1");
      break;
    case OffspringFamily::explicit_table: {
      if (table.size() < 2) throw std::invalid_argument("explicit-table: need at least p_0, p_1");
      double sum = 0.0;
      for (double p : table) {
        if (p < 0.0) throw std::invalid_argument("explicit-table: negative probability");
        sum += p;
      }
      if (std::fabs(sum - 1.0) > kTableTolerance) {
        throw std::invalid_argument("explicit-table: probabilities must sum to 1 within 1e-12");
      }
      const double p1 = table.size() > 1 ? table[1] : 0.0;
      if (table[0] + p1 >= 1.0 - kTableTolerance) {
        throw std::invalid_argument("offspring law must satisfy p_0 + p_1 < 1");
      }
      break;
    }
  }
}

bool OffspringSpec::bounded_support() const {
  return family == OffspringFamily::binary_split || family == OffspringFamily::explicit_table;
}

std::string OffspringSpec::describe() const {
  switch (family) {
    case OffspringFamily::binary_split:
      return "binary-split(a=" + std::to_string(split_prob) + ")";
    case OffspringFamily::geometric:
      return "geometric(p=" + std::to_string(success_prob) + ")";
    case OffspringFamily::poisson:
      return "poisson(lambda=" + std::to_string(poisson_mean) + ")";
    case OffspringFamily::discrete_pareto:
      return "discrete-pareto(alpha=" + std::to_string(pareto_alpha) +
             ",x_min=" + std::to_string(pareto_x_min) + ")";
    case OffspringFamily::explicit_table:
      return "explicit-table(" + std::to_string(table.size()) + " entries)";
  }
  return "offspring";
}

// ---------------------------------------------------------------------------
// PmfVector

double PmfVector::at(std::int64_t k) const {
  const std::int64_t idx = k - offset;
  if (idx < 0 || idx >= static_cast<std::int64_t>(probs.size())) return 0.0;
  return probs[static_cast<std::size_t>(idx)];
}

double PmfVector::mass_sum() const {
  double s = 0.0;
  for (double p : probs) s += p;
  return s;
}

std::int64_t PmfVector::support_max() const {
  for (std::size_t i = probs.size(); i-- > 0;) {
    if (probs[i] > 0.0) return offset + static_cast<std::int64_t>(i);
  }
  return offset - 1;
}

// ---------------------------------------------------------------------------
// Hurwitz zeta (Euler-Maclaurin)

double hurwitz_zeta(double s, double a) {
  if (!(s > 1.0) || !(a > 0.0)) throw std::invalid_argument("hurwitz_zeta: need s > 1, a > 0");
  constexpr int kDirectTerms = 24;
  double sum = 0.0;
  for (int k = 0; k < kDirectTerms; ++k) sum += pow_int_neg(a + k, s);
  const double an = a + kDirectTerms;
  sum += std::pow(an, 1.0 - s) / (s - 1.0);
  sum += 0.5 * pow_int_neg(an, s);
  // B_{2j}/(2j)! for j = 1..6.
  static const double kBern[6] = {1.0 / 12.0,        -1.0 / 720.0,       1.0 / 30240.0,
                                  -1.0 / 1209600.0,  1.0 / 47900160.0,   -691.0 / 1307674368000.0};
  double rising = s;                 // s (s+1) ... (s + 2j - 2)
  double power = pow_int_neg(an, s + 1.0);
  for (int j = 0; j < 6; ++j) {
    sum += kBern[j] * rising * power;
    rising *= (s + 2.0 * j + 1.0) * (s + 2.0 * j + 2.0);
    power /= an * an;
  }
  return sum;
}

// ---------------------------------------------------------------------------
// Moments, pmf, tails

MomentSummary moments(const OffspringSpec& spec) {
  spec.validate();
  MomentSummary out;
  switch (spec.family) {
    case OffspringFamily::binary_split: {
      const double a = spec.split_prob;
      out.mean = 2.0 * a;
      out.variance = 4.0 * a * (1.0 - a);
      break;
    }
    case OffspringFamily::geometric: {
      const double p = spec.success_prob;
      const double q = 1.0 - p;
      out.mean = q / p;
      out.variance = q / (p * p);
      break;
    }
    case OffspringFamily::poisson:
      out.mean = spec.poisson_mean;
      out.variance = spec.poisson_mean;
      break;
    case OffspringFamily::discrete_pareto: {
      const double alpha = spec.pareto_alpha;
      const double x0 = static_cast<double>(spec.pareto_x_min);
      const double norm = hurwitz_zeta(alpha + 1.0, x0);
      out.mean = hurwitz_zeta(alpha, x0) / norm;
      if (alpha > 2.0) {
        const double second = hurwitz_zeta(alpha - 1.0, x0) / norm;
        out.variance = second - out.mean * out.mean;
      }
      out.tail_exponent = alpha;
      break;
    }
    case OffspringFamily::explicit_table: {
      double m = 0.0;
      double m2 = 0.0;
      for (std::size_t k = 0; k < spec.table.size(); ++k) {
        m += static_cast<double>(k) * spec.table[k];
        m2 += static_cast<double>(k) * static_cast<double>(k) * spec.table[k];
      }
      out.mean = m;
      out.variance = m2 - m * m;
      break;
    }
  }
  constexpr double kCriticalTol = 1e-12;
  if (out.mean > 1.0 + kCriticalTol) {
    out.criticality = Criticality::supercritical;
  } else if (out.mean < 1.0 - kCriticalTol) {
    out.criticality = Criticality::subcritical;
  } else {
    out.criticality = Criticality::critical;
  }
  return out;
}

double offspring_pmf(const OffspringSpec& spec, std::uint64_t k) {
  switch (spec.family) {
    case OffspringFamily::binary_split:
      if (k == 0) return 1.0 - spec.split_prob;
      if (k == 2) return spec.split_prob;
      return 0.0;
    case OffspringFamily::geometric: {
      const double p = spec.success_prob;
      return p * std::exp(static_cast<double>(k) * std::log1p(-p));
    }
    case OffspringFamily::poisson: {
      const double lam = spec.poisson_mean;
      const double kd = static_cast<double>(k);
      return std::exp(kd * std::log(lam) - lam - std::lgamma(kd + 1.0));
    }
    case OffspringFamily::discrete_pareto: {
      if (k < spec.pareto_x_min) return 0.0;
      const double norm = hurwitz_zeta(spec.pareto_alpha + 1.0,
                                       static_cast<double>(spec.pareto_x_min));
      return pow_int_neg(static_cast<double>(k), spec.pareto_alpha + 1.0) / norm;
    }
    case OffspringFamily::explicit_table:
      return k < spec.table.size() ? spec.table[k] : 0.0;
  }
  return 0.0;
}

double offspring_tail(const OffspringSpec& spec, std::int64_t k) {
  if (k < 0) return 1.0;
  const std::uint64_t ku = static_cast<std::uint64_t>(k);
  switch (spec.family) {
    case OffspringFamily::binary_split:
      return ku >= 2 ? 0.0 : spec.split_prob;
    case OffspringFamily::geometric:
      return std::exp(static_cast<double>(ku + 1) * std::log1p(-spec.success_prob));
    case OffspringFamily::poisson: {
      // Sum the pmf upward from k+1; terms decay once past the mean.
      double term = offspring_pmf(spec, ku + 1);
      double sum = 0.0;
      double j = static_cast<double>(ku + 1);
      while (term > 0.0) {
        sum += term;
        j += 1.0;
        term *= spec.poisson_mean / j;
        if (term < sum * 1e-18 && j > spec.poisson_mean) break;
      }
      return sum;
    }
    case OffspringFamily::discrete_pareto: {
      const double x0 = static_cast<double>(spec.pareto_x_min);
      if (ku + 1 <= spec.pareto_x_min) return 1.0;
      const double norm = hurwitz_zeta(spec.pareto_alpha + 1.0, x0);
      return hurwitz_zeta(spec.pareto_alpha + 1.0, static_cast<double>(ku + 1)) / norm;
    }
    case OffspringFamily::explicit_table: {
      double sum = 0.0;
      for (std::size_t i = spec.table.size(); i-- > ku + 1;) sum += spec.table[i];
      return ku + 1 >= spec.table.size() ? 0.0 : sum;
    }
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// Generating functions

double pgf(const OffspringSpec& spec, double s) {
  if (s < 0.0 || s > 1.0) throw std::invalid_argument("pgf: s must lie in [0,1]");
  switch (spec.family) {
    case OffspringFamily::binary_split:
      return 1.0 - spec.split_prob + spec.split_prob * s * s;
    case OffspringFamily::geometric:
      return spec.success_prob / (1.0 - (1.0 - spec.success_prob) * s);
    case OffspringFamily::poisson:
      return std::exp(spec.poisson_mean * (s - 1.0));
    case OffspringFamily::explicit_table: {
      double acc = 0.0;
      for (std::size_t i = spec.table.size(); i-- > 0;) acc = acc * s + spec.table[i];
      return acc;
    }
    case OffspringFamily::discrete_pareto: {
      if (s == 0.0) return 0.0;
      if (s == 1.0) return 1.0;
      const double alpha = spec.pareto_alpha;
      const double x0 = static_cast<double>(spec.pareto_x_min);
      const double norm = hurwitz_zeta(alpha + 1.0, x0);
      double k = x0;
      double pk = pow_int_neg(k, alpha + 1.0) / norm;
      double sk = std::pow(s, k);
      double sum = 0.0;
      constexpr std::size_t kMaxTerms = 5'000'000;
      for (std::size_t it = 0; it < kMaxTerms; ++it) {
        sum += pk * sk;
        const double tail_bound = std::min(pk * sk * s / (1.0 - s),
                                           sk * s * pow_int_neg(k, alpha) / (alpha * norm));
        if (tail_bound < 1e-17) break;
        k += 1.0;
        pk *= std::pow((k - 1.0) / k, alpha + 1.0);
        sk *= s;
      }
      return sum;
    }
  }
  return 0.0;
}

double pgf_compose(const OffspringSpec& spec, int generations, double s) {
  if (generations < 0) throw std::invalid_argument("pgf_compose: negative generation count");
  double value = s;
  for (int i = 0; i < generations; ++i) {
    // pgf values live in [0,1]; clamp out boundary rounding before reuse
    value = std::min(1.0, std::max(0.0, pgf(spec, value)));
  }
  return value;
}

double survival_prob(const OffspringSpec& spec, int generations) {
  return 1.0 - pgf_compose(spec, generations, 0.0);
}

double extinction_prob(const OffspringSpec& spec) {
  spec.validate();
  if (offspring_pmf(spec, 0) == 0.0) return 0.0;
  if (moments(spec).mean <= 1.0 + 1e-12) return 1.0;
  // Smallest root of f(s) = s. f is convex with f(0) = p_0 > 0, so
  // {f(s) <= s} is exactly [q, 1]; bisect on that predicate.
  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (pgf(spec, mid) <= mid) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

// ---------------------------------------------------------------------------
// Exact law of Z_n by truncated forward evolution.
//
// One generation maps a population law d to sum_j d[j] * (offspring)^{*j}.
// Convolution powers are accumulated incrementally; every unit of mass that
// would land beyond the cap (or rides on a parent count beyond the cap) is
// added to tail_mass instead of being dropped.

namespace {

struct XiKernel {
  std::vector<double> pmf;     // exact offspring pmf on 0..cap
  std::vector<double> suffix;  // suffix[i] = P(xi > i), exact at the cap boundary
  std::size_t len = 0;         // one past the last strictly positive entry
};

XiKernel build_kernel(const OffspringSpec& spec, std::size_t cap) {
  XiKernel k;
  k.pmf.resize(cap + 1, 0.0);
  for (std::size_t i = 0; i <= cap; ++i) k.pmf[i] = offspring_pmf(spec, i);
  k.suffix.resize(cap + 1, 0.0);
  k.suffix[cap] = offspring_tail(spec, static_cast<std::int64_t>(cap));
  for (std::size_t i = cap; i-- > 0;) k.suffix[i] = k.suffix[i + 1] + k.pmf[i + 1];
  k.len = 0;
  for (std::size_t i = 0; i <= cap; ++i) {
    if (k.pmf[i] > 0.0) k.len = i + 1;
  }
  return k;
}

// cur -> law of the next generation; returns mass newly escaped past cap.
double evolve_generation(std::vector<double>& cur, const XiKernel& xi, std::size_t cap,
                         std::vector<double>& conv, std::vector<double>& conv_next,
                         std::vector<double>& next) {
  std::fill(next.begin(), next.end(), 0.0);
  std::fill(conv.begin(), conv.end(), 0.0);
  conv[0] = 1.0;
  double conv_tail = 0.0;
  double escaped = 0.0;

  std::size_t max_j = 0;
  for (std::size_t j = 0; j <= cap; ++j) {
    if (cur[j] > kMassSkipThreshold) max_j = j;
  }

  next[0] += cur[0];  // j = 0 parents produce an empty generation
  for (std::size_t j = 1; j <= max_j; ++j) {
    // conv := conv * xi, truncated at cap.
    std::fill(conv_next.begin(), conv_next.end(), 0.0);
    double step_escape = 0.0;
    for (std::size_t i = 0; i <= cap; ++i) {
      const double c = conv[i];
      if (c == 0.0) continue;
      const std::size_t lim = cap - i;
      const std::size_t cut = std::min(lim, xi.len == 0 ? 0 : xi.len - 1);
      step_escape += c * xi.suffix[cut];
      const double* xp = xi.pmf.data();
      double* np = conv_next.data() + i;
      for (std::size_t l = 0; l <= cut; ++l) np[l] += c * xp[l];
    }
    conv_tail += step_escape;
    conv.swap(conv_next);

    const double mass = cur[j];
    if (mass == 0.0) continue;
    if (mass <= kMassSkipThreshold) {
      escaped += mass;
      continue;
    }
    for (std::size_t i = 0; i <= cap; ++i) {
      if (conv[i] != 0.0) next[i] += mass * conv[i];
    }
    escaped += mass * conv_tail;
  }
  for (std::size_t j = max_j + 1; j <= cap; ++j) escaped += cur[j];
  cur.swap(next);
  return escaped;
}

}  // namespace

PmfVector zn_pmf(const OffspringSpec& spec, int generations, std::size_t cap) {
  spec.validate();
  if (generations < 0) throw std::invalid_argument("zn_pmf: negative generation count");
  if (cap < 1) throw std::invalid_argument("zn_pmf: cap must be >= 1");

  PmfVector out;
  out.offset = 0;
  out.cap = cap;
  out.probs.assign(cap + 1, 0.0);
  out.probs[1] = 1.0;  // Z_0 = 1
  if (generations == 0) return out;

  const XiKernel xi = build_kernel(spec, cap);
  std::vector<double> conv(cap + 1), conv_next(cap + 1), next(cap + 1);
  double escaped = 0.0;
  for (int g = 0; g < generations; ++g) {
    escaped += evolve_generation(out.probs, xi, cap, conv, conv_next, next);
  }
  out.tail_mass = escaped;
  return out;
}

PmfVector yaglom_pmf(const OffspringSpec& spec, double tol) {
  spec.validate();
  if (!(tol > 0.0)) throw std::invalid_argument("yaglom_pmf: tol must be positive");
  const MomentSummary mom = moments(spec);
  if (mom.criticality != Criticality::subcritical) {
    throw std::invalid_argument("yaglom_pmf: spec must be subcritical");
  }
  if (!mom.variance.has_value()) {
    throw std::invalid_argument("yaglom_pmf: spec must have finite second moment");
  }

  std::size_t cap = 256;
  constexpr std::size_t kMaxCap = 1 << 15;
  constexpr int kMaxGenerations = 200000;
  for (;;) {
    const XiKernel xi = build_kernel(spec, cap);
    std::vector<double> cur(cap + 1, 0.0), conv(cap + 1), conv_next(cap + 1), next(cap + 1);
    cur[1] = 1.0;
    double escaped = 0.0;
    std::vector<double> prev_cond;
    bool cap_too_small = false;
    for (int g = 1; g <= kMaxGenerations; ++g) {
      escaped += evolve_generation(cur, xi, cap, conv, conv_next, next);
      double alive = 0.0;
      for (std::size_t k = 1; k <= cap; ++k) alive += cur[k];
      if (alive + escaped <= 0.0) break;
      if (escaped > 0.25 * tol * (alive + escaped)) {
        cap_too_small = true;
        break;
      }
      std::vector<double> cond(cap, 0.0);
      for (std::size_t k = 1; k <= cap; ++k) cond[k - 1] = cur[k] / alive;
      if (!prev_cond.empty()) {
        double tv = 0.0;
        for (std::size_t k = 0; k < cap; ++k) tv += std::fabs(cond[k] - prev_cond[k]);
        tv *= 0.5;
        if (tv < tol && g >= 2) {
          PmfVector out;
          out.offset = 1;
          out.cap = cap;
          out.probs = std::move(cond);
          double sum = 0.0;
          for (double p : out.probs) sum += p;
          out.tail_mass = std::max(0.0, 1.0 - sum);
          return out;
        }
      }
      prev_cond = std::move(cond);
    }
    if (!cap_too_small || cap >= kMaxCap) {
      throw std::runtime_error("yaglom_pmf: iteration failed to converge at tolerance");
    }
    cap *= 2;
  }
}

// ---------------------------------------------------------------------------
// Extremal normalizer

std::uint64_t extremal_norm_min_index(const OffspringSpec& spec) {
  // a_j > 0 iff 1 - F(0) > 1/j strictly, i.e. j > 1 / tail(0).
  const double tail0 = offspring_tail(spec, 0);
  std::uint64_t j = static_cast<std::uint64_t>(std::floor(1.0 / tail0)) + 1;
  while (j > 2 && tail0 * static_cast<double>(j - 1) > 1.0) --j;
  while (tail0 * static_cast<double>(j) <= 1.0) ++j;
  return j;
}

double extremal_norm(const OffspringSpec& spec, std::uint64_t j) {
  spec.validate();
  if (spec.bounded_support()) {
    throw std::invalid_argument(
        "extremal_norm: offspring law has bounded support; F(x) = 1 for large x");
  }
  if (j < extremal_norm_min_index(spec)) {
    throw std::invalid_argument("extremal_norm: j below the smallest index with a_j > 0");
  }
  const double target = 1.0 / static_cast<double>(j);
  // Smallest integer x with P(xi > x) <= 1/j.
  std::int64_t hi = 1;
  while (offspring_tail(spec, hi) > target) hi *= 2;
  std::int64_t lo = 0;  // tail(0) > 1/j by the j_min check... may already satisfy hi=1
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (offspring_tail(spec, mid) <= target) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return offspring_tail(spec, 0) <= target ? 0.0 : static_cast<double>(hi);
}

double extremal_norm(const std::function<double(double)>& cdf, std::uint64_t j,
                     double search_hint) {
  if (j == 0) throw std::invalid_argument("extremal_norm: j must be >= 1");
  const double target = 1.0 / static_cast<double>(j);
  const auto tail = [&cdf](double x) { return 1.0 - cdf(x); };
  if (tail(0.0) <= target) return 0.0;
  double hi = std::max(search_hint, 1e-12);
  int doublings = 0;
  while (tail(hi) > target) {
    hi *= 2.0;
    if (++doublings > 2000) throw std::runtime_error("extremal_norm: tail never reaches 1/j");
  }
  double lo = 0.0;
  for (int it = 0; it < 200 && (hi - lo) > 1e-13 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (tail(mid) <= target) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

// ---------------------------------------------------------------------------
// Sampler

OffspringSampler::OffspringSampler(OffspringSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  switch (spec_.family) {
    case OffspringFamily::binary_split:
      break;  // direct branch, no table
    case OffspringFamily::explicit_table: {
      cdf_.resize(spec_.table.size());
      double cum = 0.0;
      for (std::size_t i = 0; i < spec_.table.size(); ++i) {
        cum += spec_.table[i];
        cdf_[i] = cum;
      }
      break;
    }
    case OffspringFamily::geometric:
    case OffspringFamily::poisson:
      build_table(1e-15, 4096);
      break;
    case OffspringFamily::discrete_pareto:
      support_min_ = spec_.pareto_x_min;
      build_table(1e-9, 65536);
      break;
  }
}

void OffspringSampler::build_table(double target_tail, std::size_t max_entries) {
  cdf_.clear();
  double cum = 0.0;
  std::uint64_t k = support_min_;
  while (cdf_.size() < max_entries) {
    cum += offspring_pmf(spec_, k);
    cdf_.push_back(cum);
    if (1.0 - cum <= target_tail) break;
    ++k;
  }
}

void OffspringSampler::extend_table(std::size_t new_size) {
  double cum = cdf_.back();
  std::uint64_t k = support_min_ + cdf_.size();
  while (cdf_.size() < new_size) {
    cum += offspring_pmf(spec_, k);
    cdf_.push_back(cum);
    ++k;
  }
}

std::uint64_t OffspringSampler::draw(RngStream& rng) {
  if (spec_.family == OffspringFamily::binary_split) {
    return rng.next_unit() < spec_.split_prob ? 2 : 0;
  }
  const double u = rng.next_unit();
  const double* c = cdf_.data();
  const std::size_t n = cdf_.size();
  // Branchless inversion over the leading block, which carries nearly all of
  // the mass for every built-in family; a data-dependent early-exit loop here
  // mispredicts on almost every draw.
  if (n >= 8 && u <= c[7]) {
    const std::size_t idx = static_cast<std::size_t>(u > c[0]) + (u > c[1]) + (u > c[2]) +
                            (u > c[3]) + (u > c[4]) + (u > c[5]) + (u > c[6]);
    return support_min_ + idx;
  }
  for (std::size_t i = n >= 8 ? 8 : 0; i < n; ++i) {
    if (u <= c[i]) return support_min_ + i;
  }
  return tail_walk(u, rng);
}

std::uint64_t OffspringSampler::tail_walk(double u, RngStream&) {
  switch (spec_.family) {
    case OffspringFamily::explicit_table:
      return spec_.table.size() - 1;  // fp dust beyond a finite table
    case OffspringFamily::geometric: {
      const double q = 1.0 - spec_.success_prob;
      std::uint64_t k = cdf_.size();
      double cum = cdf_.back();
      double pk = offspring_pmf(spec_, k);
      while (u > cum + pk && pk > 0.0) {
        cum += pk;
        pk *= q;
        ++k;
      }
      return k;
    }
    case OffspringFamily::poisson: {
      std::uint64_t k = cdf_.size();
      double cum = cdf_.back();
      double pk = offspring_pmf(spec_, k);
      while (u > cum + pk && pk > 0.0) {
        cum += pk;
        ++k;
        pk *= spec_.poisson_mean / static_cast<double>(k);
      }
      return k;
    }
    case OffspringFamily::discrete_pareto: {
      // Extend the inversion table (bounded) first, then walk the recurrence
      // without storing for astronomically deep hits.
      constexpr std::size_t kMaxStored = 1u << 21;
      while (cdf_.size() < kMaxStored && u > cdf_.back()) {
        extend_table(std::min(kMaxStored, cdf_.size() * 2));
        const std::size_t n = cdf_.size();
        for (std::size_t i = n / 2; i < n; ++i) {
          if (u <= cdf_[i]) return support_min_ + i;
        }
      }
      std::uint64_t k = support_min_ + cdf_.size();
      double cum = cdf_.back();
      double pk = offspring_pmf(spec_, k);
      const double alpha1 = spec_.pareto_alpha + 1.0;
      while (u > cum + pk && pk > 0.0) {
        cum += pk;
        const double kd = static_cast<double>(k);
        pk *= std::pow(kd / (kd + 1.0), alpha1);
        ++k;
      }
      return k;
    }
    default:
      return 0;
  }
}

bool OffspringSampler::aggregate_fast_path() const {
  switch (spec_.family) {
    case OffspringFamily::binary_split:
    case OffspringFamily::geometric:
    case OffspringFamily::poisson:
      return true;
    default:
      return false;
  }
}

std::uint64_t OffspringSampler::draw_sum(std::uint64_t count, RngStream& rng) {
  if (count == 0) return 0;
  if (count == 1) return draw(rng);
  switch (spec_.family) {
    case OffspringFamily::binary_split:
      return 2 * sample_binomial(count, spec_.split_prob, rng);
    case OffspringFamily::geometric:
      return sample_negative_binomial(count, spec_.success_prob, rng);
    case OffspringFamily::poisson:
      return sample_poisson(static_cast<double>(count) * spec_.poisson_mean, rng);
    default: {
      std::uint64_t total = 0;
      for (std::uint64_t i = 0; i < count; ++i) total += draw(rng);
      return total;
    }
  }
}

}  // namespace gwlimits
