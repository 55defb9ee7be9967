#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gwlimits/rng.hpp"

namespace gwlimits {

enum class OffspringFamily {
  binary_split,    // 0 or 2 children: p_2 = a, p_0 = 1 - a
  geometric,       // p_k = p (1-p)^k, k >= 0
  poisson,         // p_k = e^-lambda lambda^k / k!
  discrete_pareto, // p_k proportional to k^-(alpha+1), k >= x_min
  explicit_table,  // p_0 .. p_K given directly
};

enum class Criticality { subcritical, critical, supercritical };

// Parametric offspring law with exact pmf, tail, and generating-function
// access. Every statistical claim in the project is checked against the
// closed forms this type provides.
struct OffspringSpec {
  OffspringFamily family = OffspringFamily::binary_split;
  double split_prob = 0.0;        // binary-split a
  double success_prob = 0.0;      // geometric p
  double poisson_mean = 0.0;      // poisson lambda
  double pareto_alpha = 0.0;      // tail exponent alpha (> 1)
  std::uint64_t pareto_x_min = 1; // smallest pareto support point
  std::vector<double> table;      // explicit table p_0..p_K

  static OffspringSpec binary_split(double a);
  static OffspringSpec geometric(double p);
  static OffspringSpec poisson(double lambda);
  static OffspringSpec discrete_pareto(double alpha, std::uint64_t x_min = 1);
  static OffspringSpec explicit_table(std::vector<double> probs);

  // Enforces p_j >= 0, sum 1 (1e-12 for tables), and p_0 + p_1 < 1.
  void validate() const;

  bool bounded_support() const;
  std::string describe() const;
};

struct MomentSummary {
  double mean = 0.0;
  std::optional<double> variance;       // nullopt when infinite
  Criticality criticality = Criticality::critical;
  std::optional<double> tail_exponent;  // alpha for regularly varying tails
};

// Truncated exact distribution on {offset, offset+1, ..., offset+probs.size()-1}
// with all unresolved mass tracked in tail_mass, never dropped.
struct PmfVector {
  std::int64_t offset = 0;
  std::vector<double> probs;
  double tail_mass = 0.0;
  std::uint64_t cap = 0;

  double at(std::int64_t k) const;
  double mass_sum() const;
  // Largest index with positive probability, or offset-1 when empty.
  std::int64_t support_max() const;
};

MomentSummary moments(const OffspringSpec& spec);

// Exact pmf / upper tail of a single offspring draw.
double offspring_pmf(const OffspringSpec& spec, std::uint64_t k);
double offspring_tail(const OffspringSpec& spec, std::int64_t k);  // P(xi > k)

// f(s) = sum p_k s^k and its n-fold composition f_n, with f_0(s) = s.
double pgf(const OffspringSpec& spec, double s);
double pgf_compose(const OffspringSpec& spec, int generations, double s);

// P(Z_n > 0) = 1 - f_n(0); exactly 1 at n = 0.
double survival_prob(const OffspringSpec& spec, int generations);

// Smallest fixed point of f on [0,1]; 1 iff m <= 1, else bisection to 1e-12.
double extinction_prob(const OffspringSpec& spec);

// Exact law of Z_n on {0..cap}; excess mass accumulates in tail_mass.
PmfVector zn_pmf(const OffspringSpec& spec, int generations, std::size_t cap);

// Limit of L(Z_n | Z_n > 0) for subcritical spec with finite variance,
// iterated until the total-variation step change drops below tol.
PmfVector yaglom_pmf(const OffspringSpec& spec, double tol);

// Extremal normalizer a_j = inf{x >= 0 : 1 - F(x) <= 1/j} (generalized
// inverse). The OffspringSpec overload uses exact integer tail sums and
// requires unbounded support; j below extremal_norm_min_index is rejected.
double extremal_norm(const OffspringSpec& spec, std::uint64_t j);
double extremal_norm(const std::function<double(double)>& cdf, std::uint64_t j,
                     double search_hint = 1.0);
std::uint64_t extremal_norm_min_index(const OffspringSpec& spec);

// Hurwitz zeta for s > 1, a >= 1 (Euler-Maclaurin, ~1e-14 relative).
double hurwitz_zeta(double s, double a);

// Streaming sampler for one spec. draw() consumes one stream value group;
// draw_sum() samples the law of a sum of `count` iid draws directly when
// the family admits a closed aggregate (binomial / Poisson / negative
// binomial), otherwise it loops. A sampler instance is single-threaded:
// the pareto inversion table extends lazily as deep tail hits occur.
class OffspringSampler {
 public:
  explicit OffspringSampler(OffspringSpec spec);

  std::uint64_t draw(RngStream& rng);
  std::uint64_t draw_sum(std::uint64_t count, RngStream& rng);
  bool aggregate_fast_path() const;
  const OffspringSpec& spec() const { return spec_; }

 private:
  void build_table(double target_tail, std::size_t max_entries);
  void extend_table(std::size_t new_size);
  std::uint64_t tail_walk(double u, RngStream& rng);

  OffspringSpec spec_;
  std::vector<double> cdf_;       // cumulative pmf from support_min_
  std::uint64_t support_min_ = 0;
};

}  // namespace gwlimits
