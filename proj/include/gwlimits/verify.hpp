#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gwlimits/limit_laws.hpp"

namespace gwlimits {

// Right-continuous empirical CDF over a sorted copy of the samples.
class Ecdf {
 public:
  explicit Ecdf(std::vector<double> samples);

  double operator()(double x) const;        // P_hat(X <= x)
  double left_limit(double x) const;        // P_hat(X < x)
  std::size_t size() const { return sorted_.size(); }
  std::span<const double> sorted() const { return sorted_; }

 private:
  std::vector<double> sorted_;
};

struct KsReport {
  double distance = 0.0;
  std::size_t sample_count = 0;
  double threshold = 0.0;
  bool pass = false;
  std::string reference_id;
};

// sup_x |F_hat(x) - F(x)| against a continuous reference: both one-sided gaps
// are evaluated at every sample point, which is exact for step-vs-continuous.
KsReport ks_distance(const Ecdf& ecdf, const ReferenceCdf& reference, double threshold);

struct IndependenceReport {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<double> correlations;
  double max_abs_correlation = 0.0;
  std::size_t sample_count = 0;
  std::vector<std::size_t> zero_variance_columns;
};

IndependenceReport pairwise_correlation(std::span<const std::vector<double>> columns);

struct SweepRow {
  std::uint64_t horizon = 0;
  KsReport ks;
  bool simulated = false;
  std::string note;
};

struct SweepReport {
  std::vector<SweepRow> rows;
  bool trend_nonincreasing = false;
  double trend_slack = 0.0;
  bool all_simulated = false;
};

// Runs `sampler(horizon)` per horizon, compares each sample set against the
// reference, and checks the distances are nonincreasing within the slack.
// A sampler failure is recorded in that row and fails the sweep.
SweepReport convergence_sweep(std::span<const std::uint64_t> horizons,
                              const std::function<std::vector<double>(std::uint64_t)>& sampler,
                              const ReferenceCdf& reference, double per_horizon_threshold,
                              double trend_slack);

}  // namespace gwlimits
