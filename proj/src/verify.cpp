#include "gwlimits/verify.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gwlimits {

Ecdf::Ecdf(std::vector<double> samples) : sorted_(std::move(samples)) {
  if (sorted_.empty()) throw std::invalid_argument("Ecdf: empty sample set");
  std::sort(sorted_.begin(), sorted_.end());
}

double Ecdf::operator()(double x) const {
  const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
  return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
}

double Ecdf::left_limit(double x) const {
  const auto it = std::lower_bound(sorted_.begin(), sorted_.end(), x);
  return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
}

KsReport ks_distance(const Ecdf& ecdf, const ReferenceCdf& reference, double threshold) {
  const auto samples = ecdf.sorted();
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double above =
        static_cast<double>(i + 1) / n - reference(samples[i]);  // F_hat jumps to (i+1)/n
    const double below =
        reference.left_limit(samples[i]) - static_cast<double>(i) / n;  // gap just before x_i
    d = std::max(d, std::max(above, below));
  }
  KsReport report;
  report.distance = d;
  report.sample_count = samples.size();
  report.threshold = threshold;
  report.pass = d <= threshold;
  report.reference_id = reference.id();
  return report;
}

IndependenceReport pairwise_correlation(std::span<const std::vector<double>> columns) {
  if (columns.size() < 2) throw std::invalid_argument("pairwise_correlation: need >= 2 columns");
  const std::size_t n = columns[0].size();
  if (n < 2) throw std::invalid_argument("pairwise_correlation: need >= 2 samples");
  for (const auto& c : columns) {
    if (c.size() != n) throw std::invalid_argument("pairwise_correlation: ragged columns");
  }

  IndependenceReport report;
  report.sample_count = n;
  std::vector<double> means(columns.size(), 0.0);
  std::vector<double> sds(columns.size(), 0.0);
  for (std::size_t c = 0; c < columns.size(); ++c) {
    double m = 0.0;
    for (double v : columns[c]) m += v;
    m /= static_cast<double>(n);
    double var = 0.0;
    for (double v : columns[c]) var += (v - m) * (v - m);
    var /= static_cast<double>(n);
    means[c] = m;
    sds[c] = std::sqrt(var);
    if (sds[c] == 0.0) report.zero_variance_columns.push_back(c);
  }
  for (std::size_t a = 0; a < columns.size(); ++a) {
    for (std::size_t b = a + 1; b < columns.size(); ++b) {
      double cov = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        cov += (columns[a][i] - means[a]) * (columns[b][i] - means[b]);
      }
      cov /= static_cast<double>(n);
      double corr = 0.0;
      if (sds[a] > 0.0 && sds[b] > 0.0) corr = cov / (sds[a] * sds[b]);
      report.pairs.emplace_back(a, b);
      report.correlations.push_back(corr);
      report.max_abs_correlation = std::max(report.max_abs_correlation, std::fabs(corr));
    }
  }
  return report;
}

SweepReport convergence_sweep(std::span<const std::uint64_t> horizons,
                              const std::function<std::vector<double>(std::uint64_t)>& sampler,
                              const ReferenceCdf& reference, double per_horizon_threshold,
                              double trend_slack) {
  if (horizons.empty()) throw std::invalid_argument("convergence_sweep: no horizons");
  for (std::size_t i = 1; i < horizons.size(); ++i) {
    if (horizons[i] <= horizons[i - 1]) {
      throw std::invalid_argument("convergence_sweep: horizons must be strictly increasing");
    }
  }
  SweepReport report;
  report.trend_slack = trend_slack;
  report.all_simulated = true;
  for (std::uint64_t h : horizons) {
    SweepRow row;
    row.horizon = h;
    try {
      std::vector<double> samples = sampler(h);
      row.ks = ks_distance(Ecdf(std::move(samples)), reference, per_horizon_threshold);
      row.simulated = true;
    } catch (const std::exception& e) {
      row.simulated = false;
      row.note = e.what();
      report.all_simulated = false;
    }
    report.rows.push_back(std::move(row));
  }
  report.trend_nonincreasing = report.all_simulated;
  for (std::size_t i = 1; i < report.rows.size() && report.trend_nonincreasing; ++i) {
    if (report.rows[i].ks.distance > report.rows[i - 1].ks.distance + trend_slack) {
      report.trend_nonincreasing = false;
    }
  }
  return report;
}

}  // namespace gwlimits
