#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "gwlimits/functionals.hpp"
#include "gwlimits/offspring.hpp"

namespace gwlimits {

double std_normal_cdf(double x);
// Inverse of std_normal_cdf, refined to ~1e-14.
double std_normal_quantile(double p);

double gumbel_cdf(double x);                  // exp(-exp(-x))
double frechet_cdf(double x, double alpha);   // exp(-x^-alpha) for x > 0, else 0
double brownian_sup_cdf(double x);            // 2 Phi(x) - 1 for x >= 0, else 0

// P(sup_j lambda_j G_j <= x) (one-sided) or P(sup_j lambda_j |G_j| <= x)
// (absolute) as the infinite product of Gaussian factors, truncated where a
// Gaussian tail bound certifies the remaining log-tail is below tol.
struct WeightedSupValue {
  double value = 0.0;
  std::size_t truncation_index = 0;
};
WeightedSupValue weighted_sup_cdf(const LambdaSeq& lambda, double x, bool absolute,
                                  double tol);

// Monte Carlo companion: samples of sup_{j<=J} lambda_j |G_j| (or one-sided),
// truncated at the same certified index for the given x and tol.
std::vector<double> weighted_sup_samples(const LambdaSeq& lambda, double min_x, bool absolute,
                                         double tol, std::size_t n, std::uint64_t seed);

// One W draw from a finished run: W_N with its survival flag.
struct WSample {
  double w = 0.0;
  bool survived = false;
};

// E(Phi(t_1 sqrt W) ... Phi(t_l sqrt W) I_survival) estimated over samples;
// extinct samples contribute zero.
struct WMixtureValue {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};
WMixtureValue w_mixture_joint(std::span<const double> thresholds,
                              std::span<const WSample> samples);

// Limit law of L_n = sqrt(Z_{n-1}) (Z_n/Z_{n-1} - m) given Z_{n-1} > 0 for a
// subcritical process: sum_k theta_k P(S_k <= m k + x sqrt k), with theta the
// Yaglom masses and S_k the k-fold offspring sum (exact convolutions).
class SubcriticalMixture {
 public:
  SubcriticalMixture(const OffspringSpec& spec, double tol);
  double cdf(double x) const;
  double theta_mass() const { return theta_mass_; }
  double theta_residual() const { return theta_residual_; }

 private:
  double mean_;
  std::vector<double> theta_;                  // masses for k = 1..K
  double theta_mass_ = 0.0;
  double theta_residual_ = 0.0;
  std::vector<std::vector<double>> sum_cdf_;   // sum_cdf_[k-1][t] = P(S_k <= t)
};

double subcritical_mixture_cdf(const OffspringSpec& spec, double x, double tol);

// Reference distribution wrapper used by the verification harness.
class ReferenceCdf {
 public:
  static ReferenceCdf std_normal();
  static ReferenceCdf normal_scale(double sigma);  // mean zero, sd sigma
  static ReferenceCdf gumbel();
  static ReferenceCdf frechet(double alpha);
  static ReferenceCdf brownian_sup();
  static ReferenceCdf weighted_sup(const LambdaSeq& lambda, bool absolute, double tol);
  static ReferenceCdf subcritical_mixture(const OffspringSpec& spec, double tol);
  static ReferenceCdf discrete(PmfVector pmf);

  double operator()(double x) const { return eval_(x); }
  // F(x-): differs from F(x) only for laws with atoms.
  double left_limit(double x) const { return left_ ? left_(x) : eval_(x); }
  const std::string& id() const { return id_; }

 private:
  ReferenceCdf(std::string id, std::function<double(double)> eval,
               std::function<double(double)> left = nullptr)
      : id_(std::move(id)), eval_(std::move(eval)), left_(std::move(left)) {}

  std::string id_;
  std::function<double(double)> eval_;
  std::function<double(double)> left_;
};

}  // namespace gwlimits
