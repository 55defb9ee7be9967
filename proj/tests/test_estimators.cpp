#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gwlimits/engine.hpp"
#include "gwlimits/estimators.hpp"
#include "gwlimits/functionals.hpp"
#include "gwlimits/limit_laws.hpp"
#include "gwlimits/rng.hpp"

using namespace gwlimits;

TEST_CASE("kappa and theta closed forms") {
  const KappaTheta all = kappa_theta(WeightScheme::all_ones(), 2.0);
  CHECK(all.kappa == doctest::Approx(1.0).epsilon(1e-14));
  for (std::size_t k = 1; k <= 10; ++k) {
    CHECK(all.theta[k - 1] ==
          doctest::Approx(std::pow(2.0, -static_cast<double>(k))).epsilon(1e-12));
  }
  double total = all.residual;
  for (double t : all.theta) total += t;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-10));

  const KappaTheta single = kappa_theta(WeightScheme::finite_list({1.0}), 1.7);
  CHECK(single.theta.size() == 1);
  CHECK(single.theta[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(single.residual == doctest::Approx(0.0));

  const KappaTheta geo = kappa_theta(WeightScheme::geometric(0.5), 2.0);
  CHECK(geo.kappa == doctest::Approx(1.0 / (2.0 - 0.5)).epsilon(1e-13));
  double geo_total = geo.residual;
  for (double t : geo.theta) geo_total += t;
  CHECK(geo_total == doctest::Approx(1.0).epsilon(1e-10));

  CHECK_THROWS_AS(kappa_theta(WeightScheme::all_ones(), 1.0), std::invalid_argument);
  CHECK_THROWS_AS(kappa_theta(WeightScheme::geometric(2.5), 2.0), std::invalid_argument);
}

TEST_CASE("limit variance") {
  // 0/1 weights collapse the variance to sigma^2
  CHECK(lambda_sq(WeightScheme::all_ones(), 2.0, 6.0) == doctest::Approx(6.0).epsilon(1e-13));
  CHECK(lambda_sq(WeightScheme::finite_list({1.0, 0.0, 1.0}), 3.0, 2.5) ==
        doctest::Approx(2.5).epsilon(1e-13));
  // constant weight 2: kappa = 2, sum b^2/m^j = 4, lambda^2 = 12
  CHECK(lambda_sq(WeightScheme::all_ones(2.0), 2.0, 6.0) == doctest::Approx(12.0).epsilon(1e-13));
}

TEST_CASE("ratio statistic on the doubling trajectory") {
  // Z_k = 2^k makes every generation ratio exactly m = 2
  std::vector<std::uint64_t> traj(11);
  for (int k = 0; k <= 10; ++k) traj[static_cast<std::size_t>(k)] = 1ULL << k;
  for (const WeightScheme& w :
       {WeightScheme::all_ones(), WeightScheme::geometric(0.7), WeightScheme::finite_list({2.0, 1.0})}) {
    const RatioEstimate est = ratio_statistic(traj, w, 2.0);
    CHECK(est.studentized == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    CHECK(est.mean_estimate == doctest::Approx(2.0).epsilon(1e-13));
  }
}

TEST_CASE("single-weight statistic equals the scaled path endpoint") {
  const OffspringSpec spec = OffspringSpec::geometric(1.0 / 3.0);
  const MomentSummary mom = moments(spec);
  const double sigma = std::sqrt(*mom.variance);
  const WeightScheme first_only = WeightScheme::finite_list({1.0});
  SimConfig c;
  c.spec = spec;
  c.horizon = 12;
  c.retain = RetainRule::explicit_count(1);
  c.functional = FunctionalKind::donsker;
  c.condition = ConditionMode::last_parent_positive;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const RunRecord run = simulate_conditioned(c, seed);
    REQUIRE(run.verdict == RunVerdict::ok);
    const RatioEstimate est = ratio_statistic(run.trajectory, first_only, mom.mean);
    const auto& path = std::get<PathFunctional>(run.window.back());
    CHECK(est.studentized == doctest::Approx(sigma * path.endpoint).epsilon(1e-12));
  }
}

TEST_CASE("degenerate trajectories yield the defined zeros") {
  // extinct after Z_0 with a single first weight: D_n = Z_{n-1} = 0
  std::vector<std::uint64_t> dead{1, 0, 0, 0};
  const RatioEstimate est = ratio_statistic(dead, WeightScheme::finite_list({1.0}), 2.0);
  CHECK(est.weighted_denominator == doctest::Approx(0.0));
  CHECK(est.studentized == doctest::Approx(0.0));
  CHECK_THROWS_AS(mean_confidence_interval(dead, WeightScheme::finite_list({1.0}), 0.95),
                  std::invalid_argument);
}

TEST_CASE("scale invariance") {
  RngStream rng(606);
  const double m = 2.0;
  const double c_scale = 3.7;
  for (int rep = 0; rep < 30; ++rep) {
    std::vector<std::uint64_t> traj{1};
    for (int k = 0; k < 12; ++k) {
      const std::uint64_t z = traj.back();
      std::uint64_t next = 0;
      for (std::uint64_t i = 0; i < z; ++i) next += rng.next_u64() % 4;  // mean 1.5-ish
      traj.push_back(next);
    }
    const WeightScheme base = WeightScheme::all_ones();
    const WeightScheme scaled = WeightScheme::all_ones(c_scale);
    const RatioEstimate a = ratio_statistic(traj, base, m);
    const RatioEstimate b = ratio_statistic(traj, scaled, m);
    CHECK(b.mean_estimate == doctest::Approx(a.mean_estimate).epsilon(1e-12));
    CHECK(b.studentized ==
          doctest::Approx(a.studentized * std::sqrt(c_scale)).epsilon(1e-12));
    CHECK(lambda_sq(scaled, m, 6.0) == doctest::Approx(c_scale * lambda_sq(base, m, 6.0)));
    // the studentized-over-limit-sd quantity is invariant
    const double inv_a = a.studentized / std::sqrt(lambda_sq(base, m, 6.0));
    const double inv_b = b.studentized / std::sqrt(lambda_sq(scaled, m, 6.0));
    CHECK(inv_a == doctest::Approx(inv_b).epsilon(1e-12));
  }
}

TEST_CASE("confidence interval mechanics") {
  CHECK(std_normal_quantile(0.975) == doctest::Approx(1.959964).epsilon(1e-6));

  SimConfig c;
  c.spec = OffspringSpec::geometric(1.0 / 3.0);
  c.horizon = 20;
  c.retain = RetainRule::explicit_count(1);
  c.condition = ConditionMode::survival_proxy;
  const RunRecord run = simulate_conditioned(c, 9);
  REQUIRE(run.verdict == RunVerdict::ok);

  const MeanInterval base =
      mean_confidence_interval(run.trajectory, WeightScheme::all_ones(), 0.95);
  CHECK(base.lower < base.mean_estimate);
  CHECK(base.mean_estimate < base.upper);

  // width = 2 t Lambda_hat / sqrt(D_n): the D_n^{-1/2} structure is exact,
  // with t the small-sample quantile just above z
  const RatioEstimate raw = ratio_statistic(run.trajectory, WeightScheme::all_ones(), 2.0);
  const double z975 = std_normal_quantile(0.975);
  CHECK(base.quantile > z975);
  CHECK(base.quantile < z975 * 1.1);
  CHECK((base.upper - base.lower) ==
        doctest::Approx(2.0 * base.quantile * std::sqrt(base.lambda_sq_estimate /
                                                        raw.weighted_denominator))
            .epsilon(1e-12));

  // scaling every weight rescales Lambda_hat^2 and D_n together, so the
  // interval itself is scale invariant
  const MeanInterval doubled =
      mean_confidence_interval(run.trajectory, WeightScheme::all_ones(2.0), 0.95);
  CHECK((doubled.upper - doubled.lower) ==
        doctest::Approx(base.upper - base.lower).epsilon(1e-12));
  CHECK(doubled.lambda_sq_estimate == doctest::Approx(2.0 * base.lambda_sq_estimate));
  CHECK(doubled.mean_estimate == doctest::Approx(base.mean_estimate).epsilon(1e-12));

  const MeanInterval wide = mean_confidence_interval(run.trajectory, WeightScheme::all_ones(), 0.99);
  CHECK((wide.upper - wide.lower) > (base.upper - base.lower));

  CHECK_THROWS_AS(mean_confidence_interval(run.trajectory, WeightScheme::all_ones(), 1.5),
                  std::invalid_argument);
}
