#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gwlimits/engine.hpp"
#include "gwlimits/json_io.hpp"
#include "oracles.hpp"

using namespace gwlimits;

namespace {

SimConfig basic_config(OffspringSpec spec, int horizon) {
  SimConfig c;
  c.spec = std::move(spec);
  c.horizon = horizon;
  c.retain = RetainRule::explicit_count(1);
  return c;
}

}  // namespace

TEST_CASE("deterministic doubling table: Z_k = 2^k") {
  SimConfig c = basic_config(OffspringSpec::explicit_table({0.0, 0.0, 1.0}), 10);
  const RunRecord run = simulate_run(c, 42);
  for (int k = 0; k <= 10; ++k) {
    CHECK(run.trajectory[static_cast<std::size_t>(k)] == (1ULL << k));
  }
  CHECK(!run.extinct);
  CHECK(run.verdict == RunVerdict::ok);
}

TEST_CASE("absorption: zero stays zero and flags extinction") {
  SimConfig c = basic_config(OffspringSpec::geometric(2.0 / 3.0), 40);  // m = 1/2
  bool saw_extinction = false;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const RunRecord run = simulate_run(c, seed);
    bool dead = false;
    for (std::uint64_t z : run.trajectory) {
      if (dead) CHECK(z == 0);
      if (z == 0) dead = true;
    }
    if (dead) {
      CHECK(run.extinct);
      saw_extinction = true;
    }
  }
  CHECK(saw_extinction);
}

TEST_CASE("replay: identical seed reproduces the trajectory") {
  SimConfig c = basic_config(OffspringSpec::binary_split(0.6), 25);
  const RunRecord a = simulate_run(c, 777);
  const RunRecord b = simulate_run(c, 777);
  CHECK(a.trajectory == b.trajectory);
  CHECK(a.w_final == b.w_final);
  const RunRecord other = simulate_run(c, 778);
  CHECK(a.trajectory != other.trajectory);
}

TEST_CASE("windowed functional values equal brute-force recomputation via replay") {
  SimConfig c = basic_config(OffspringSpec::poisson(1.5), 12);
  c.retain = RetainRule::explicit_count(3);
  c.functional = FunctionalKind::donsker;
  c.grid_resolution = 8;
  const MomentSummary mom = moments(c.spec);
  const double sigma = std::sqrt(*mom.variance);

  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const RunRecord run = simulate_run(c, seed);
    if (run.verdict != RunVerdict::ok) continue;
    // replay the draw streams exactly as the engine derives them
    OffspringSampler sampler(c.spec);
    RngStream attempt(seed);
    for (int k = 10; k <= 12; ++k) {
      const std::uint64_t parents = run.trajectory[static_cast<std::size_t>(k - 1)];
      const FunctionalValue& stored = run.window[static_cast<std::size_t>(k - 10)];
      if (parents == 0) {
        CHECK(functional_is_zero(stored));
        continue;
      }
      RngStream gen = attempt.derived(static_cast<std::uint64_t>(k));
      std::vector<double> draws(parents);
      std::uint64_t total = 0;
      for (auto& d : draws) {
        const std::uint64_t xi = sampler.draw(gen);
        total += xi;
        d = static_cast<double>(xi);
      }
      CHECK(total == run.trajectory[static_cast<std::size_t>(k)]);  // streamed sum is Z_k
      const auto brute = oracles::brute_donsker(draws, mom.mean, sigma, c.grid_resolution);
      const auto& path = std::get<PathFunctional>(stored);
      CHECK(path.endpoint == doctest::Approx(brute.endpoint).epsilon(1e-12));
      CHECK(path.sup == doctest::Approx(brute.sup).epsilon(1e-12));
      CHECK(path.inf == doctest::Approx(brute.inf).epsilon(1e-12));
    }
  }
}

TEST_CASE("donsker endpoint identity against the trajectory") {
  SimConfig c = basic_config(OffspringSpec::geometric(1.0 / 3.0), 10);
  c.retain = RetainRule::explicit_count(2);
  c.functional = FunctionalKind::donsker;
  c.condition = ConditionMode::last_parent_positive;
  const MomentSummary mom = moments(c.spec);
  const double sigma = std::sqrt(*mom.variance);
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const RunRecord run = simulate_conditioned(c, seed);
    REQUIRE(run.verdict == RunVerdict::ok);
    const MultiGenVector vec = assemble_multigen(run, 2, FunctionalKind::donsker);
    for (int j = 1; j <= 2; ++j) {
      const auto& path = std::get<PathFunctional>(vec.coords[static_cast<std::size_t>(j - 1)]);
      const std::size_t n = run.trajectory.size() - 1;
      const double z_new = static_cast<double>(run.trajectory[n - j + 1]);
      const double z_parent = static_cast<double>(run.trajectory[n - j]);
      if (z_parent == 0.0) continue;
      const double identity = (z_new - mom.mean * z_parent) / (sigma * std::sqrt(z_parent));
      CHECK(path.endpoint == doctest::Approx(identity).epsilon(1e-12));
    }
  }
}

TEST_CASE("multigen assembly: order, base case, missing window") {
  SimConfig c = basic_config(OffspringSpec::binary_split(0.6), 8);
  c.retain = RetainRule::explicit_count(3);
  c.functional = FunctionalKind::donsker;
  const RunRecord run = simulate_run(c, 3);
  const MultiGenVector one = assemble_multigen(run, 1, FunctionalKind::donsker);
  CHECK(one.size() == 1);
  const MultiGenVector three = assemble_multigen(run, 3, FunctionalKind::donsker);
  // newest first: coordinate 1 is generation n
  CHECK(std::get<PathFunctional>(three.coords[0]).feed_count ==
        run.trajectory[run.trajectory.size() - 2]);
  CHECK_THROWS_AS(assemble_multigen(run, 4, FunctionalKind::donsker), std::invalid_argument);
}

TEST_CASE("conditioning: last parent positive") {
  SimConfig c = basic_config(OffspringSpec::geometric(0.5), 30);
  c.condition = ConditionMode::last_parent_positive;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const RunRecord run = simulate_conditioned(c, seed);
    REQUIRE(run.verdict == RunVerdict::ok);
    CHECK(run.trajectory[29] > 0);
  }
}

TEST_CASE("conditioning: acceptance rates match the survival oracle") {
  struct Case {
    OffspringSpec spec;
    int horizon;
    std::size_t replicates;
  };
  const std::vector<Case> cases = {
      {OffspringSpec::geometric(0.5), 50, 1500},      // critical: rate 1/50
      {OffspringSpec::binary_split(0.6), 50, 2000},   // supercritical, rate -> 1-q
      {OffspringSpec::poisson(1.5), 50, 2000},
      {OffspringSpec::geometric(2.0 / 3.0), 8, 1500}, // subcritical at a feasible horizon
      {OffspringSpec::discrete_pareto(2.0), 20, 300}, // immortal: rate 1
  };
  for (const auto& tc : cases) {
    SimConfig c = basic_config(tc.spec, tc.horizon);
    c.condition = ConditionMode::last_parent_positive;
    c.population_cap = 1'000'000'000'000'000ULL;  // deep horizons, aggregate draws only
    const EnsembleResult res = run_ensemble(
        c, 99, tc.replicates, 2, {"z"},
        [](const RunRecord& run, std::span<double> row) {
          row[0] = static_cast<double>(run.trajectory.back());
        });
    const double oracle = survival_prob(tc.spec, tc.horizon - 1);
    const double se =
        std::sqrt(oracle * (1.0 - oracle) / static_cast<double>(res.total_attempts));
    CHECK(std::fabs(res.acceptance_rate - oracle) <= 3.0 * se + 1e-12);
  }
}

TEST_CASE("conditioning: survival proxy acceptance equals survival_prob(n+K)") {
  SimConfig c = basic_config(OffspringSpec::geometric(1.0 / 3.0), 10);
  c.condition = ConditionMode::survival_proxy;
  c.proxy_extra_generations = 10;
  const EnsembleResult res = run_ensemble(
      c, 17, 4000, 2, {"z"},
      [](const RunRecord& run, std::span<double> row) {
        row[0] = static_cast<double>(run.trajectory.back());
      });
  const double oracle = survival_prob(c.spec, 20);
  const double se = std::sqrt(oracle * (1.0 - oracle) / static_cast<double>(res.total_attempts));
  CHECK(std::fabs(res.acceptance_rate - oracle) <= 3.0 * se);
  // accepted runs always end alive
  for (double z : res.column("z")) CHECK(z > 0.0);
}

TEST_CASE("ensemble: N = 1 equals simulate_conditioned with the derived stream") {
  SimConfig c = basic_config(OffspringSpec::poisson(1.5), 15);
  c.condition = ConditionMode::last_parent_positive;
  const EnsembleResult res = run_ensemble(
      c, 1234, 1, 1, {"z_final", "rejections"},
      [](const RunRecord& run, std::span<double> row) {
        row[0] = static_cast<double>(run.trajectory.back());
        row[1] = static_cast<double>(run.rejections);
      });
  const RunRecord direct = simulate_conditioned(c, RngStream(1234).derived(0));
  CHECK(res.column("z_final")[0] == static_cast<double>(direct.trajectory.back()));
  CHECK(res.column("rejections")[0] == static_cast<double>(direct.rejections));
}

TEST_CASE("ensemble: worker count never changes the result") {
  SimConfig c = basic_config(OffspringSpec::geometric(1.0 / 3.0), 12);
  c.condition = ConditionMode::survival_proxy;
  auto extract = [](const RunRecord& run, std::span<double> row) {
    row[0] = static_cast<double>(run.trajectory.back());
    row[1] = run.w_final;
    row[2] = static_cast<double>(run.rejections);
  };
  const EnsembleResult one =
      run_ensemble(c, 2024, 600, 1, {"z", "w", "rej"}, extract);
  const EnsembleResult eight =
      run_ensemble(c, 2024, 600, 8, {"z", "w", "rej"}, extract);
  CHECK(to_json(one, true).dump() == to_json(eight, true).dump());
}

TEST_CASE("ensemble: W martingale mean is 1") {
  SimConfig c = basic_config(OffspringSpec::geometric(1.0 / 3.0), 20);
  const std::size_t n = 100000;
  const EnsembleResult res = run_ensemble(
      c, 555, n, 2, {"w"},
      [](const RunRecord& run, std::span<double> row) { row[0] = run.w_final; });
  double mean = 0.0;
  for (double w : res.column("w")) mean += w;
  mean /= static_cast<double>(n);
  // Var(W_n) = sigma^2 (1 - m^-n) / (m^2 - m) = 3 for m=2, sigma^2=6
  const double se = std::sqrt(3.0 / static_cast<double>(n));
  CHECK(std::fabs(mean - 1.0) <= 4.0 * se);
}

TEST_CASE("kesten-stigum: W_n and W_{n+5} are close on survival") {
  struct Case {
    OffspringSpec spec;
    int horizon;  // chosen so sigma^2 m^-n (1 - m^-5) / (m^2 - m) << 0.01
  };
  const std::vector<Case> cases = {
      {OffspringSpec::poisson(1.5), 30},
      {OffspringSpec::geometric(1.0 / 3.0), 20},  // m = 2: keep 2^25 well below the cap
      {OffspringSpec::binary_split(0.6), 60},
  };
  for (const auto& tc : cases) {
    SimConfig c = basic_config(tc.spec, tc.horizon + 5);
    const MomentSummary mom = moments(tc.spec);
    const double m = mom.mean;
    EnsembleResult res = run_ensemble(
        c, 31337, 4000, 2, {"w_n", "w_n5", "alive"},
        [&](const RunRecord& run, std::span<double> row) {
          const double zn = static_cast<double>(run.trajectory[static_cast<std::size_t>(tc.horizon)]);
          row[0] = zn / std::pow(m, tc.horizon);
          row[1] = run.w_final;
          row[2] = run.extinct ? 0.0 : 1.0;
        });
    std::size_t alive = 0;
    std::size_t close = 0;
    const auto wn = res.column("w_n");
    const auto wn5 = res.column("w_n5");
    const auto alive_col = res.column("alive");
    for (std::size_t i = 0; i < res.accepted; ++i) {
      if (alive_col[i] < 0.5) continue;
      ++alive;
      if (std::fabs(wn[i] - wn5[i]) < 0.1) ++close;
    }
    REQUIRE(alive > 500);
    CHECK(static_cast<double>(close) / static_cast<double>(alive) >= 0.99);
  }
}

TEST_CASE("population cap: overflow is an explicit verdict") {
  SimConfig c = basic_config(OffspringSpec::geometric(1.0 / 3.0), 40);
  c.population_cap = 1000;
  bool saw_overflow = false;
  for (std::uint64_t seed = 0; seed < 30 && !saw_overflow; ++seed) {
    const RunRecord run = simulate_run(c, seed);
    if (run.verdict == RunVerdict::population_overflow) saw_overflow = true;
  }
  CHECK(saw_overflow);
}

TEST_CASE("rejection budget: explicit failure") {
  SimConfig c = basic_config(OffspringSpec::geometric(2.0 / 3.0), 40);  // survival ~ 2^-39
  c.condition = ConditionMode::last_parent_positive;
  c.rejection_budget = 200;
  const RunRecord run = simulate_conditioned(c, 5);
  CHECK(run.verdict == RunVerdict::rejection_budget_exhausted);
  CHECK(run.rejections == 200);
  // the failure also surfaces per replicate in an ensemble
  const EnsembleResult res = run_ensemble(
      c, 5, 3, 1, {"z"},
      [](const RunRecord&, std::span<double>) {});
  CHECK(res.failures.size() == 3);
  CHECK(res.accepted == 0);
}

TEST_CASE("retain rules") {
  CHECK(RetainRule::sqrt_floor().resolve(30) == 5);
  CHECK(RetainRule::sqrt_floor().resolve(1) == 1);
  CHECK(RetainRule::explicit_count(7).resolve(30) == 7);
  CHECK(RetainRule::pow_floor(0.5).resolve(100) == 10);
  SimConfig c = basic_config(OffspringSpec::poisson(1.5), 10);
  c.retain = RetainRule::explicit_count(11);
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("config validation") {
  SimConfig c = basic_config(OffspringSpec::discrete_pareto(2.0), 10);
  c.functional = FunctionalKind::donsker;  // infinite variance
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c.functional = FunctionalKind::extremal;
  CHECK_NOTHROW(c.validate());
  SimConfig b = basic_config(OffspringSpec::binary_split(0.6), 10);
  b.functional = FunctionalKind::extremal;  // bounded support
  CHECK_THROWS_AS(b.validate(), std::invalid_argument);
}

TEST_CASE("iid functional samples: determinism and monotone extremal paths") {
  IidFunctionalConfig cfg;
  cfg.spec = OffspringSpec::discrete_pareto(2.0);
  cfg.kind = FunctionalKind::extremal;
  cfg.feed_count = 500;
  const auto a = iid_functional_samples(cfg, 200, 1, 9);
  const auto b = iid_functional_samples(cfg, 200, 4, 9);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].statistic == b[i].statistic);
    CHECK(a[i].grid_monotone);
  }
}
