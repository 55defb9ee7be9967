// Acceptance suite: one statistical gate per criterion, fixed seeds, pinned
// tolerances. Run with no arguments for all criteria or pass criterion
// numbers (1-10). Prints one PASS/FAIL line per criterion; exits nonzero if
// any executed criterion fails.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "gwlimits/scenarios.hpp"
#include "oracles.hpp"

using namespace gwlimits;

namespace {

struct CriterionResult {
  bool pass = false;
  std::string detail;
};

int default_workers() {
  return std::max(1u, std::thread::hardware_concurrency());
}

std::filesystem::path out_dir(int criterion) {
  const auto dir = std::filesystem::temp_directory_path() /
                   ("gwlimits_acceptance_" + std::to_string(criterion));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.5g", v);
  return buf;
}

// --- criterion 1: exact-oracle agreement ----------------------------------

CriterionResult criterion_1() {
  ScenarioConfig config = ScenarioConfig::defaults(ScenarioId::exact_oracle);
  config.workers = default_workers();
  const ScenarioOutcome outcome = run_scenario(config, out_dir(1));
  CriterionResult r;
  r.pass = outcome.pass;
  r.detail = "binary-split a=0.6, n=5, 1e6 replicates: worst gap " +
             fmt(outcome.statistics.at("worst_gap_se_units").get<double>()) +
             " binomial SE (<= 4) over " +
             std::to_string(outcome.statistics.at("checked_support_points").get<std::size_t>()) +
             " support points";
  return r;
}

// --- criterion 2: critical survival asymptotics ---------------------------

CriterionResult criterion_2() {
  const OffspringSpec spec = OffspringSpec::geometric(0.5);  // m = 1, sigma^2 = 2
  CriterionResult r;
  double worst = 0.0;
  for (int n = 0; n <= 100; ++n) {
    const double expected = 1.0 / (static_cast<double>(n) + 1.0);
    worst = std::max(worst, std::fabs(survival_prob(spec, n) - expected));
  }
  const double n_p = 100.0 * survival_prob(spec, 100);
  const double limit = 2.0 / 2.0;  // 2 / sigma^2
  const double rel = std::fabs(n_p - limit) / limit;
  r.pass = worst <= 1e-10 && rel <= 0.01;
  r.detail = "geometric p=1/2: max |P(Z_n>0) - 1/(n+1)| = " + fmt(worst) +
             " (<= 1e-10); n P(Z_n>0) at n=100 off 2/sigma^2 by " + fmt(100.0 * rel) + "%";
  return r;
}

// --- criterion 3: functional CLT coordinates ------------------------------

CriterionResult criterion_3() {
  ScenarioConfig config = ScenarioConfig::defaults(ScenarioId::app1_donsker);
  config.workers = default_workers();
  const ScenarioOutcome outcome = run_scenario(config, out_dir(3));
  double worst_endpoint = 0.0;
  double worst_sup = 0.0;
  for (const auto& coord : outcome.statistics.at("coordinates")) {
    worst_endpoint = std::max(worst_endpoint,
                              coord.at("ks_endpoint").at("distance").get<double>());
    worst_sup = std::max(worst_sup, coord.at("ks_sup").at("distance").get<double>());
  }
  const double corr =
      outcome.statistics.at("independence").at("max_abs_correlation").get<double>();
  CriterionResult r;
  r.pass = outcome.pass;
  r.detail = "poisson(1.5), n=30, r=5, 5e4 accepted: endpoint KS " + fmt(worst_endpoint) +
             " (<= 0.02), sup KS " + fmt(worst_sup) + " (<= 0.03), max |corr| " + fmt(corr) +
             " (<= 0.03)";
  return r;
}

// --- criterion 4: Darling-Erdos formula + slow Gumbel trend ---------------

CriterionResult criterion_4() {
  // one-pass statistic equals brute-force recomputation, k up to 1e4
  RngStream rng(1048576);
  OffspringSampler sampler(OffspringSpec::geometric(0.5));
  double worst_rel = 0.0;
  for (int rep = 0; rep < 25; ++rep) {
    const std::uint64_t k = rep == 0 ? 10000 : 1 + rng.next_u64() % 10000;
    std::vector<double> draws(k);
    DarlingErdosAccumulator acc(k, 1.0);
    RngStream draw_stream = rng.derived(rep);
    for (auto& d : draws) {
      d = static_cast<double>(sampler.draw(draw_stream));
      acc.feed(d);
    }
    const double sigma = std::sqrt(2.0);
    const double one_pass = acc.finalize(sigma).raw_max;
    const double brute = oracles::brute_darling_erdos_raw_max(draws, 1.0, sigma);
    worst_rel = std::max(worst_rel,
                         std::fabs(one_pass - brute) / std::max(1.0, std::fabs(brute)));
  }
  const bool formula_ok = worst_rel <= 1e-12;

  ScenarioConfig config = ScenarioConfig::defaults(ScenarioId::app2_darling_erdos);
  config.workers = default_workers();
  const ScenarioOutcome outcome = run_scenario(config, out_dir(4));
  std::string distances;
  for (const auto& row : outcome.statistics.at("sweep").at("rows")) {
    distances += fmt(row.at("ks").at("distance").get<double>()) + " ";
  }
  CriterionResult r;
  r.pass = formula_ok && outcome.pass;
  r.detail = "one-pass vs brute force rel err " + fmt(worst_rel) +
             " (<= 1e-12); Gumbel KS at k=1e2,1e4,1e6: " + distances +
             "(nonincreasing within 0.01, final <= 0.1)";
  return r;
}

// --- criterion 5: extremal marginal ----------------------------------------

CriterionResult criterion_5() {
  ScenarioConfig config = ScenarioConfig::defaults(ScenarioId::app3_extremal);
  config.workers = default_workers();
  const ScenarioOutcome outcome = run_scenario(config, out_dir(5));
  double worst = 0.0;
  for (const auto& d : outcome.statistics.at("deciles")) {
    worst = std::max(worst, d.at("gap").get<double>());
  }
  CriterionResult r;
  r.pass = outcome.pass;
  r.detail = "discrete-pareto alpha=2, k=1e4, 1e4 replicates: max decile gap " + fmt(worst) +
             " (<= 0.03), monotone paths " +
             (outcome.statistics.at("all_paths_monotone").get<bool>() ? "all" : "VIOLATED");
  return r;
}

// --- criterion 6: weighted-ratio CLT and coverage --------------------------

CriterionResult criterion_6() {
  ScenarioConfig config = ScenarioConfig::defaults(ScenarioId::thm3_ratio);
  config.workers = default_workers();
  const ScenarioOutcome outcome = run_scenario(config, out_dir(6));
  CriterionResult r;
  r.pass = outcome.pass;
  r.detail = "geometric m=2, all-ones, n=25, proxy K=10, 2e4 accepted: X_n KS " +
             fmt(outcome.statistics.at("ks_statistic").at("distance").get<double>()) +
             " (<= 0.03) vs N(0,6); coverage " +
             fmt(outcome.statistics.at("coverage").get<double>()) + " (in [0.93, 0.97])";
  return r;
}

// --- criterion 7: subcritical mixture --------------------------------------

CriterionResult criterion_7() {
  ScenarioConfig config = ScenarioConfig::defaults(ScenarioId::lem6_subcritical);
  config.workers = default_workers();
  const ScenarioOutcome outcome = run_scenario(config, out_dir(7));
  double worst = 0.0;
  for (const auto& g : outcome.statistics.at("grid")) {
    worst = std::max(worst, g.at("gap").get<double>());
  }
  CriterionResult r;
  r.pass = outcome.pass;
  r.detail = "linear-fractional m=1/2, n=30, 5e4 accepted: max |ecdf - mixture| " + fmt(worst) +
             " (<= 0.02) over 21 grid points in [-3,3]";
  return r;
}

// --- criterion 8: deterministic-normalizer mixture -------------------------

CriterionResult criterion_8() {
  ScenarioConfig config = ScenarioConfig::defaults(ScenarioId::prop1_deterministic_norm);
  config.workers = default_workers();
  const ScenarioOutcome outcome = run_scenario(config, out_dir(8));
  double worst = 0.0;
  for (const auto& g : outcome.statistics.at("grid")) {
    worst = std::max(worst, g.at("gap").get<double>());
  }
  CriterionResult r;
  r.pass = outcome.pass;
  r.detail = "binary-split a=0.6, l=2, n=30, 3x3 grid, 1e5 W-samples at N=40: max gap " +
             fmt(worst) + " (<= 0.02)";
  return r;
}

// --- criterion 9: weighted-sup product law vs Monte Carlo ------------------

CriterionResult criterion_9() {
  ScenarioConfig config = ScenarioConfig::defaults(ScenarioId::thm2_weighted_sup);
  config.workers = default_workers();
  const ScenarioOutcome outcome = run_scenario(config, out_dir(9));
  double worst = 0.0;
  for (const auto& p : outcome.statistics.at("points")) {
    worst = std::max(worst, p.at("gap").get<double>());
  }
  CriterionResult r;
  r.pass = outcome.pass;
  r.detail = "lambda_j = 1/j, 1e6 samples at x in {0.5, 1, 2, 3}: max |product - MC| " +
             fmt(worst) + " (<= 0.005)";
  return r;
}

// --- criterion 10: determinism across worker counts ------------------------

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

CriterionResult criterion_10() {
  CriterionResult r;
#ifndef GWLIMITS_CLI_PATH
  r.detail = "CLI path not configured";
  return r;
#else
  const auto base = out_dir(10);
  const auto config_path = base / "config.json";
  {
    ScenarioConfig config = ScenarioConfig::defaults(ScenarioId::thm3_ratio);
    config.horizon = 15;
    config.replicates = 2000;
    config.ks_statistic_threshold = 0.08;
    config.coverage_low = 0.90;
    config.coverage_high = 0.99;
    std::ofstream out(config_path);
    out << config.to_json().dump(2) << "\n";
  }
  const auto dir_a = base / "w1";
  const auto dir_b = base / "w8";
  const std::string cli = GWLIMITS_CLI_PATH;
  const std::string cmd_a = cli + " --config " + config_path.string() +
                            " --seed 31415 --workers 1 --out " + dir_a.string() +
                            " > /dev/null 2>&1";
  const std::string cmd_b = cli + " --config " + config_path.string() +
                            " --seed 31415 --workers 8 --out " + dir_b.string() +
                            " > /dev/null 2>&1";
  const int rc_a = std::system(cmd_a.c_str());
  const int rc_b = std::system(cmd_b.c_str());
  if (rc_a != rc_b) {
    r.detail = "exit codes differ across worker counts";
    return r;
  }

  std::size_t compared = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir_a)) {
    const auto name = entry.path().filename();
    const auto other = dir_b / name;
    if (!std::filesystem::exists(other)) {
      r.detail = "file set differs: " + name.string();
      return r;
    }
    if (slurp(entry.path()) != slurp(other)) {
      r.detail = "byte mismatch in " + name.string();
      return r;
    }
    ++compared;
  }
  r.pass = compared > 0;
  r.detail = "thm3-ratio rerun with workers 1 vs 8: " + std::to_string(compared) +
             " output files byte-identical";
  return r;
#endif
}

CriterionResult run_criterion(int n) {
  switch (n) {
    case 1: return criterion_1();
    case 2: return criterion_2();
    case 3: return criterion_3();
    case 4: return criterion_4();
    case 5: return criterion_5();
    case 6: return criterion_6();
    case 7: return criterion_7();
    case 8: return criterion_8();
    case 9: return criterion_9();
    case 10: return criterion_10();
    default: return {false, "unknown criterion"};
  }
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> which;
  for (int i = 1; i < argc; ++i) which.push_back(std::atoi(argv[i]));
  if (which.empty()) {
    for (int i = 1; i <= 10; ++i) which.push_back(i);
  }
  bool all_pass = true;
  for (int n : which) {
    CriterionResult result;
    try {
      result = run_criterion(n);
    } catch (const std::exception& e) {
      result.pass = false;
      result.detail = std::string("exception: ") + e.what();
    }
    std::printf("[criterion %2d] %s  %s\n", n, result.pass ? "PASS" : "FAIL",
                result.detail.c_str());
    std::fflush(stdout);
    all_pass = all_pass && result.pass;
  }
  return all_pass ? 0 : 1;
}
