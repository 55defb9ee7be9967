#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gwlimits/engine.hpp"
#include "gwlimits/estimators.hpp"
#include "gwlimits/json_io.hpp"
#include "gwlimits/verify.hpp"

namespace gwlimits {

inline constexpr const char* kArtifactVersion = "1.0.0";

enum class ScenarioId {
  app1_donsker,
  app2_darling_erdos,
  app3_extremal,
  thm2_weighted_sup,
  thm3_ratio,
  lem6_subcritical,
  prop1_deterministic_norm,
  exact_oracle,
};

std::string scenario_name(ScenarioId id);
ScenarioId scenario_from_name(const std::string& name);
std::vector<ScenarioId> all_scenarios();

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Full scenario configuration. Every field serializes, so a parsed config
// always round-trips; `workers` is execution-only and excluded from the
// digest that seeds the reproducibility contract.
struct ScenarioConfig {
  ScenarioId scenario = ScenarioId::exact_oracle;
  std::uint64_t seed = 20260808;
  std::size_t replicates = 10000;
  int workers = 1;

  OffspringSpec offspring = OffspringSpec::binary_split(0.6);
  int horizon = 5;
  RetainRule retain = RetainRule::explicit_count(1);
  ConditionMode condition = ConditionMode::none;
  int proxy_extra_generations = 10;
  std::uint64_t population_cap = 2'000'000'000ULL;
  int grid_resolution = 256;
  std::uint64_t rejection_budget = 4'000'000;
  int plot_grid = 201;

  // app1
  double ks_endpoint_threshold = 0.02;
  double ks_sup_threshold = 0.03;
  double max_abs_correlation = 0.03;
  // app2
  std::vector<std::uint64_t> sweep_feed_counts = {100, 10000, 1000000};
  double sweep_final_threshold = 0.1;
  double sweep_trend_slack = 0.01;
  // app3
  std::uint64_t extremal_feed_count = 10000;
  double decile_tolerance = 0.03;
  // thm2
  LambdaSeq lambda = LambdaSeq::moment(2.0, 1.0);
  std::vector<double> weighted_sup_x = {0.5, 1.0, 2.0, 3.0};
  std::size_t weighted_sup_mc_samples = 1'000'000;
  double weighted_sup_tolerance = 0.005;
  double product_tolerance = 1e-6;
  // thm3
  WeightScheme weights = WeightScheme::all_ones();
  double confidence_level = 0.95;
  double coverage_low = 0.93;
  double coverage_high = 0.97;
  double ks_statistic_threshold = 0.03;
  // lem6
  double mixture_tolerance = 1e-4;
  double grid_low = -3.0;
  double grid_high = 3.0;
  int grid_points = 21;
  double grid_tolerance = 0.02;
  // prop1
  std::vector<double> prop1_thresholds = {-1.0, 0.0, 1.0};
  std::size_t w_sample_count = 100000;
  int w_horizon = 40;
  double prop1_tolerance = 0.02;
  // exact-oracle
  std::size_t pmf_cap = 64;
  double min_checked_probability = 1e-4;
  double se_multiplier = 4.0;

  static ScenarioConfig defaults(ScenarioId id);

  Json to_json() const;
  static ScenarioConfig from_json(const Json& j);
  // FNV-1a over the canonical serialization minus execution-only fields.
  std::string digest() const;

  // Scenario preconditions tied to the limit theorems' hypotheses; throws
  // ConfigError with a diagnostic when violated.
  void validate() const;
};

struct RunManifest {
  std::string config_digest;
  std::uint64_t base_seed = 0;
  std::size_t replicates = 0;
  std::string artifact_version = kArtifactVersion;
  std::map<std::string, std::string> scenario_verdicts;

  Json to_json() const;
};

struct ScenarioOutcome {
  bool pass = false;
  Json statistics;
  Json thresholds;
  RunManifest manifest;
  std::vector<std::filesystem::path> files_written;
};

ScenarioOutcome run_scenario(const ScenarioConfig& config,
                             const std::filesystem::path& out_dir);

// Shared-grid CSV (x, ecdf, reference) spanning the sample range with exactly
// `grid_size` rows. Throws before touching the file when samples are empty.
void emit_plot_data(const Ecdf& ecdf, const ReferenceCdf& reference, int grid_size,
                    const std::filesystem::path& path);

// Batch estimator entry point: trajectory CSV in, RatioEstimate with interval
// out. hypothesized_mean adds the studentized statistic at that mean.
RatioEstimate estimate_from_trajectory_csv(const std::filesystem::path& csv_path,
                                           const WeightScheme& weights, double level,
                                           std::optional<double> hypothesized_mean);

}  // namespace gwlimits
