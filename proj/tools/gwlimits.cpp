// gwlimits: scenario runner for branching-process limit-law verification.
//
// Exit codes: 0 pass, 1 runtime error, 2 statistical fail, 3 invalid config.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "gwlimits/csv.hpp"
#include "gwlimits/json_io.hpp"
#include "gwlimits/scenarios.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitRuntimeError = 1;
constexpr int kExitStatisticalFail = 2;
constexpr int kExitInvalidConfig = 3;

gwlimits::WeightScheme parse_weights(const std::string& text) {
  if (text == "all-ones") return gwlimits::WeightScheme::all_ones();
  if (text.rfind("geometric:", 0) == 0) {
    return gwlimits::WeightScheme::geometric(std::stod(text.substr(10)));
  }
  if (text.rfind("list:", 0) == 0) {
    std::vector<double> values;
    std::string rest = text.substr(5);
    std::size_t pos = 0;
    while (pos < rest.size()) {
      std::size_t comma = rest.find(',', pos);
      if (comma == std::string::npos) comma = rest.size();
      values.push_back(std::stod(rest.substr(pos, comma - pos)));
      pos = comma + 1;
    }
    return gwlimits::WeightScheme::finite_list(values);
  }
  throw gwlimits::ConfigError("unrecognized weights: '" + text +
                              "' (use all-ones, geometric:<ratio>, or list:<b1,b2,...>)");
}

int run_estimate_mode(const std::string& csv_path, const std::string& weights_text,
                      double level, std::optional<double> mean,
                      const std::filesystem::path& out_dir) {
  const gwlimits::WeightScheme weights = parse_weights(weights_text);
  const gwlimits::RatioEstimate est = gwlimits::estimate_from_trajectory_csv(
      csv_path, weights, level, mean);
  std::filesystem::create_directories(out_dir);
  const auto out_path = out_dir / "estimate.json";
  gwlimits::write_text_file(out_path, gwlimits::to_json(est).dump(2) + "\n");
  std::cout << "estimate written to " << out_path.string() << "\n"
            << gwlimits::to_json(est).dump(2) << "\n";
  return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Galton-Watson multi-generation limit-law laboratory"};

  std::string scenario_id;
  std::string config_path;
  std::optional<std::uint64_t> seed_flag;
  std::optional<std::size_t> replicates_flag;
  std::optional<int> workers_flag;
  std::string out_dir = "out";
  std::optional<int> plot_grid_flag;
  std::string estimate_csv;
  std::string weights_text = "all-ones";
  double level = 0.95;
  std::optional<double> hypothesized_mean;

  app.add_option("--scenario", scenario_id,
                 "scenario id (app1-donsker, app2-darling-erdos, app3-extremal, "
                 "thm2-weighted-sup, thm3-ratio, lem6-subcritical, "
                 "prop1-deterministic-norm, exact-oracle)");
  app.add_option("--config", config_path, "JSON config file; flags override its fields");
  app.add_option("--seed", seed_flag, "base seed (fallback: GWLIMITS_SEED env var)");
  app.add_option("--replicates", replicates_flag, "replicate count");
  app.add_option("--workers", workers_flag, "worker thread count (0 = hardware)");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--grid", plot_grid_flag, "plot-data grid size");
  app.add_option("--estimate-csv", estimate_csv,
                 "trajectory CSV (generation,Z) for batch mean estimation");
  app.add_option("--weights", weights_text,
                 "weight scheme for estimation: all-ones | geometric:<r> | list:<b1,b2,...>");
  app.add_option("--level", level, "confidence level for estimation mode");
  app.add_option("--mean", hypothesized_mean,
                 "hypothesized mean: adds the studentized statistic in estimation mode");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalidConfig;
  }

  try {
    if (!estimate_csv.empty()) {
      return run_estimate_mode(estimate_csv, weights_text, level, hypothesized_mean, out_dir);
    }

    gwlimits::Json config_json;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) {
        std::cerr << "error: cannot open config file " << config_path << "\n";
        return kExitInvalidConfig;
      }
      try {
        in >> config_json;
      } catch (const gwlimits::Json::exception& e) {
        std::cerr << "invalid config: " << config_path << ": " << e.what() << "\n";
        return kExitInvalidConfig;
      }
    }
    if (!scenario_id.empty()) config_json["scenario"] = scenario_id;
    if (!config_json.contains("scenario")) {
      std::cerr << "error: no scenario given (use --scenario or a config file)\n";
      return kExitInvalidConfig;
    }

    gwlimits::ScenarioConfig config = gwlimits::ScenarioConfig::from_json(config_json);
    if (seed_flag.has_value()) {
      config.seed = *seed_flag;
    } else if (!config_json.contains("seed")) {
      if (const char* env = std::getenv("GWLIMITS_SEED")) {
        config.seed = std::strtoull(env, nullptr, 10);
      }
    }
    if (replicates_flag.has_value()) config.replicates = *replicates_flag;
    if (workers_flag.has_value()) config.workers = *workers_flag;
    if (config.workers <= 0) {
      config.workers = std::max(1u, std::thread::hardware_concurrency());
    }
    if (plot_grid_flag.has_value()) config.plot_grid = *plot_grid_flag;

    config.validate();
    const gwlimits::ScenarioOutcome outcome = gwlimits::run_scenario(config, out_dir);
    std::cout << gwlimits::scenario_name(config.scenario) << ": "
              << (outcome.pass ? "PASS" : "FAIL") << "  (digest " << config.digest()
              << ", seed " << config.seed << ", replicates " << config.replicates << ")\n";
    for (const auto& f : outcome.files_written) std::cout << "  wrote " << f.string() << "\n";
    return outcome.pass ? kExitPass : kExitStatisticalFail;
  } catch (const gwlimits::ConfigError& e) {
    std::cerr << "invalid config: " << e.what() << "\n";
    return kExitInvalidConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid config: " << e.what() << "\n";
    return kExitInvalidConfig;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return kExitRuntimeError;
  }
}
