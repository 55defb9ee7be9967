#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gwlimits/functionals.hpp"
#include "gwlimits/offspring.hpp"
#include "gwlimits/rng.hpp"

namespace gwlimits {

enum class ConditionMode { none, last_parent_positive, survival_proxy };

struct RetainRule {
  enum class Kind { explicit_count, sqrt_floor, pow_floor };
  Kind kind = Kind::sqrt_floor;
  int count = 1;        // explicit r
  double gamma = 0.5;   // floor(n^gamma), gamma < 1

  static RetainRule explicit_count(int r);
  static RetainRule sqrt_floor();
  static RetainRule pow_floor(double gamma);
  int resolve(int horizon) const;
};

struct SimConfig {
  OffspringSpec spec;
  int horizon = 10;  // n
  RetainRule retain{};
  std::uint64_t population_cap = 2'000'000'000ULL;
  ConditionMode condition = ConditionMode::none;
  int proxy_extra_generations = 10;  // K in the survival proxy Z_{n+K} > 0
  std::optional<FunctionalKind> functional{};
  int grid_resolution = 256;  // T
  std::uint64_t rejection_budget = 4'000'000;

  void validate() const;
  int retained() const { return retain.resolve(horizon); }
};

enum class RunVerdict { ok, population_overflow, rejection_budget_exhausted };

// One simulated trajectory plus the finalized per-generation functionals for
// the retained window. Individual draws are never stored.
struct RunRecord {
  std::uint64_t stream_id = 0;
  std::vector<std::uint64_t> trajectory;  // Z_0..Z_n
  std::vector<FunctionalValue> window;    // generations n-r+1..n, oldest first
  int window_first_generation = 0;
  double w_final = 0.0;  // Z_n / m^n
  bool extinct = false;
  std::uint64_t rejections = 0;
  double acceptance_estimate = 1.0;
  RunVerdict verdict = RunVerdict::ok;
};

// Newest generation first; the zero element where the parent count was 0.
MultiGenVector assemble_multigen(const RunRecord& run, int r, FunctionalKind kind);

RunRecord simulate_run(const SimConfig& config, std::uint64_t seed);
RunRecord simulate_run(const SimConfig& config, RngStream attempt_stream);

// Rejection sampling: fresh derived streams until the condition holds.
// Budget exhaustion and overflow surface as the record's verdict.
RunRecord simulate_conditioned(const SimConfig& config, std::uint64_t seed);
RunRecord simulate_conditioned(const SimConfig& config, RngStream replicate_stream);

struct ReplicateFailure {
  std::size_t replicate = 0;
  RunVerdict verdict = RunVerdict::ok;
};

// Column-major ensemble statistics. Replicate i fills row i of every column;
// failed replicates are recorded and their rows dropped in index order, so
// the final state is identical for every worker count.
struct EnsembleResult {
  std::uint64_t base_seed = 0;
  std::size_t requested = 0;
  std::size_t accepted = 0;
  std::uint64_t total_attempts = 0;
  double acceptance_rate = 0.0;
  std::vector<std::string> column_names;
  std::vector<std::vector<double>> columns;
  std::vector<ReplicateFailure> failures;

  std::span<const double> column(const std::string& name) const;
};

using RowExtractor = std::function<void(const RunRecord&, std::span<double>)>;

EnsembleResult run_ensemble(const SimConfig& config, std::uint64_t base_seed,
                            std::size_t replicates, int workers,
                            std::vector<std::string> column_names,
                            const RowExtractor& extract);

// IID-stream mode: k draws from the offspring law feed one accumulator, no
// branching. Used for the per-coordinate law checks at pinned feed counts.
struct IidFunctionalConfig {
  OffspringSpec spec;
  FunctionalKind kind = FunctionalKind::donsker;
  std::uint64_t feed_count = 1000;  // k
  int grid_resolution = 256;
};

struct IidFunctionalSample {
  double statistic = 0.0;      // endpoint / DE statistic / m_k(1)
  bool grid_monotone = true;   // extremal only
};

std::vector<IidFunctionalSample> iid_functional_samples(const IidFunctionalConfig& config,
                                                        std::size_t replicates, int workers,
                                                        std::uint64_t base_seed);

}  // namespace gwlimits
