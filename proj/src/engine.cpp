#include "gwlimits/engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace gwlimits {

namespace {

// Stream-key tags. Generation k uses key k; bookkeeping draws use keys past
// any valid generation index so they can never collide with one.
constexpr std::uint64_t kProxyStreamKey = 1ULL << 40;

struct EngineContext {
  MomentSummary mom;
  OffspringSampler sampler;
  double proxy_extinction_within_k = 0.0;  // f_K(0)
  bool proxy_ready = false;

  explicit EngineContext(const SimConfig& config)
      : mom(moments(config.spec)), sampler(config.spec) {
    if (config.condition == ConditionMode::survival_proxy) {
      proxy_extinction_within_k =
          pgf_compose(config.spec, config.proxy_extra_generations, 0.0);
      proxy_ready = true;
    }
  }
};

double sigma_or_throw(const MomentSummary& mom) {
  if (!mom.variance.has_value() || !(*mom.variance > 0.0)) {
    throw std::invalid_argument("engine: functional requires offspring variance in (0, infinity)");
  }
  return std::sqrt(*mom.variance);
}

FunctionalValue finalize_zero(FunctionalKind kind, int grid_resolution) {
  switch (kind) {
    case FunctionalKind::donsker:
      return PathFunctional::zero_element(grid_resolution);
    case FunctionalKind::darling_erdos:
      return DarlingErdosValue::zero_element();
    case FunctionalKind::extremal:
      return ExtremalPath::zero_element(grid_resolution);
  }
  throw std::logic_error("unknown functional kind");
}

// Streams one generation of z_prev draws through the requested accumulator.
// Returns the generation total; overflow leaves the total past the cap for
// the caller to flag.
std::uint64_t stream_generation(FunctionalKind kind, const SimConfig& config,
                                EngineContext& ctx, std::uint64_t z_prev,
                                RngStream& gen_stream, double sigma,
                                FunctionalValue& out_value, bool& overflowed) {
  std::uint64_t total = 0;
  overflowed = false;
  switch (kind) {
    case FunctionalKind::donsker: {
      DonskerAccumulator acc(z_prev, ctx.mom.mean, config.grid_resolution);
      for (std::uint64_t j = 0; j < z_prev; ++j) {
        const std::uint64_t xi = ctx.sampler.draw(gen_stream);
        acc.feed(static_cast<double>(xi));
        total += xi;
        if (total > config.population_cap) {
          overflowed = true;
          return total;
        }
      }
      out_value = acc.finalize(sigma);
      return total;
    }
    case FunctionalKind::darling_erdos: {
      DarlingErdosAccumulator acc(z_prev, ctx.mom.mean);
      for (std::uint64_t j = 0; j < z_prev; ++j) {
        const std::uint64_t xi = ctx.sampler.draw(gen_stream);
        acc.feed(static_cast<double>(xi));
        total += xi;
        if (total > config.population_cap) {
          overflowed = true;
          return total;
        }
      }
      out_value = acc.finalize(sigma);
      return total;
    }
    case FunctionalKind::extremal: {
      ExtremalAccumulator acc(z_prev, config.grid_resolution);
      for (std::uint64_t j = 0; j < z_prev; ++j) {
        const std::uint64_t xi = ctx.sampler.draw(gen_stream);
        acc.feed(static_cast<double>(xi));
        total += xi;
        if (total > config.population_cap) {
          overflowed = true;
          return total;
        }
      }
      // a_k exists only from the smallest index with a positive quantile;
      // a generation too small to normalize yields the zero element.
      if (z_prev >= extremal_norm_min_index(config.spec)) {
        out_value = acc.finalize(extremal_norm(config.spec, z_prev));
      } else {
        out_value = finalize_zero(kind, config.grid_resolution);
      }
      return total;
    }
  }
  throw std::logic_error("unknown functional kind");
}

// One unconditioned attempt. `early_stop_generation`: once the population is
// extinct at or before this index the caller's condition can never hold, so
// the attempt bails out with the remaining generations zero-filled.
RunRecord simulate_attempt(const SimConfig& config, EngineContext& ctx,
                           RngStream attempt_stream, int early_stop_generation) {
  const int n = config.horizon;
  const int r = config.retained();
  const double sigma = (config.functional == FunctionalKind::donsker ||
                        config.functional == FunctionalKind::darling_erdos)
                           ? sigma_or_throw(ctx.mom)
                           : 0.0;

  RunRecord run;
  run.stream_id = attempt_stream.id();
  run.trajectory.assign(static_cast<std::size_t>(n) + 1, 0);
  run.trajectory[0] = 1;
  run.window_first_generation = n - r + 1;

  for (int k = 1; k <= n; ++k) {
    const std::uint64_t z_prev = run.trajectory[k - 1];
    const bool in_window = config.functional.has_value() && k >= run.window_first_generation;
    if (z_prev == 0) {
      run.trajectory[k] = 0;
      if (in_window) {
        run.window.push_back(finalize_zero(*config.functional, config.grid_resolution));
      }
      continue;
    }
    RngStream gen_stream = attempt_stream.derived(static_cast<std::uint64_t>(k));
    std::uint64_t z_next = 0;
    if (in_window) {
      bool overflowed = false;
      FunctionalValue value = finalize_zero(*config.functional, config.grid_resolution);
      z_next = stream_generation(*config.functional, config, ctx, z_prev, gen_stream, sigma,
                                 value, overflowed);
      if (overflowed) {
        run.verdict = RunVerdict::population_overflow;
        return run;
      }
      run.window.push_back(std::move(value));
    } else {
      z_next = ctx.sampler.draw_sum(z_prev, gen_stream);
      if (z_next > config.population_cap) {
        run.verdict = RunVerdict::population_overflow;
        return run;
      }
    }
    run.trajectory[k] = z_next;
    if (z_next == 0 && k <= early_stop_generation) {
      // Extinct before the condition's reference generation: reject early.
      break;
    }
  }

  run.extinct = run.trajectory[static_cast<std::size_t>(n)] == 0;
  const double mn = std::pow(ctx.mom.mean, static_cast<double>(n));
  run.w_final = static_cast<double>(run.trajectory[static_cast<std::size_t>(n)]) / mn;
  return run;
}

bool condition_holds(const SimConfig& config, EngineContext& ctx, const RunRecord& run,
                     RngStream& attempt_stream) {
  switch (config.condition) {
    case ConditionMode::none:
      return true;
    case ConditionMode::last_parent_positive:
      return run.trajectory[static_cast<std::size_t>(config.horizon) - 1] > 0;
    case ConditionMode::survival_proxy: {
      const std::uint64_t z_n = run.trajectory[static_cast<std::size_t>(config.horizon)];
      if (z_n == 0) return false;
      // Z_{n+K} > 0 given Z_n = z is a Bernoulli with failure probability
      // f_K(0)^z: each of the z lines dies within K generations independently.
      const double q_k = ctx.proxy_extinction_within_k;
      if (q_k <= 0.0) return true;
      const double die_all = std::exp(static_cast<double>(z_n) * std::log(q_k));
      RngStream proxy = attempt_stream.derived(kProxyStreamKey);
      return proxy.next_unit() >= die_all;
    }
  }
  return true;
}

int early_stop_for(const SimConfig& config) {
  switch (config.condition) {
    case ConditionMode::none:
      return 0;
    case ConditionMode::last_parent_positive:
      return config.horizon - 1;
    case ConditionMode::survival_proxy:
      return config.horizon;
  }
  return 0;
}

RunRecord conditioned_with_context(const SimConfig& config, EngineContext& ctx,
                                   RngStream replicate_stream) {
  if (config.condition == ConditionMode::none) {
    return simulate_attempt(config, ctx, replicate_stream.derived(0), 0);
  }
  const int early = early_stop_for(config);
  for (std::uint64_t attempt = 0; attempt < config.rejection_budget; ++attempt) {
    RngStream attempt_stream = replicate_stream.derived(attempt);
    RunRecord run = simulate_attempt(config, ctx, attempt_stream, early);
    if (run.verdict == RunVerdict::population_overflow) {
      run.rejections = attempt;
      return run;
    }
    if (condition_holds(config, ctx, run, attempt_stream)) {
      run.rejections = attempt;
      run.acceptance_estimate = 1.0 / static_cast<double>(attempt + 1);
      return run;
    }
  }
  RunRecord failed;
  failed.stream_id = replicate_stream.id();
  failed.verdict = RunVerdict::rejection_budget_exhausted;
  failed.rejections = config.rejection_budget;
  failed.acceptance_estimate = 1.0 / static_cast<double>(config.rejection_budget + 1);
  return failed;
}

}  // namespace

RetainRule RetainRule::explicit_count(int r) {
  RetainRule rule;
  rule.kind = Kind::explicit_count;
  rule.count = r;
  return rule;
}

RetainRule RetainRule::sqrt_floor() { return RetainRule{}; }

RetainRule RetainRule::pow_floor(double gamma) {
  RetainRule rule;
  rule.kind = Kind::pow_floor;
  rule.gamma = gamma;
  return rule;
}

int RetainRule::resolve(int horizon) const {
  switch (kind) {
    case Kind::explicit_count:
      return count;
    case Kind::sqrt_floor:
      return std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(horizon)))));
    case Kind::pow_floor:
      return std::max(1, static_cast<int>(
                             std::floor(std::pow(static_cast<double>(horizon), gamma))));
  }
  return 1;
}

void SimConfig::validate() const {
  spec.validate();
  if (horizon < 1) throw std::invalid_argument("sim config: horizon must be >= 1");
  const int r = retained();
  if (r < 1 || r > horizon) {
    throw std::invalid_argument("sim config: retained generations must satisfy 1 <= r <= n");
  }
  if (retain.kind == RetainRule::Kind::pow_floor && !(retain.gamma < 1.0 && retain.gamma > 0.0)) {
    throw std::invalid_argument("sim config: retain exponent must lie in (0,1)");
  }
  if (population_cap < 1) throw std::invalid_argument("sim config: population cap must be >= 1");
  if (grid_resolution < 1) throw std::invalid_argument("sim config: grid resolution must be >= 1");
  if (condition == ConditionMode::survival_proxy && proxy_extra_generations < 1) {
    throw std::invalid_argument("sim config: survival proxy needs K >= 1");
  }
  if (functional == FunctionalKind::donsker || functional == FunctionalKind::darling_erdos) {
    sigma_or_throw(moments(spec));
  }
  if (functional == FunctionalKind::extremal && spec.bounded_support()) {
    throw std::invalid_argument("sim config: extremal functional needs unbounded offspring support");
  }
}

MultiGenVector assemble_multigen(const RunRecord& run, int r, FunctionalKind kind) {
  if (static_cast<std::size_t>(r) > run.window.size()) {
    throw std::invalid_argument("assemble_multigen: run retains fewer generations than requested");
  }
  MultiGenVector out;
  out.kind = kind;
  out.coords.reserve(static_cast<std::size_t>(r));
  for (int i = 0; i < r; ++i) {
    out.coords.push_back(run.window[run.window.size() - 1 - static_cast<std::size_t>(i)]);
  }
  return out;
}

RunRecord simulate_run(const SimConfig& config, std::uint64_t seed) {
  return simulate_run(config, RngStream(seed));
}

RunRecord simulate_run(const SimConfig& config, RngStream attempt_stream) {
  config.validate();
  EngineContext ctx(config);
  return simulate_attempt(config, ctx, attempt_stream, 0);
}

RunRecord simulate_conditioned(const SimConfig& config, std::uint64_t seed) {
  return simulate_conditioned(config, RngStream(seed));
}

RunRecord simulate_conditioned(const SimConfig& config, RngStream replicate_stream) {
  config.validate();
  EngineContext ctx(config);
  return conditioned_with_context(config, ctx, replicate_stream);
}

std::span<const double> EnsembleResult::column(const std::string& name) const {
  for (std::size_t i = 0; i < column_names.size(); ++i) {
    if (column_names[i] == name) return columns[i];
  }
  throw std::out_of_range("ensemble column not found: " + name);
}

EnsembleResult run_ensemble(const SimConfig& config, std::uint64_t base_seed,
                            std::size_t replicates, int workers,
                            std::vector<std::string> column_names,
                            const RowExtractor& extract) {
  config.validate();
  if (replicates < 1) throw std::invalid_argument("run_ensemble: need at least one replicate");
  const std::size_t width = column_names.size();

  std::vector<double> rows(replicates * width, 0.0);
  std::vector<std::uint64_t> attempts(replicates, 0);
  std::vector<RunVerdict> verdicts(replicates, RunVerdict::ok);

  const int worker_count =
      std::max(1, std::min<int>(workers, static_cast<int>(replicates)));
  RngStream base(base_seed);

  auto work = [&](std::size_t lo, std::size_t hi) {
    EngineContext ctx(config);
    for (std::size_t i = lo; i < hi; ++i) {
      RunRecord run = conditioned_with_context(config, ctx, base.derived(i));
      verdicts[i] = run.verdict;
      attempts[i] = run.rejections + (run.verdict == RunVerdict::rejection_budget_exhausted ? 0 : 1);
      if (run.verdict == RunVerdict::ok) {
        extract(run, std::span<double>(rows.data() + i * width, width));
      }
    }
  };

  if (worker_count == 1) {
    work(0, replicates);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(worker_count));
    const std::size_t chunk = (replicates + worker_count - 1) / worker_count;
    for (int w = 0; w < worker_count; ++w) {
      const std::size_t lo = static_cast<std::size_t>(w) * chunk;
      const std::size_t hi = std::min(replicates, lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back(work, lo, hi);
    }
    for (auto& t : pool) t.join();
  }

  EnsembleResult out;
  out.base_seed = base_seed;
  out.requested = replicates;
  out.column_names = std::move(column_names);
  out.columns.assign(width, {});
  for (std::size_t i = 0; i < replicates; ++i) {
    out.total_attempts += attempts[i];
    if (verdicts[i] == RunVerdict::ok) {
      ++out.accepted;
      for (std::size_t c = 0; c < width; ++c) out.columns[c].push_back(rows[i * width + c]);
    } else {
      out.failures.push_back({i, verdicts[i]});
    }
  }
  out.acceptance_rate = out.total_attempts > 0
                            ? static_cast<double>(out.accepted) /
                                  static_cast<double>(out.total_attempts)
                            : 0.0;
  return out;
}

std::vector<IidFunctionalSample> iid_functional_samples(const IidFunctionalConfig& config,
                                                        std::size_t replicates, int workers,
                                                        std::uint64_t base_seed) {
  config.spec.validate();
  if (config.feed_count < 1) throw std::invalid_argument("iid functional: feed count >= 1");
  const MomentSummary mom = moments(config.spec);
  double sigma = 0.0;
  double normalizer = 0.0;
  if (config.kind == FunctionalKind::donsker || config.kind == FunctionalKind::darling_erdos) {
    sigma = sigma_or_throw(mom);
  } else {
    normalizer = extremal_norm(config.spec, config.feed_count);
  }

  std::vector<IidFunctionalSample> out(replicates);
  const int worker_count =
      std::max(1, std::min<int>(workers, static_cast<int>(replicates)));
  RngStream base(base_seed);

  auto work = [&](std::size_t lo, std::size_t hi) {
    OffspringSampler sampler(config.spec);
    for (std::size_t i = lo; i < hi; ++i) {
      RngStream stream = base.derived(i);
      IidFunctionalSample& sample = out[i];
      switch (config.kind) {
        case FunctionalKind::donsker: {
          DonskerAccumulator acc(config.feed_count, mom.mean, config.grid_resolution);
          for (std::uint64_t j = 0; j < config.feed_count; ++j) {
            acc.feed(static_cast<double>(sampler.draw(stream)));
          }
          sample.statistic = acc.finalize(sigma).endpoint;
          break;
        }
        case FunctionalKind::darling_erdos: {
          DarlingErdosAccumulator acc(config.feed_count, mom.mean);
          for (std::uint64_t j = 0; j < config.feed_count; ++j) {
            acc.feed(static_cast<double>(sampler.draw(stream)));
          }
          sample.statistic = acc.finalize(sigma).statistic;
          break;
        }
        case FunctionalKind::extremal: {
          ExtremalAccumulator acc(config.feed_count, config.grid_resolution);
          for (std::uint64_t j = 0; j < config.feed_count; ++j) {
            acc.feed(static_cast<double>(sampler.draw(stream)));
          }
          const ExtremalPath path = acc.finalize(normalizer);
          sample.statistic = path.value_at_one();
          sample.grid_monotone = std::is_sorted(path.grid.begin(), path.grid.end());
          break;
        }
      }
    }
  };

  if (worker_count == 1) {
    work(0, replicates);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (replicates + worker_count - 1) / worker_count;
    for (int w = 0; w < worker_count; ++w) {
      const std::size_t lo = static_cast<std::size_t>(w) * chunk;
      const std::size_t hi = std::min(replicates, lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back(work, lo, hi);
    }
    for (auto& t : pool) t.join();
  }
  return out;
}

}  // namespace gwlimits
