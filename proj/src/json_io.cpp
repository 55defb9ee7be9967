#include "gwlimits/json_io.hpp"

#include <stdexcept>

#include "gwlimits/csv.hpp"

namespace gwlimits {

namespace {

std::string condition_name(RunVerdict v) {
  switch (v) {
    case RunVerdict::ok:
      return "ok";
    case RunVerdict::population_overflow:
      return "population-overflow";
    case RunVerdict::rejection_budget_exhausted:
      return "rejection-budget-exhausted";
  }
  return "unknown";
}

}  // namespace

Json to_json(const OffspringSpec& spec) {
  Json j;
  switch (spec.family) {
    case OffspringFamily::binary_split:
      j["family"] = "binary-split";
      j["a"] = spec.split_prob;
      break;
    case OffspringFamily::geometric:
      j["family"] = "geometric";
      j["p"] = spec.success_prob;
      break;
    case OffspringFamily::poisson:
      j["family"] = "poisson";
      j["lambda"] = spec.poisson_mean;
      break;
    case OffspringFamily::discrete_pareto:
      j["family"] = "discrete-pareto";
      j["alpha"] = spec.pareto_alpha;
      j["x_min"] = spec.pareto_x_min;
      break;
    case OffspringFamily::explicit_table:
      j["family"] = "explicit-table";
      j["probabilities"] = spec.table;
      break;
  }
  return j;
}

OffspringSpec offspring_from_json(const Json& j) {
  const std::string family = j.at("family").get<std::string>();
  if (family == "binary-split") return OffspringSpec::binary_split(j.at("a").get<double>());
  if (family == "geometric") return OffspringSpec::geometric(j.at("p").get<double>());
  if (family == "poisson") return OffspringSpec::poisson(j.at("lambda").get<double>());
  if (family == "discrete-pareto") {
    return OffspringSpec::discrete_pareto(j.at("alpha").get<double>(),
                                          j.value("x_min", std::uint64_t{1}));
  }
  if (family == "explicit-table") {
    return OffspringSpec::explicit_table(j.at("probabilities").get<std::vector<double>>());
  }
  throw std::invalid_argument("unknown offspring family: " + family);
}

Json to_json(const RetainRule& rule) {
  Json j;
  switch (rule.kind) {
    case RetainRule::Kind::explicit_count:
      j["rule"] = "explicit";
      j["r"] = rule.count;
      break;
    case RetainRule::Kind::sqrt_floor:
      j["rule"] = "sqrt";
      break;
    case RetainRule::Kind::pow_floor:
      j["rule"] = "pow";
      j["gamma"] = rule.gamma;
      break;
  }
  return j;
}

RetainRule retain_from_json(const Json& j) {
  const std::string rule = j.at("rule").get<std::string>();
  if (rule == "explicit") return RetainRule::explicit_count(j.at("r").get<int>());
  if (rule == "sqrt") return RetainRule::sqrt_floor();
  if (rule == "pow") return RetainRule::pow_floor(j.at("gamma").get<double>());
  throw std::invalid_argument("unknown retain rule: " + rule);
}

Json to_json(const LambdaSeq& seq) {
  Json j;
  if (seq.kind == LambdaSeq::Kind::gaussian_tail) {
    j["kind"] = "gaussian-tail";
    j["delta_scale"] = seq.delta_scale;
    j["delta_power"] = seq.delta_power;
  } else {
    j["kind"] = "moment";
    j["rho"] = seq.rho;
    j["delta"] = seq.delta;
  }
  return j;
}

LambdaSeq lambda_from_json(const Json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "gaussian-tail") {
    return LambdaSeq::gaussian_tail(j.value("delta_scale", 1.0), j.value("delta_power", 1.0));
  }
  if (kind == "moment") {
    return LambdaSeq::moment(j.at("rho").get<double>(), j.at("delta").get<double>());
  }
  throw std::invalid_argument("unknown lambda kind: " + kind);
}

Json to_json(const WeightScheme& weights) {
  Json j;
  switch (weights.rule) {
    case WeightScheme::Rule::all_ones:
      j["rule"] = "all-ones";
      break;
    case WeightScheme::Rule::geometric:
      j["rule"] = "geometric";
      j["ratio"] = weights.ratio;
      break;
    case WeightScheme::Rule::finite_list:
      j["rule"] = "finite-list";
      j["values"] = weights.values;
      break;
  }
  j["scale"] = weights.scale;
  return j;
}

WeightScheme weights_from_json(const Json& j) {
  const std::string rule = j.at("rule").get<std::string>();
  const double scale = j.value("scale", 1.0);
  if (rule == "all-ones") return WeightScheme::all_ones(scale);
  if (rule == "geometric") return WeightScheme::geometric(j.at("ratio").get<double>(), scale);
  if (rule == "finite-list") {
    return WeightScheme::finite_list(j.at("values").get<std::vector<double>>(), scale);
  }
  throw std::invalid_argument("unknown weight rule: " + rule);
}

Json to_json(const RunRecord& run) {
  Json j;
  j["stream_id"] = run.stream_id;
  j["trajectory"] = run.trajectory;
  j["w_final"] = run.w_final;
  j["extinct"] = run.extinct;
  j["rejections"] = run.rejections;
  j["acceptance_estimate"] = run.acceptance_estimate;
  j["verdict"] = condition_name(run.verdict);
  j["window_first_generation"] = run.window_first_generation;
  j["window_size"] = run.window.size();
  return j;
}

Json to_json(const EnsembleResult& ensemble, bool include_columns) {
  Json j;
  j["base_seed"] = ensemble.base_seed;
  j["requested"] = ensemble.requested;
  j["accepted"] = ensemble.accepted;
  j["total_attempts"] = ensemble.total_attempts;
  j["acceptance_rate"] = ensemble.acceptance_rate;
  j["columns"] = ensemble.column_names;
  Json failures = Json::array();
  for (const auto& f : ensemble.failures) {
    failures.push_back({{"replicate", f.replicate}, {"verdict", condition_name(f.verdict)}});
  }
  j["failures"] = failures;
  if (include_columns) {
    Json data;
    for (std::size_t c = 0; c < ensemble.column_names.size(); ++c) {
      data[ensemble.column_names[c]] = ensemble.columns[c];
    }
    j["data"] = data;
  }
  return j;
}

Json to_json(const KsReport& report) {
  return Json{{"distance", report.distance},
              {"samples", report.sample_count},
              {"threshold", report.threshold},
              {"pass", report.pass},
              {"reference", report.reference_id}};
}

Json to_json(const IndependenceReport& report) {
  Json pairs = Json::array();
  for (std::size_t i = 0; i < report.pairs.size(); ++i) {
    pairs.push_back({{"a", report.pairs[i].first},
                     {"b", report.pairs[i].second},
                     {"correlation", report.correlations[i]}});
  }
  return Json{{"pairs", pairs},
              {"max_abs_correlation", report.max_abs_correlation},
              {"samples", report.sample_count},
              {"zero_variance_columns", report.zero_variance_columns}};
}

Json to_json(const SweepReport& report) {
  Json rows = Json::array();
  for (const auto& row : report.rows) {
    Json r;
    r["horizon"] = row.horizon;
    r["simulated"] = row.simulated;
    if (row.simulated) {
      r["ks"] = to_json(row.ks);
    } else {
      r["note"] = row.note;
    }
    rows.push_back(std::move(r));
  }
  return Json{{"rows", rows},
              {"trend_nonincreasing", report.trend_nonincreasing},
              {"trend_slack", report.trend_slack},
              {"all_simulated", report.all_simulated}};
}

Json to_json(const MeanInterval& interval) {
  return Json{{"lower", interval.lower},
              {"upper", interval.upper},
              {"level", interval.level},
              {"mean_estimate", interval.mean_estimate},
              {"sigma2_estimate", interval.sigma2_estimate},
              {"lambda_sq_estimate", interval.lambda_sq_estimate},
              {"quantile", interval.quantile}};
}

Json to_json(const RatioEstimate& estimate) {
  Json j;
  j["weighted_numerator"] = estimate.weighted_numerator;
  j["weighted_denominator"] = estimate.weighted_denominator;
  j["mean_estimate"] = estimate.mean_estimate;
  j["studentized"] = estimate.studentized;
  j["reference_mean"] = estimate.reference_mean;
  j["kappa"] = estimate.kappa_theta.kappa;
  j["theta"] = estimate.kappa_theta.theta;
  j["theta_residual"] = estimate.kappa_theta.residual;
  j["lambda_sq"] = estimate.lambda_sq;
  if (estimate.interval.has_value()) j["interval"] = to_json(*estimate.interval);
  return j;
}

std::string pmf_to_csv(const PmfVector& pmf) {
  CsvWriter csv({"k", "probability"});
  for (std::size_t i = 0; i < pmf.probs.size(); ++i) {
    csv.add_row({static_cast<double>(pmf.offset + static_cast<std::int64_t>(i)), pmf.probs[i]});
  }
  return csv.content();
}

namespace {

std::string grid_csv(const std::vector<double>& grid) {
  CsvWriter csv({"t", "value"});
  const double steps = grid.size() > 1 ? static_cast<double>(grid.size() - 1) : 1.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    csv.add_row({static_cast<double>(i) / steps, grid[i]});
  }
  return csv.content();
}

double coordinate_scalar(const FunctionalValue& v) {
  struct Visitor {
    double operator()(const PathFunctional& p) const { return p.endpoint; }
    double operator()(const DarlingErdosValue& d) const { return d.statistic; }
    double operator()(const ExtremalPath& e) const { return e.value_at_one(); }
  };
  return std::visit(Visitor{}, v);
}

}  // namespace

std::string path_grid_to_csv(const PathFunctional& path) { return grid_csv(path.grid); }

std::string path_grid_to_csv(const ExtremalPath& path) { return grid_csv(path.grid); }

std::string multigen_to_csv(const MultiGenVector& vec) {
  CsvWriter csv({"coordinate", "value", "sup_norm"});
  for (std::size_t i = 0; i < vec.coords.size(); ++i) {
    csv.add_row({static_cast<double>(i + 1), coordinate_scalar(vec.coords[i]),
                 functional_sup_norm(vec.coords[i])});
  }
  return csv.content();
}

std::string cdf_curve_to_csv(const ReferenceCdf& cdf, double lo, double hi, int points) {
  if (points < 2) throw std::invalid_argument("cdf_curve_to_csv: need at least two points");
  if (!(hi > lo)) throw std::invalid_argument("cdf_curve_to_csv: empty range");
  CsvWriter csv({"x", "F(x)"});
  for (int i = 0; i < points; ++i) {
    const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
    csv.add_row({x, cdf(x)});
  }
  return csv.content();
}

}  // namespace gwlimits
