#pragma once

#include <json.hpp>

#include "gwlimits/engine.hpp"
#include "gwlimits/estimators.hpp"
#include "gwlimits/offspring.hpp"
#include "gwlimits/verify.hpp"

namespace gwlimits {

using Json = nlohmann::json;

Json to_json(const OffspringSpec& spec);
OffspringSpec offspring_from_json(const Json& j);

Json to_json(const RetainRule& rule);
RetainRule retain_from_json(const Json& j);

Json to_json(const LambdaSeq& seq);
LambdaSeq lambda_from_json(const Json& j);

Json to_json(const WeightScheme& weights);
WeightScheme weights_from_json(const Json& j);

Json to_json(const RunRecord& run);
Json to_json(const EnsembleResult& ensemble, bool include_columns = false);
Json to_json(const KsReport& report);
Json to_json(const IndependenceReport& report);
Json to_json(const SweepReport& report);
Json to_json(const RatioEstimate& estimate);
Json to_json(const MeanInterval& interval);

// PmfVector CSV export (columns: k, probability).
std::string pmf_to_csv(const PmfVector& pmf);

// Grid samples of one path functional (columns: t, value).
std::string path_grid_to_csv(const PathFunctional& path);
std::string path_grid_to_csv(const ExtremalPath& path);

// Multi-generation vector, newest coordinate first (columns: coordinate,
// value, sup_norm); value is the coordinate's scalar summary (endpoint,
// statistic, or the t >= 1 level).
std::string multigen_to_csv(const MultiGenVector& vec);

// Reference CDF sampled on a uniform grid (columns: x, F(x)).
std::string cdf_curve_to_csv(const ReferenceCdf& cdf, double lo, double hi, int points);

}  // namespace gwlimits
