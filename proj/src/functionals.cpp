#include "gwlimits/functionals.hpp"

#include <algorithm>
#include <cmath>

namespace gwlimits {

namespace {

constexpr double kLog4Pi = 2.5310242469692907930;  // log(4 pi)

// Lt = log(t v e): never below 1, so LL and LLL stay defined for all k >= 1.
double log_floored(double t) { return std::log(std::max(t, 2.718281828459045235360287)); }

}  // namespace

std::string functional_kind_name(FunctionalKind kind) {
  switch (kind) {
    case FunctionalKind::donsker:
      return "donsker";
    case FunctionalKind::darling_erdos:
      return "darling-erdos";
    case FunctionalKind::extremal:
      return "extremal";
  }
  return "functional";
}

PathFunctional PathFunctional::zero_element(int grid_resolution) {
  PathFunctional p;
  p.zero = true;
  p.grid.assign(static_cast<std::size_t>(grid_resolution) + 1, 0.0);
  return p;
}

DarlingErdosValue DarlingErdosValue::zero_element() {
  DarlingErdosValue v;
  v.zero = true;
  return v;
}

ExtremalPath ExtremalPath::zero_element(int grid_resolution) {
  ExtremalPath p;
  p.zero = true;
  p.grid.assign(static_cast<std::size_t>(grid_resolution) + 1, 0.0);
  return p;
}

bool functional_is_zero(const FunctionalValue& v) {
  return std::visit([](const auto& x) { return x.zero; }, v);
}

double functional_sup_norm(const FunctionalValue& v) {
  struct Visitor {
    double operator()(const PathFunctional& p) const { return p.sup_abs; }
    double operator()(const DarlingErdosValue& d) const { return std::fabs(d.statistic); }
    double operator()(const ExtremalPath& e) const { return e.value_at_one(); }
  };
  return std::visit(Visitor{}, v);
}

// ---------------------------------------------------------------------------
// Donsker accumulator

DonskerAccumulator::DonskerAccumulator(std::uint64_t k, double mean, int grid_resolution)
    : k_(k), mean_(mean), grid_n_(grid_resolution) {
  if (k == 0) throw std::invalid_argument("DonskerAccumulator: feed count must be >= 1");
  if (grid_resolution < 1) throw std::invalid_argument("DonskerAccumulator: grid resolution >= 1");
  grid_raw_.assign(static_cast<std::size_t>(grid_resolution) + 1, 0.0);
}

void DonskerAccumulator::feed(double draw) {
  const std::uint64_t j = ++fed_;
  const double centered = draw - mean_;
  if (j >= grid_trigger_) fill_grid(j, centered);
  sum_ += centered;
  if (sum_ > max_) max_ = sum_;
  if (sum_ < min_) min_ = sum_;
}

// Grid points t = g/T with floor(t k) = j - 1 interpolate on this segment;
// the trigger is the smallest j whose segment contains the next grid point,
// so the common feed path pays one predictable compare.
void DonskerAccumulator::fill_grid(std::uint64_t j, double centered) {
  const std::uint64_t t_count = static_cast<std::uint64_t>(grid_n_);
  while (next_grid_ < grid_raw_.size() - 1 &&
         static_cast<std::uint64_t>(next_grid_) * k_ < j * t_count) {
    const double tk = static_cast<double>(next_grid_) * static_cast<double>(k_) /
                      static_cast<double>(t_count);
    grid_raw_[next_grid_] = sum_ + (tk - static_cast<double>(j - 1)) * centered;
    ++next_grid_;
  }
  grid_trigger_ = next_grid_ < grid_raw_.size() - 1
                      ? static_cast<std::uint64_t>(next_grid_) * k_ / t_count + 1
                      : k_ + 1;
}

PathFunctional DonskerAccumulator::finalize(double sigma) const {
  if (fed_ != k_) throw std::logic_error("DonskerAccumulator: feed count mismatch");
  if (!(sigma > 0.0)) throw std::invalid_argument("DonskerAccumulator: sigma must be positive");
  PathFunctional out;
  out.feed_count = k_;
  const double scale = 1.0 / (sigma * std::sqrt(static_cast<double>(k_)));
  out.endpoint = sum_ * scale;
  out.sup = max_ * scale;
  out.inf = min_ * scale;
  out.sup_abs = std::max(max_, -min_) * scale;
  out.grid.resize(grid_raw_.size());
  for (std::size_t i = 0; i + 1 < grid_raw_.size(); ++i) out.grid[i] = grid_raw_[i] * scale;
  out.grid.back() = out.endpoint;  // t = 1 exactly
  return out;
}

// ---------------------------------------------------------------------------
// Darling-Erdos accumulator

DarlingErdosAccumulator::DarlingErdosAccumulator(std::uint64_t k, double mean)
    : k_(k), mean_(mean) {
  if (k == 0) throw std::invalid_argument("DarlingErdosAccumulator: feed count must be >= 1");
}

void DarlingErdosAccumulator::feed(double draw) {
  const std::uint64_t j = ++fed_;
  sum_ += draw - mean_;
  const double scaled = sum_ / std::sqrt(static_cast<double>(j));
  if (!any_ || scaled > max_scaled_) {
    max_scaled_ = scaled;
    any_ = true;
  }
}

DarlingErdosValue DarlingErdosAccumulator::finalize(double sigma) const {
  if (fed_ != k_) throw std::logic_error("DarlingErdosAccumulator: feed count mismatch");
  if (!(sigma > 0.0)) throw std::invalid_argument("DarlingErdosAccumulator: sigma must be positive");
  const double kd = static_cast<double>(k_);
  const double llk = log_floored(log_floored(kd));
  const double lllk = log_floored(llk);
  const double a_k = std::sqrt(2.0 * llk);
  const double b_k = 2.0 * llk + 0.5 * lllk - 0.5 * kLog4Pi;
  DarlingErdosValue out;
  out.feed_count = k_;
  out.raw_max = max_scaled_ / sigma;
  out.statistic = a_k * out.raw_max - b_k;
  return out;
}

// ---------------------------------------------------------------------------
// Extremal accumulator

ExtremalAccumulator::ExtremalAccumulator(std::uint64_t k, int grid_resolution)
    : k_(k), grid_n_(grid_resolution) {
  if (k == 0) throw std::invalid_argument("ExtremalAccumulator: feed count must be >= 1");
  if (grid_resolution < 1) throw std::invalid_argument("ExtremalAccumulator: grid resolution >= 1");
  grid_raw_.assign(static_cast<std::size_t>(grid_resolution) + 1, 0.0);
  fill_grid(0);  // grid points in [0, 1/k) carry the value 0
}

void ExtremalAccumulator::feed(double draw) {
  const std::uint64_t j = ++fed_;
  if (draw > running_max_) running_max_ = draw;
  if (j >= grid_trigger_) fill_grid(j);
}

// Grid points t = g/T with floor(t k) = j take the value max{0, xi_1..xi_j}.
void ExtremalAccumulator::fill_grid(std::uint64_t j) {
  const std::uint64_t t_count = static_cast<std::uint64_t>(grid_n_);
  while (next_grid_ < grid_raw_.size() &&
         static_cast<std::uint64_t>(next_grid_) * k_ < (j + 1) * t_count) {
    grid_raw_[next_grid_++] = running_max_;
  }
  grid_trigger_ = next_grid_ < grid_raw_.size()
                      ? static_cast<std::uint64_t>(next_grid_) * k_ / t_count
                      : k_ + 1;
}

ExtremalPath ExtremalAccumulator::finalize(double normalizer) const {
  if (fed_ != k_) throw std::logic_error("ExtremalAccumulator: feed count mismatch");
  if (!(normalizer > 0.0)) throw std::invalid_argument("ExtremalAccumulator: a_k must be positive");
  ExtremalPath out;
  out.feed_count = k_;
  out.normalizer = normalizer;
  out.grid.resize(grid_raw_.size());
  for (std::size_t i = 0; i < grid_raw_.size(); ++i) out.grid[i] = grid_raw_[i] / normalizer;
  return out;
}

// ---------------------------------------------------------------------------
// Lambda sequences

LambdaSeq LambdaSeq::gaussian_tail(double scale, double power) {
  LambdaSeq s;
  s.kind = Kind::gaussian_tail;
  s.delta_scale = scale;
  s.delta_power = power;
  s.validate();
  return s;
}

LambdaSeq LambdaSeq::moment(double rho, double delta) {
  LambdaSeq s;
  s.kind = Kind::moment;
  s.rho = rho;
  s.delta = delta;
  s.validate();
  return s;
}

void LambdaSeq::validate() const {
  if (kind == Kind::gaussian_tail) {
    if (!(delta_scale > 0.0) || !(delta_power > 0.0)) {
      throw std::invalid_argument("lambda sequence: delta_j rule must be positive and diverging");
    }
  } else {
    if (!(rho > 0.0) || !(delta > 0.0)) {
      throw std::invalid_argument("lambda sequence: rho and delta must be positive");
    }
  }
}

double LambdaSeq::value(std::uint64_t j) const {
  if (j == 0) throw std::invalid_argument("lambda sequence: index starts at 1");
  const double jd = static_cast<double>(j);
  if (kind == Kind::gaussian_tail) {
    const double delta_j = delta_scale * std::pow(jd, delta_power);
    return 1.0 / std::sqrt(delta_j * std::log(jd + 3.0));
  }
  return std::pow(jd, -(1.0 + delta) / rho);
}

std::string LambdaSeq::describe() const {
  if (kind == Kind::gaussian_tail) {
    return "gaussian-tail(scale=" + std::to_string(delta_scale) +
           ",power=" + std::to_string(delta_power) + ")";
  }
  return "moment(rho=" + std::to_string(rho) + ",delta=" + std::to_string(delta) + ")";
}

double lambda_value(const LambdaSeq& seq, std::uint64_t j) {
  seq.validate();
  return seq.value(j);
}

double q_lambda(std::span<const double> sup_norms, const LambdaSeq& seq) {
  seq.validate();
  double best = 0.0;
  for (std::size_t i = 0; i < sup_norms.size(); ++i) {
    const double v = seq.value(i + 1) * sup_norms[i];
    if (v > best) best = v;
  }
  return best;
}

DInfinityResult d_infinity(std::span<const double> coordinate_distances) {
  DInfinityResult out;
  double weight = 1.0;
  for (double d : coordinate_distances) {
    weight *= 0.5;
    out.value += weight * d / (1.0 + d);
  }
  out.error_bound = coordinate_distances.empty() ? 1.0 : weight;
  return out;
}

std::vector<double> MultiGenVector::sup_norms() const {
  std::vector<double> out;
  out.reserve(coords.size());
  for (const auto& c : coords) out.push_back(functional_sup_norm(c));
  return out;
}

}  // namespace gwlimits
