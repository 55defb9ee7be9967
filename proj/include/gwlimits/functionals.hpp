#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace gwlimits {

enum class FunctionalKind { donsker, darling_erdos, extremal };

std::string functional_kind_name(FunctionalKind kind);

// Scaled partial-sum path of one generation's centered offspring draws:
// piecewise linear through (j/k, S_j/(sigma sqrt k)). sup/inf/sup_abs are
// exact (extrema sit at breakpoints); grid holds samples at t = i/T.
struct PathFunctional {
  std::uint64_t feed_count = 0;  // k
  double endpoint = 0.0;
  double sup = 0.0;
  double inf = 0.0;
  double sup_abs = 0.0;
  std::vector<double> grid;
  bool zero = false;

  static PathFunctional zero_element(int grid_resolution);
};

// Darling-Erdos statistic a_k * max_{j<=k} S_j/(sigma sqrt j) - b_k with
// a_k = sqrt(2 LL k), b_k = 2 LL k + LLL k / 2 - log(4 pi) / 2 and
// L t = log(t v e), so every k >= 1 is well defined.
struct DarlingErdosValue {
  std::uint64_t feed_count = 0;
  double statistic = 0.0;
  double raw_max = 0.0;  // max_j S_j / (sigma sqrt j), before centering
  bool zero = false;

  static DarlingErdosValue zero_element();
};

// Normalized running-maximum step path: 0 on [0, 1/k), max{0, xi_1..xi_j}/a_k
// on [j/k, (j+1)/k), and the full-sample value from t = 1 on. grid[i] samples
// t = i/T; grid.back() is the t >= 1 value.
struct ExtremalPath {
  std::uint64_t feed_count = 0;
  double normalizer = 0.0;  // a_k
  std::vector<double> grid;
  bool zero = false;

  double value_at_one() const { return grid.empty() ? 0.0 : grid.back(); }
  static ExtremalPath zero_element(int grid_resolution);
};

using FunctionalValue = std::variant<PathFunctional, DarlingErdosValue, ExtremalPath>;

bool functional_is_zero(const FunctionalValue& v);
// Supremum norm of the coordinate in its own space (path sup-abs, |scalar|,
// step-path top value).
double functional_sup_norm(const FunctionalValue& v);

// ---------------------------------------------------------------------------
// Streaming accumulators. Construct with the feed count k known up front,
// feed exactly k draws, then finalize. Individual draws are never stored.

class DonskerAccumulator {
 public:
  DonskerAccumulator(std::uint64_t k, double mean, int grid_resolution);
  void feed(double draw);
  PathFunctional finalize(double sigma) const;
  std::uint64_t fed() const { return fed_; }

 private:
  void fill_grid(std::uint64_t j, double centered);

  std::uint64_t k_;
  double mean_;
  int grid_n_;
  std::uint64_t fed_ = 0;
  double sum_ = 0.0;      // running sum of (xi - m)
  double max_ = 0.0;      // max over breakpoints, including S_0 = 0
  double min_ = 0.0;
  std::vector<double> grid_raw_;
  std::size_t next_grid_ = 0;
  std::uint64_t grid_trigger_ = 1;  // smallest j whose segment holds a grid point
};

class DarlingErdosAccumulator {
 public:
  explicit DarlingErdosAccumulator(std::uint64_t k, double mean);
  void feed(double draw);
  DarlingErdosValue finalize(double sigma) const;
  std::uint64_t fed() const { return fed_; }

 private:
  std::uint64_t k_;
  double mean_;
  std::uint64_t fed_ = 0;
  double sum_ = 0.0;
  double max_scaled_ = 0.0;  // max_j S_j / sqrt(j); sigma applied at finalize
  bool any_ = false;
};

class ExtremalAccumulator {
 public:
  ExtremalAccumulator(std::uint64_t k, int grid_resolution);
  void feed(double draw);
  ExtremalPath finalize(double normalizer) const;
  std::uint64_t fed() const { return fed_; }

 private:
  void fill_grid(std::uint64_t j);

  std::uint64_t k_;
  int grid_n_;
  std::uint64_t fed_ = 0;
  double running_max_ = 0.0;  // floored at 0
  std::vector<double> grid_raw_;
  std::size_t next_grid_ = 0;
  std::uint64_t grid_trigger_ = 0;
};

// ---------------------------------------------------------------------------
// Weight sequences for the weighted-sup norm.

struct LambdaSeq {
  enum class Kind { gaussian_tail, moment };

  Kind kind = Kind::moment;
  // gaussian-tail: lambda_j = (delta_j log(j+3))^{-1/2}, delta_j = scale * j^power.
  double delta_scale = 1.0;
  double delta_power = 1.0;
  // moment: lambda_j = j^{-(1+delta)/rho}.
  double rho = 2.0;
  double delta = 1.0;

  static LambdaSeq gaussian_tail(double scale = 1.0, double power = 1.0);
  static LambdaSeq moment(double rho, double delta);

  void validate() const;
  double value(std::uint64_t j) const;
  std::string describe() const;
};

double lambda_value(const LambdaSeq& seq, std::uint64_t j);

// sup_j lambda_j * sup_norms[j-1] over the supplied coordinates (the vector
// is zero beyond them).
double q_lambda(std::span<const double> sup_norms, const LambdaSeq& seq);

// Product-metric distance: sum_{k<=K} 2^-k d_k/(1+d_k) plus a guaranteed
// truncation bound of 2^-K.
struct DInfinityResult {
  double value = 0.0;
  double error_bound = 0.0;
};
DInfinityResult d_infinity(std::span<const double> coordinate_distances);

// ---------------------------------------------------------------------------
// Multi-generation vector: newest generation first, zero element where the
// parent generation was empty.

struct MultiGenVector {
  FunctionalKind kind = FunctionalKind::donsker;
  std::vector<FunctionalValue> coords;  // coords[0] = generation n

  std::size_t size() const { return coords.size(); }
  std::vector<double> sup_norms() const;
};

}  // namespace gwlimits
