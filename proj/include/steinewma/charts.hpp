#pragma once

#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "steinewma/distributions.hpp"

namespace steinewma {

enum class WeightKind { Linear, Root, Inverse, ShiftedPmf, Table };

// Behaviour of a tabulated weight past its last entry.
enum class TailRule { None, Hold, Zero };

/*!
 * Nonnegative weight f: N0 -> R used inside the Stein moments.
 *
 *   Linear      |x - 1|
 *   Root        |x - 1|^(1/4)
 *   Inverse     1 / (x + 1)
 *   ShiftedPmf  p0(x + shift), p0 the in-control pmf
 *   Table       explicit values with a tail rule
 */
class WeightFunction {
 public:
  static WeightFunction linear();
  static WeightFunction root();
  static WeightFunction inverse();
  static WeightFunction shifted_pmf(CountDistribution base, int shift = 2);
  static WeightFunction table(std::vector<double> values, TailRule tail = TailRule::None);

  WeightKind kind() const { return kind_; }
  std::string name() const;

  double operator()(long x) const {
    if (x >= 0 && static_cast<std::size_t>(x) < cache_->size()) return (*cache_)[x];
    return evaluate(x);
  }

 private:
  WeightFunction(WeightKind kind) : kind_(kind) {}
  double evaluate(long x) const;
  void fill_cache();

  WeightKind kind_;
  int shift_ = 0;
  std::optional<CountDistribution> base_;
  std::shared_ptr<const std::vector<double>> values_;
  TailRule tail_ = TailRule::None;
  std::shared_ptr<const std::vector<double>> cache_;
};

double weight_eval(const WeightFunction& f, long x);

enum class ChartKind { Shewhart, Ewma, SteinPoisson, SteinNegBinomial, SteinBinomial };

std::string_view chart_kind_name(ChartKind kind);
bool is_stein(ChartKind kind);
// The Stein chart matching an in-control family (Poisson, NegBinomial, Binomial).
ChartKind stein_kind_for(Family family);

struct ControlLimits {
  double lower;
  double upper;

  static ControlLimits symmetric(double center, double half_width) {
    return {center - half_width, center + half_width};
  }
  static ControlLimits unbounded() {
    return {-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  }
};

// In-control starting values of the A, B, C statistics.
struct SteinBaselines {
  double a0;
  double b0;
  double c0;
};

// A0 = E0[X f(X)], C0 = mu0 and B0 = E0[f(X+1)] (Poisson),
// E0[(nu+X) f(X+1)] (NegBinomial) or E0[(n-X) f(X+1)] (Binomial), by summation.
SteinBaselines stein_baselines(ChartKind kind, const CountDistribution& in_control,
                               const WeightFunction& weight);

inline constexpr double kDefaultLambda = 0.10;

/*!
 * Immutable chart definition. All in-control quantities (mu0, nu, n and the
 * Stein baselines) are fixed at construction.
 */
class ChartDesign {
 public:
  static ChartDesign shewhart(CountDistribution in_control, ControlLimits limits);
  static ChartDesign ewma(CountDistribution in_control, double lambda, ControlLimits limits);
  static ChartDesign ewma_symmetric(CountDistribution in_control, double lambda, double half_width);
  static ChartDesign stein(ChartKind kind, CountDistribution in_control, WeightFunction weight,
                           double lambda, ControlLimits limits);
  // Kind inferred from the in-control family; limits 1 -/+ half_width.
  static ChartDesign stein_symmetric(CountDistribution in_control, WeightFunction weight,
                                     double lambda, double half_width);

  ChartDesign with_limits(ControlLimits limits) const;
  ChartDesign with_half_width(double half_width) const;

  ChartKind kind() const { return kind_; }
  double lambda() const { return lambda_; }
  const CountDistribution& in_control() const { return in_control_; }
  const std::optional<WeightFunction>& weight() const { return weight_; }
  const ControlLimits& limits() const { return limits_; }
  const SteinBaselines& baselines() const { return baselines_; }
  double in_control_mean() const { return mean0_; }
  // mu0 for Shewhart/EWMA, 1 for Stein charts.
  double center() const;
  std::string describe() const;

  // Parameters the statistic depends on (nu for NB, n for Bin, 0 otherwise).
  double size() const { return size_; }
  int trials() const { return trials_; }

 private:
  ChartDesign(ChartKind kind, CountDistribution in_control) : kind_(kind), in_control_(std::move(in_control)) {}
  void validate_limits() const;

  ChartKind kind_;
  double lambda_ = 1.0;
  CountDistribution in_control_;
  std::optional<WeightFunction> weight_;
  ControlLimits limits_ = ControlLimits::unbounded();
  SteinBaselines baselines_{0.0, 0.0, 0.0};
  double mean0_ = 0.0;
  double size_ = 0.0;
  int trials_ = 0;
};

struct ChartState {
  long t = 0;
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double z = 0.0;
};

struct ChartStep {
  ChartState state;
  double z;
  bool alarm;
};

ChartState init_chart(const ChartDesign& design);

// Applies one observation. Throws DataError for negative counts and for
// counts above n on a binomial Stein chart.
ChartStep update(const ChartDesign& design, const ChartState& state, long x);

struct SeriesRecord {
  long t;
  long count;
  double z;
  bool alarm;
};

struct SeriesResult {
  std::vector<SeriesRecord> records;
  std::optional<long> first_alarm;
};

SeriesResult run_series(const ChartDesign& design, std::span<const long> series);

}  // namespace steinewma
