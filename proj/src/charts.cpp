#include "steinewma/charts.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "steinewma/errors.hpp"

namespace steinewma {

namespace {

constexpr std::size_t kWeightCacheSize = 256;

}  // namespace

WeightFunction WeightFunction::linear() {
  WeightFunction f(WeightKind::Linear);
  f.fill_cache();
  return f;
}

WeightFunction WeightFunction::root() {
  WeightFunction f(WeightKind::Root);
  f.fill_cache();
  return f;
}

WeightFunction WeightFunction::inverse() {
  WeightFunction f(WeightKind::Inverse);
  f.fill_cache();
  return f;
}

WeightFunction WeightFunction::shifted_pmf(CountDistribution base, int shift) {
  if (shift < 0) throw ParameterError("pmf shift must be >= 0");
  WeightFunction f(WeightKind::ShiftedPmf);
  f.base_ = std::move(base);
  f.shift_ = shift;
  f.fill_cache();
  return f;
}

WeightFunction WeightFunction::table(std::vector<double> values, TailRule tail) {
  if (values.empty()) throw ParameterError("weight table must not be empty");
  for (double v : values) {
    if (!(std::isfinite(v) && v >= 0.0)) throw ParameterError("weight table values must be finite and >= 0");
  }
  const bool constant = std::all_of(values.begin(), values.end(), [&](double v) { return v == values[0]; }) &&
                        (tail == TailRule::Hold || (tail == TailRule::Zero && values[0] == 0.0) ||
                         (tail == TailRule::None && values.size() == 1));
  if (constant) throw ParameterError("weight function must not be constant");
  const bool zero_on_positive =
      std::all_of(values.begin() + 1, values.end(), [](double v) { return v == 0.0; }) &&
      (tail != TailRule::Hold || values.back() == 0.0);
  if (zero_on_positive) throw ParameterError("weight function must not vanish on all x >= 1");
  WeightFunction f(WeightKind::Table);
  f.values_ = std::make_shared<const std::vector<double>>(std::move(values));
  f.tail_ = tail;
  f.fill_cache();
  return f;
}

double WeightFunction::evaluate(long x) const {
  if (x < 0) throw DataError("weight function evaluated at a negative count");
  switch (kind_) {
    case WeightKind::Linear:
      return std::abs(static_cast<double>(x) - 1.0);
    case WeightKind::Root:
      return std::pow(std::abs(static_cast<double>(x) - 1.0), 0.25);
    case WeightKind::Inverse:
      return 1.0 / (static_cast<double>(x) + 1.0);
    case WeightKind::ShiftedPmf:
      return base_->pmf(x + shift_);
    case WeightKind::Table: {
      const auto& v = *values_;
      if (static_cast<std::size_t>(x) < v.size()) return v[x];
      switch (tail_) {
        case TailRule::Hold: return v.back();
        case TailRule::Zero: return 0.0;
        case TailRule::None: break;
      }
      throw DataError("weight table has no entry for x = " + std::to_string(x));
    }
  }
  return 0.0;
}

void WeightFunction::fill_cache() {
  std::size_t size = kWeightCacheSize;
  if (kind_ == WeightKind::Table && tail_ == TailRule::None) size = values_->size();
  auto cache = std::make_shared<std::vector<double>>(size);
  for (std::size_t x = 0; x < size; ++x) (*cache)[x] = evaluate(static_cast<long>(x));
  cache_ = std::move(cache);
}

std::string WeightFunction::name() const {
  switch (kind_) {
    case WeightKind::Linear: return "linear";
    case WeightKind::Root: return "root";
    case WeightKind::Inverse: return "inverse";
    case WeightKind::ShiftedPmf: return "shifted-pmf(" + std::to_string(shift_) + ")";
    case WeightKind::Table: return "table";
  }
  return "?";
}

double weight_eval(const WeightFunction& f, long x) {
  if (x < 0) throw DataError("weight function evaluated at a negative count");
  return f(x);
}

std::string_view chart_kind_name(ChartKind kind) {
  switch (kind) {
    case ChartKind::Shewhart: return "shewhart";
    case ChartKind::Ewma: return "ewma";
    case ChartKind::SteinPoisson: return "stein-poisson";
    case ChartKind::SteinNegBinomial: return "stein-negbinomial";
    case ChartKind::SteinBinomial: return "stein-binomial";
  }
  return "?";
}

bool is_stein(ChartKind kind) {
  return kind == ChartKind::SteinPoisson || kind == ChartKind::SteinNegBinomial ||
         kind == ChartKind::SteinBinomial;
}

ChartKind stein_kind_for(Family family) {
  switch (family) {
    case Family::Poisson: return ChartKind::SteinPoisson;
    case Family::NegBinomial: return ChartKind::SteinNegBinomial;
    case Family::Binomial: return ChartKind::SteinBinomial;
    default: break;
  }
  throw ParameterError("Stein charts require a Poisson, NegBinomial or Binomial in-control model, got " +
                       std::string(family_name(family)));
}

SteinBaselines stein_baselines(ChartKind kind, const CountDistribution& in_control,
                               const WeightFunction& weight) {
  if (!is_stein(kind)) throw ParameterError("stein_baselines requires a Stein chart kind");
  if (stein_kind_for(in_control.family()) != kind) {
    throw ParameterError(std::string(chart_kind_name(kind)) + " does not match in-control family " +
                         std::string(family_name(in_control.family())));
  }
  double size = 0.0;
  int n = 0;
  if (kind == ChartKind::SteinNegBinomial) size = std::get<NegBinomialParams>(in_control.params()).size;
  if (kind == ChartKind::SteinBinomial) n = std::get<BinomialParams>(in_control.params()).trials;

  const auto pmf = in_control.tabulated_pmf();
  long double a = 0.0L;
  long double b = 0.0L;
  for (std::size_t i = 0; i < pmf.size(); ++i) {
    const long x = static_cast<long>(i);
    const double p = pmf[i];
    a += static_cast<long double>(x) * weight(x) * p;
    double factor = 1.0;
    if (kind == ChartKind::SteinNegBinomial) factor = size + x;
    if (kind == ChartKind::SteinBinomial) factor = n - x;
    b += static_cast<long double>(factor) * weight(x + 1) * p;
  }
  return {static_cast<double>(a), static_cast<double>(b), in_control.moments().mean};
}

ChartDesign ChartDesign::shewhart(CountDistribution in_control, ControlLimits limits) {
  ChartDesign d(ChartKind::Shewhart, std::move(in_control));
  d.mean0_ = d.in_control_.moments().mean;
  d.limits_ = limits;
  d.validate_limits();
  return d;
}

ChartDesign ChartDesign::ewma(CountDistribution in_control, double lambda, ControlLimits limits) {
  if (!(lambda > 0.0 && lambda <= 1.0)) throw ParameterError("EWMA smoothing must lie in (0,1]");
  ChartDesign d(ChartKind::Ewma, std::move(in_control));
  d.lambda_ = lambda;
  d.mean0_ = d.in_control_.moments().mean;
  d.limits_ = limits;
  d.validate_limits();
  return d;
}

ChartDesign ChartDesign::ewma_symmetric(CountDistribution in_control, double lambda, double half_width) {
  const double mean0 = in_control.moments().mean;
  return ewma(std::move(in_control), lambda, ControlLimits::symmetric(mean0, half_width));
}

ChartDesign ChartDesign::stein(ChartKind kind, CountDistribution in_control, WeightFunction weight,
                               double lambda, ControlLimits limits) {
  if (!is_stein(kind)) throw ParameterError("ChartDesign::stein requires a Stein chart kind");
  // lambda = 1 would let B_t hit zero whenever f(x_t + 1) = 0.
  if (!(lambda > 0.0 && lambda < 1.0)) throw ParameterError("Stein EWMA smoothing must lie in (0,1)");
  const SteinBaselines base = stein_baselines(kind, in_control, weight);
  ChartDesign d(kind, std::move(in_control));
  d.lambda_ = lambda;
  d.weight_ = std::move(weight);
  d.baselines_ = base;
  d.mean0_ = base.c0;
  if (kind == ChartKind::SteinNegBinomial) d.size_ = std::get<NegBinomialParams>(d.in_control_.params()).size;
  if (kind == ChartKind::SteinBinomial) d.trials_ = std::get<BinomialParams>(d.in_control_.params()).trials;
  if (!(base.b0 > 0.0 && base.c0 > 0.0)) throw ParameterError("Stein baselines B0 and C0 must be positive");
  d.limits_ = limits;
  d.validate_limits();
  return d;
}

ChartDesign ChartDesign::stein_symmetric(CountDistribution in_control, WeightFunction weight,
                                         double lambda, double half_width) {
  const ChartKind kind = stein_kind_for(in_control.family());
  return stein(kind, std::move(in_control), std::move(weight), lambda,
               ControlLimits::symmetric(1.0, half_width));
}

ChartDesign ChartDesign::with_limits(ControlLimits limits) const {
  ChartDesign d = *this;
  d.limits_ = limits;
  d.validate_limits();
  return d;
}

ChartDesign ChartDesign::with_half_width(double half_width) const {
  return with_limits(ControlLimits::symmetric(center(), half_width));
}

double ChartDesign::center() const { return is_stein(kind_) ? 1.0 : mean0_; }

void ChartDesign::validate_limits() const {
  if (std::isnan(limits_.lower) || std::isnan(limits_.upper)) throw ParameterError("control limits must not be NaN");
  if (kind_ == ChartKind::Shewhart) {
    if (!(limits_.lower <= limits_.upper)) throw ParameterError("Shewhart limits require LCL <= UCL");
    return;
  }
  const double c = center();
  if (!(limits_.lower < c && c < limits_.upper)) throw ParameterError("control limits require LCL < center < UCL");
}

std::string ChartDesign::describe() const {
  std::ostringstream os;
  os.precision(10);
  os << chart_kind_name(kind_);
  if (weight_) os << '[' << weight_->name() << ']';
  if (kind_ != ChartKind::Shewhart) os << " lambda=" << lambda_;
  os << " limits=(" << limits_.lower << ", " << limits_.upper << ") in-control " << in_control_.describe();
  return os.str();
}

ChartState init_chart(const ChartDesign& design) {
  ChartState s;
  switch (design.kind()) {
    case ChartKind::Shewhart:
    case ChartKind::Ewma:
      s.z = design.in_control_mean();
      break;
    default: {
      const auto& base = design.baselines();
      s.a = base.a0;
      s.b = base.b0;
      s.c = base.c0;
      s.z = 1.0;
    }
  }
  return s;
}

ChartStep update(const ChartDesign& design, const ChartState& state, long x) {
  if (x < 0) throw DataError("negative count " + std::to_string(x));
  if (const auto n = design.in_control().upper_bound(); n && x > *n) {
    throw DataError("count " + std::to_string(x) + " exceeds n = " + std::to_string(*n));
  }
  ChartState next = state;
  next.t = state.t + 1;
  const double lambda = design.lambda();
  const double keep = 1.0 - lambda;
  const double xd = static_cast<double>(x);
  switch (design.kind()) {
    case ChartKind::Shewhart:
      next.z = xd;
      break;
    case ChartKind::Ewma:
      next.z = lambda * xd + keep * state.z;
      break;
    case ChartKind::SteinPoisson:
    case ChartKind::SteinNegBinomial:
    case ChartKind::SteinBinomial: {
      const WeightFunction& f = *design.weight();
      double factor = 1.0;
      if (design.kind() == ChartKind::SteinNegBinomial) factor = design.size() + xd;
      if (design.kind() == ChartKind::SteinBinomial) factor = design.trials() - xd;
      next.a = lambda * xd * f(x) + keep * state.a;
      next.b = lambda * factor * f(x + 1) + keep * state.b;
      next.c = lambda * xd + keep * state.c;
      double ratio = next.a / (next.b * next.c);
      if (design.kind() == ChartKind::SteinNegBinomial) ratio *= design.size() + next.c;
      if (design.kind() == ChartKind::SteinBinomial) ratio *= design.trials() - next.c;
      next.z = ratio;
      break;
    }
  }
  const auto& lim = design.limits();
  const bool alarm = next.z < lim.lower || next.z > lim.upper;
  return {next, next.z, alarm};
}

SeriesResult run_series(const ChartDesign& design, std::span<const long> series) {
  SeriesResult result;
  result.records.reserve(series.size());
  ChartState state = init_chart(design);
  for (long x : series) {
    const ChartStep step = update(design, state, x);
    state = step.state;
    result.records.push_back({state.t, x, step.z, step.alarm});
    if (step.alarm && !result.first_alarm) result.first_alarm = state.t;
  }
  return result;
}

}  // namespace steinewma
