#include "steinewma/processes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "steinewma/errors.hpp"

namespace steinewma {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ParameterError(what);
}

bool in_open_unit(double v) { return std::isfinite(v) && v > 0.0 && v < 1.0; }

std::vector<double> convolve(std::span<const double> a, std::span<const double> b, long y_max) {
  std::vector<double> out(static_cast<std::size_t>(y_max) + 1, 0.0);
  for (std::size_t i = 0; i < a.size() && static_cast<long>(i) <= y_max; ++i) {
    if (a[i] == 0.0) continue;
    for (std::size_t j = 0; j < b.size() && static_cast<long>(i + j) <= y_max; ++j) {
      out[i + j] += a[i] * b[j];
    }
  }
  return out;
}

std::vector<double> pmf_vector(const CountDistribution& d, long y_max) {
  std::vector<double> out(static_cast<std::size_t>(y_max) + 1);
  for (long y = 0; y <= y_max; ++y) out[y] = d.pmf(y);
  return out;
}

// Conditional variance coefficients (c1, c2) of a thinning: Var = c1 x + c2 x^2.
struct VarianceCoefficients {
  double linear;
  double quadratic;
};

VarianceCoefficients binomial_coefficients(double prob) { return {prob * (1.0 - prob), 0.0}; }

VarianceCoefficients bb_coefficients(double prob, double icc) {
  const double v = prob * (1.0 - prob);
  return {v * (1.0 - icc), v * icc};
}

VarianceCoefficients zib_coefficients(double prob, double zero_weight) {
  const double p = prob / (1.0 - zero_weight);
  return {prob * (1.0 - p), zero_weight * prob * prob / (1.0 - zero_weight)};
}

double binar_variance(int n, double mean, double rho, VarianceCoefficients a, VarianceCoefficients b) {
  const double m = n - mean;
  const double denom = 1.0 - rho * rho - a.quadratic - b.quadratic;
  if (!(denom > 0.0)) return std::numeric_limits<double>::infinity();
  return (a.linear * mean + a.quadratic * mean * mean + b.linear * m + b.quadratic * m * m) / denom;
}

// Bisection for an increasing function on [lo, hi).
template <class F>
double solve_increasing(F f, double target, double lo, double hi) {
  for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

long binomial_thin(long x, double theta, RandomStream& rng) {
  if (x <= 0 || theta <= 0.0) return 0;
  if (theta >= 1.0) return x;
  long kept = 0;
  for (long i = 0; i < x; ++i) kept += rng.uniform() < theta ? 1 : 0;
  return kept;
}

long iterated_thin(long x, double rho, double pi, RandomStream& rng) {
  const long parents = binomial_thin(x, pi * rho, rng);
  const double log_fail = std::log1p(-pi);
  long total = 0;
  for (long i = 0; i < parents; ++i) {
    // 1 + number of failures before the first success.
    total += 1 + static_cast<long>(std::floor(std::log(rng.uniform_pos()) / log_fail));
  }
  return total;
}

long bb_thin(long x, double alpha, double beta, RandomStream& rng) {
  if (x <= 0) return 0;
  return CountDistribution::beta_binomial(static_cast<int>(x), alpha, beta).sample(rng);
}

long zib_thin(long x, double prob, double zero_weight, RandomStream& rng) {
  const bool inflated = rng.uniform() < zero_weight;
  if (inflated) return 0;
  return binomial_thin(x, prob, rng);
}

struct ProcessModel::Tables {
  std::vector<CountDistribution> survivors;  // alpha-thinning of x
  std::vector<CountDistribution> arrivals;   // beta-thinning of n - x
};

std::string_view process_kind_name(ProcessKind kind) {
  switch (kind) {
    case ProcessKind::IID: return "IID";
    case ProcessKind::PoiINAR1: return "PoiINAR1";
    case ProcessKind::GenericINAR1: return "GenericINAR1";
    case ProcessKind::NBIINAR1: return "NBIINAR1";
    case ProcessKind::BinAR1: return "BinAR1";
    case ProcessKind::BBAR1: return "BBAR1";
    case ProcessKind::ZIBAR1: return "ZIBAR1";
  }
  return "?";
}

ProcessModel ProcessModel::iid(CountDistribution marginal) {
  ProcessModel m;
  m.kind_ = ProcessKind::IID;
  m.mean_ = marginal.moments().mean;
  if (const auto n = marginal.upper_bound()) m.trials_ = *n;
  m.marginal_ = std::move(marginal);
  return m;
}

ProcessModel ProcessModel::poisson_inar1(double mean, double rho) {
  require(in_open_unit(rho), "PoiINAR1 requires rho in (0,1)");
  require(std::isfinite(mean) && mean > 0.0, "PoiINAR1 requires mean > 0");
  ProcessModel m;
  m.kind_ = ProcessKind::PoiINAR1;
  m.rho_ = rho;
  m.mean_ = mean;
  m.marginal_ = CountDistribution::poisson(mean);
  m.innovation_ = CountDistribution::poisson(mean * (1.0 - rho));
  return m;
}

ProcessModel ProcessModel::generic_inar1(CountDistribution innovation, double rho) {
  require(in_open_unit(rho), "INAR(1) requires rho in (0,1)");
  require(!innovation.bounded(), "INAR(1) innovations must be an unbounded count law");
  ProcessModel m;
  m.kind_ = ProcessKind::GenericINAR1;
  m.rho_ = rho;
  m.mean_ = innovation.moments().mean / (1.0 - rho);
  if (innovation.family() == Family::Poisson) m.marginal_ = CountDistribution::poisson(m.mean_);
  m.innovation_ = std::move(innovation);
  return m;
}

ProcessModel ProcessModel::nb_iinar1(double mean, double size, double rho) {
  require(in_open_unit(rho), "NB-IINAR(1) requires rho in (0,1)");
  require(std::isfinite(mean) && mean > 0.0 && std::isfinite(size) && size > 0.0,
          "NB-IINAR(1) requires mean > 0 and size > 0");
  ProcessModel m;
  m.kind_ = ProcessKind::NBIINAR1;
  m.rho_ = rho;
  m.mean_ = mean;
  m.pi_ = size / (mean * (1.0 - rho) + size);
  require(in_open_unit(m.pi_), "NB-IINAR(1) requires pi in (0,1)");
  m.innovation_ = CountDistribution::negative_binomial(size, m.pi_);
  m.marginal_ = CountDistribution::negative_binomial(size, size / (size + mean));
  return m;
}

namespace {

void check_binar(int trials, double mean, double rho) {
  require(trials >= 1 && trials <= 100000, "BinAR(1) requires n in [1, 1e5]");
  require(in_open_unit(rho), "BinAR(1) requires rho in (0,1)");
  require(std::isfinite(mean) && mean > 0.0 && mean < trials, "BinAR(1) requires 0 < mean < n");
  const double beta = (1.0 - rho) * mean / trials;
  require(in_open_unit(beta) && in_open_unit(beta + rho), "BinAR(1) requires alpha, beta in (0,1)");
}

}  // namespace

ProcessModel ProcessModel::binar1(int trials, double mean, double rho) {
  check_binar(trials, mean, rho);
  ProcessModel m;
  m.kind_ = ProcessKind::BinAR1;
  m.rho_ = rho;
  m.mean_ = mean;
  m.trials_ = trials;
  m.beta_ = (1.0 - rho) * mean / trials;
  m.alpha_ = m.beta_ + rho;
  m.marginal_ = CountDistribution::binomial(trials, mean / trials);
  auto tables = std::make_shared<Tables>();
  for (int x = 0; x <= trials; ++x) {
    tables->survivors.push_back(CountDistribution::binomial(x, m.alpha_));
    tables->arrivals.push_back(CountDistribution::binomial(x, m.beta_));
  }
  m.tables_ = std::move(tables);
  return m;
}

ProcessModel ProcessModel::bb_ar1(int trials, double mean, double rho, double dispersion) {
  check_binar(trials, mean, rho);
  require(in_open_unit(dispersion), "BB-AR(1) thinning dispersion must lie in (0,1)");
  ProcessModel m;
  m.kind_ = ProcessKind::BBAR1;
  m.rho_ = rho;
  m.mean_ = mean;
  m.trials_ = trials;
  m.beta_ = (1.0 - rho) * mean / trials;
  m.alpha_ = m.beta_ + rho;
  m.thinning_param_ = dispersion;
  const double shape = (1.0 - dispersion) / dispersion;
  auto tables = std::make_shared<Tables>();
  for (int x = 0; x <= trials; ++x) {
    tables->survivors.push_back(
        CountDistribution::beta_binomial(x, m.alpha_ * shape, (1.0 - m.alpha_) * shape));
    tables->arrivals.push_back(
        CountDistribution::beta_binomial(x, m.beta_ * shape, (1.0 - m.beta_) * shape));
  }
  m.tables_ = std::move(tables);
  return m;
}

ProcessModel ProcessModel::zib_ar1(int trials, double mean, double rho, double zero_weight) {
  check_binar(trials, mean, rho);
  ProcessModel m;
  m.kind_ = ProcessKind::ZIBAR1;
  m.rho_ = rho;
  m.mean_ = mean;
  m.trials_ = trials;
  m.beta_ = (1.0 - rho) * mean / trials;
  m.alpha_ = m.beta_ + rho;
  require(std::isfinite(zero_weight) && zero_weight >= 0.0 && zero_weight < 1.0 - m.alpha_,
          "ZIB-AR(1) zero weight must lie in [0, 1 - alpha)");
  m.thinning_param_ = zero_weight;
  auto tables = std::make_shared<Tables>();
  for (int x = 0; x <= trials; ++x) {
    tables->survivors.push_back(
        CountDistribution::zero_inflated_binomial(zero_weight, x, m.alpha_ / (1.0 - zero_weight)));
    tables->arrivals.push_back(
        CountDistribution::zero_inflated_binomial(zero_weight, x, m.beta_ / (1.0 - zero_weight)));
  }
  m.tables_ = std::move(tables);
  return m;
}

std::optional<int> ProcessModel::upper_bound() const {
  if (kind_ == ProcessKind::IID) return marginal_->upper_bound();
  if (tables_) return trials_;
  return std::nullopt;
}

long ProcessModel::step(long x_prev, RandomStream& rng) const {
  switch (kind_) {
    case ProcessKind::IID:
      return marginal_->sample(rng);
    case ProcessKind::PoiINAR1:
    case ProcessKind::GenericINAR1:
      return binomial_thin(x_prev, rho_, rng) + innovation_->sample(rng);
    case ProcessKind::NBIINAR1:
      return iterated_thin(x_prev, rho_, pi_, rng) + innovation_->sample(rng);
    case ProcessKind::BinAR1:
    case ProcessKind::BBAR1:
    case ProcessKind::ZIBAR1: {
      if (x_prev < 0 || x_prev > trials_) throw DataError("state outside {0..n}");
      return tables_->survivors[x_prev].sample(rng) + tables_->arrivals[trials_ - x_prev].sample(rng);
    }
  }
  return 0;
}

long ProcessModel::init_stationary(RandomStream& rng, int burn_in) const {
  if (marginal_) return marginal_->sample(rng);
  long x = 0;
  for (int i = 0; i < burn_in; ++i) x = step(x, rng);
  return x;
}

std::vector<double> ProcessModel::transition_pmf(long x_prev, long y_max) const {
  require(x_prev >= 0 && y_max >= 0, "transition_pmf requires nonnegative arguments");
  switch (kind_) {
    case ProcessKind::IID:
      return pmf_vector(*marginal_, y_max);
    case ProcessKind::PoiINAR1:
    case ProcessKind::GenericINAR1: {
      const auto thinned = pmf_vector(CountDistribution::binomial(static_cast<int>(x_prev), rho_),
                                      std::min(x_prev, y_max));
      return convolve(thinned, pmf_vector(*innovation_, y_max), y_max);
    }
    case ProcessKind::NBIINAR1: {
      // S = N + NB(N, pi) with N ~ Bin(x, pi rho).
      std::vector<double> iterated(static_cast<std::size_t>(y_max) + 1, 0.0);
      const auto parents = CountDistribution::binomial(static_cast<int>(x_prev), pi_ * rho_);
      for (long k = 0; k <= std::min(x_prev, y_max); ++k) {
        const double pk = parents.pmf(k);
        if (pk == 0.0) continue;
        if (k == 0) {
          iterated[0] += pk;
          continue;
        }
        const auto extra = CountDistribution::negative_binomial(static_cast<double>(k), pi_);
        for (long s = k; s <= y_max; ++s) iterated[s] += pk * extra.pmf(s - k);
      }
      return convolve(iterated, pmf_vector(*innovation_, y_max), y_max);
    }
    case ProcessKind::BinAR1:
    case ProcessKind::BBAR1:
    case ProcessKind::ZIBAR1: {
      require(x_prev <= trials_, "state outside {0..n}");
      return convolve(tables_->survivors[x_prev].tabulated_pmf(),
                      tables_->arrivals[trials_ - x_prev].tabulated_pmf(), y_max);
    }
  }
  return {};
}

std::string ProcessModel::describe() const {
  std::ostringstream os;
  os.precision(10);
  os << process_kind_name(kind_) << '(';
  switch (kind_) {
    case ProcessKind::IID:
      os << marginal_->describe();
      break;
    case ProcessKind::PoiINAR1:
      os << "mean=" << mean_ << ", rho=" << rho_;
      break;
    case ProcessKind::GenericINAR1:
      os << "innovation=" << innovation_->describe() << ", rho=" << rho_;
      break;
    case ProcessKind::NBIINAR1:
      os << "mean=" << mean_ << ", size=" << std::get<NegBinomialParams>(innovation_->params()).size
         << ", rho=" << rho_;
      break;
    case ProcessKind::BinAR1:
      os << "n=" << trials_ << ", mean=" << mean_ << ", rho=" << rho_;
      break;
    case ProcessKind::BBAR1:
      os << "n=" << trials_ << ", mean=" << mean_ << ", rho=" << rho_ << ", icc=" << thinning_param_;
      break;
    case ProcessKind::ZIBAR1:
      os << "n=" << trials_ << ", mean=" << mean_ << ", rho=" << rho_ << ", omega=" << thinning_param_;
      break;
  }
  os << ')';
  return os.str();
}

double binar_marginal_variance(const ProcessModel& model) {
  const int n = *model.upper_bound();
  const double a = model.alpha();
  const double b = model.beta();
  switch (model.kind()) {
    case ProcessKind::BinAR1:
      return binar_variance(n, model.mean(), model.rho(), binomial_coefficients(a), binomial_coefficients(b));
    case ProcessKind::BBAR1:
      return binar_variance(n, model.mean(), model.rho(), bb_coefficients(a, model.thinning_parameter()),
                            bb_coefficients(b, model.thinning_parameter()));
    case ProcessKind::ZIBAR1:
      return binar_variance(n, model.mean(), model.rho(), zib_coefficients(a, model.thinning_parameter()),
                            zib_coefficients(b, model.thinning_parameter()));
    default:
      throw ParameterError("binar_marginal_variance requires a BinAR-type model");
  }
}

ProcessModel model_for_target(Family family, double mean, double dispersion,
                              std::optional<int> trials, double rho) {
  if (!(std::isfinite(rho) && rho >= 0.0 && rho < 1.0)) throw ParameterError("rho must lie in [0,1)");
  if (rho == 0.0) return ProcessModel::iid(from_mean_dispersion(family, mean, dispersion, trials));

  switch (family) {
    case Family::Poisson:
      from_mean_dispersion(family, mean, dispersion, trials);  // validates I = 1
      return ProcessModel::poisson_inar1(mean, rho);
    case Family::NegBinomial: {
      const auto nb = from_mean_dispersion(family, mean, dispersion, trials);
      return ProcessModel::nb_iinar1(mean, std::get<NegBinomialParams>(nb.params()).size, rho);
    }
    case Family::Binomial:
      from_mean_dispersion(family, mean, dispersion, trials);
      return ProcessModel::binar1(*trials, mean, rho);
    case Family::ZIPoisson:
    case Family::Good: {
      // Innovation dispersion giving marginal variance I mu through
      // sigma_X^2 (1 - rho^2) = rho (1 - rho) mu + sigma_e^2.
      const double innovation_dispersion = dispersion * (1.0 + rho) - rho;
      if (!(innovation_dispersion > 0.0))
        throw FeasibilityError("INAR(1): dispersion index too small for this rho");
      return ProcessModel::generic_inar1(
          from_mean_dispersion(family, (1.0 - rho) * mean, innovation_dispersion), rho);
    }
    case Family::BetaBinomial:
    case Family::ZIBinomial: {
      from_mean_dispersion(family, mean, dispersion, trials);
      const int n = *trials;
      const double target = dispersion * mean * (n - mean) / n;
      const double beta = (1.0 - rho) * mean / n;
      const double alpha = beta + rho;
      if (family == Family::BetaBinomial) {
        auto variance = [&](double icc) {
          return binar_variance(n, mean, rho, bb_coefficients(alpha, icc), bb_coefficients(beta, icc));
        };
        if (!(variance(1.0 - 1e-12) > target))
          throw FeasibilityError("BB-AR(1): dispersion index not attainable");
        return ProcessModel::bb_ar1(n, mean, rho, solve_increasing(variance, target, 0.0, 1.0));
      }
      const double omega_max = 1.0 - alpha;
      auto variance = [&](double omega) {
        return binar_variance(n, mean, rho, zib_coefficients(alpha, omega), zib_coefficients(beta, omega));
      };
      if (!(variance(omega_max * (1.0 - 1e-12)) > target))
        throw FeasibilityError("ZIB-AR(1): dispersion index not attainable");
      return ProcessModel::zib_ar1(n, mean, rho, solve_increasing(variance, target, 0.0, omega_max));
    }
  }
  throw ParameterError("unknown family");
}

std::vector<long> generate(const ScenarioDGP& scenario, long length, RandomStream& rng) {
  if (length < 1) throw ParameterError("series length must be >= 1");
  if (scenario.change_point < 1) throw ParameterError("change point must be >= 1");
  std::vector<long> series;
  series.reserve(static_cast<std::size_t>(length));
  long x = scenario.in_control.init_stationary(rng);
  for (long t = 1; t <= length; ++t) {
    x = scenario.model_at(t).step(x, rng);
    series.push_back(x);
  }
  return series;
}

}  // namespace steinewma
