#include "steinewma/distributions.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <limits>
#include <sstream>

#include "steinewma/errors.hpp"

namespace steinewma {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// Tabulation stops once the remaining tail is provably below this mass.
constexpr double kTableTail = 1e-20;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double log_choose(int n, long k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

double log_binomial(long x, int n, double p) {
  if (x < 0 || x > n) return kNegInf;
  if (p <= 0.0) return x == 0 ? 0.0 : kNegInf;
  if (p >= 1.0) return x == n ? 0.0 : kNegInf;
  return log_choose(n, x) + x * std::log(p) + (n - x) * std::log1p(-p);
}

double log_poisson(long x, double mean) {
  if (x < 0) return kNegInf;
  return x * std::log(mean) - mean - std::lgamma(x + 1.0);
}

double log_beta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

void require(bool ok, const std::string& what) {
  if (!ok) throw ParameterError(what);
}

bool is_probability(double p) { return std::isfinite(p) && p >= 0.0 && p <= 1.0; }
bool is_open_probability(double p) { return std::isfinite(p) && p > 0.0 && p < 1.0; }
bool is_positive(double v) { return std::isfinite(v) && v > 0.0; }

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

struct CountDistribution::Table {
  std::vector<double> pmf;   // 0..last tabulated point
  std::vector<double> tail;  // tail[x] = P(X > x)
  std::vector<double> cdf;   // 0..x_default, used for sampling
  long x_default = 0;
  double log_norm = 0.0;     // Good only
};

std::string_view family_name(Family family) {
  switch (family) {
    case Family::Poisson: return "Poisson";
    case Family::NegBinomial: return "NegBinomial";
    case Family::Binomial: return "Binomial";
    case Family::ZIPoisson: return "ZIPoisson";
    case Family::ZIBinomial: return "ZIBinomial";
    case Family::BetaBinomial: return "BetaBinomial";
    case Family::Good: return "Good";
  }
  return "?";
}

Family parse_family(std::string_view name) {
  const std::string key = lowercase(name);
  if (key == "poisson" || key == "poi") return Family::Poisson;
  if (key == "negbinomial" || key == "negbin" || key == "nb" || key == "negative_binomial")
    return Family::NegBinomial;
  if (key == "binomial" || key == "bin") return Family::Binomial;
  if (key == "zipoisson" || key == "zip") return Family::ZIPoisson;
  if (key == "zibinomial" || key == "zib") return Family::ZIBinomial;
  if (key == "betabinomial" || key == "bb" || key == "beta_binomial") return Family::BetaBinomial;
  if (key == "good") return Family::Good;
  throw ParameterError("unknown distribution family '" + std::string(name) + "'");
}

bool is_bounded(Family family) {
  return family == Family::Binomial || family == Family::ZIBinomial ||
         family == Family::BetaBinomial;
}

CountDistribution::CountDistribution(Family family, DistributionParams params)
    : family_(family), params_(params) {
  build_table();
}

CountDistribution CountDistribution::poisson(double mean) {
  require(is_positive(mean), "Poisson mean must be > 0");
  return {Family::Poisson, PoissonParams{mean}};
}

CountDistribution CountDistribution::negative_binomial(double size, double prob) {
  require(is_positive(size), "NegBinomial size must be > 0");
  require(is_open_probability(prob), "NegBinomial prob must lie in (0,1)");
  return {Family::NegBinomial, NegBinomialParams{size, prob}};
}

CountDistribution CountDistribution::binomial(int trials, double prob) {
  require(trials >= 0 && trials <= kMaxSupport, "Binomial trials must lie in [0, 1e5]");
  require(is_probability(prob), "Binomial prob must lie in [0,1]");
  return {Family::Binomial, BinomialParams{trials, prob}};
}

CountDistribution CountDistribution::zero_inflated_poisson(double zero_weight, double rate) {
  require(is_probability(zero_weight), "ZIPoisson zero weight must lie in [0,1]");
  require(is_positive(rate), "ZIPoisson rate must be > 0");
  return {Family::ZIPoisson, ZIPoissonParams{zero_weight, rate}};
}

CountDistribution CountDistribution::zero_inflated_binomial(double zero_weight, int trials,
                                                            double prob) {
  require(is_probability(zero_weight), "ZIBinomial zero weight must lie in [0,1]");
  require(trials >= 0 && trials <= kMaxSupport, "ZIBinomial trials must lie in [0, 1e5]");
  require(is_probability(prob), "ZIBinomial prob must lie in [0,1]");
  return {Family::ZIBinomial, ZIBinomialParams{zero_weight, trials, prob}};
}

CountDistribution CountDistribution::beta_binomial(int trials, double alpha, double beta) {
  require(trials >= 0 && trials <= kMaxSupport, "BetaBinomial trials must lie in [0, 1e5]");
  require(is_positive(alpha) && is_positive(beta), "BetaBinomial shapes must be > 0");
  return {Family::BetaBinomial, BetaBinomialParams{trials, alpha, beta}};
}

CountDistribution CountDistribution::good(double q, double s) {
  require(is_open_probability(q), "Good q must lie in (0,1)");
  require(std::isfinite(s), "Good s must be finite");
  return {Family::Good, GoodParams{q, s}};
}

std::optional<int> CountDistribution::upper_bound() const {
  return std::visit(Overloaded{[](const BinomialParams& p) -> std::optional<int> { return p.trials; },
                               [](const ZIBinomialParams& p) -> std::optional<int> { return p.trials; },
                               [](const BetaBinomialParams& p) -> std::optional<int> { return p.trials; },
                               [](const auto&) -> std::optional<int> { return std::nullopt; }},
                    params_);
}

// For Good this is the unnormalized log weight until the table exists.
double CountDistribution::log_pmf(long x) const {
  if (x < 0) return kNegInf;
  return std::visit(
      Overloaded{
          [&](const PoissonParams& p) { return log_poisson(x, p.mean); },
          [&](const NegBinomialParams& p) {
            return std::lgamma(x + p.size) - std::lgamma(p.size) - std::lgamma(x + 1.0) +
                   p.size * std::log(p.prob) + x * std::log1p(-p.prob);
          },
          [&](const BinomialParams& p) { return log_binomial(x, p.trials, p.prob); },
          [&](const ZIPoissonParams& p) {
            if (x == 0) return std::log(p.zero_weight + (1.0 - p.zero_weight) * std::exp(-p.rate));
            if (p.zero_weight >= 1.0) return kNegInf;
            return std::log1p(-p.zero_weight) + log_poisson(x, p.rate);
          },
          [&](const ZIBinomialParams& p) {
            if (x > p.trials) return kNegInf;
            const double base = log_binomial(x, p.trials, p.prob);
            if (x == 0) return std::log(p.zero_weight + (1.0 - p.zero_weight) * std::exp(base));
            if (p.zero_weight >= 1.0) return kNegInf;
            return std::log1p(-p.zero_weight) + base;
          },
          [&](const BetaBinomialParams& p) {
            if (x > p.trials) return kNegInf;
            return log_choose(p.trials, x) + log_beta(x + p.alpha, p.trials - x + p.beta) -
                   log_beta(p.alpha, p.beta);
          },
          [&](const GoodParams& p) {
            const double norm = table_ ? table_->log_norm : 0.0;
            return x * std::log(p.q) + p.s * std::log(x + 1.0) - norm;
          }},
      params_);
}

void CountDistribution::build_table() {
  auto table = std::make_shared<Table>();
  std::vector<double>& pmf = table->pmf;

  if (const auto n = upper_bound()) {
    pmf.resize(static_cast<std::size_t>(*n) + 1);
    for (long x = 0; x <= *n; ++x) pmf[x] = std::exp(log_pmf(x));
  } else {
    // Ratio bound on p(x+1)/p(x) far in the tail, and a point past which the
    // pmf is decreasing.
    double limit_ratio = 0.0;
    double center = 0.0;
    std::visit(Overloaded{[&](const PoissonParams& p) { center = p.mean; },
                          [&](const NegBinomialParams& p) {
                            limit_ratio = 1.0 - p.prob;
                            center = p.size * (1.0 - p.prob) / p.prob;
                          },
                          [&](const ZIPoissonParams& p) { center = p.rate; },
                          [&](const GoodParams& p) {
                            limit_ratio = p.q;
                            center = std::max(0.0, -p.s / std::log(p.q));
                          },
                          [](const auto&) {}},
               params_);

    std::vector<double> logw;
    double max_logw = kNegInf;
    for (long x = 0; x <= kMaxSupport; ++x) {
      const double lw = log_pmf(x);
      logw.push_back(lw);
      max_logw = std::max(max_logw, lw);
      if (x < 1 || x <= center) continue;
      const double log_ratio = lw - logw[x - 1];
      if (!(log_ratio < 0.0) && lw != kNegInf) continue;
      const double r = std::max(std::exp(log_ratio), limit_ratio);
      if (r >= 1.0) continue;
      // Remaining tail is at most p(x) r / (1 - r) relative to the mode.
      const double tail_bound = std::exp(lw - max_logw) * r / (1.0 - r);
      if (lw == kNegInf || tail_bound < kTableTail) break;
    }
    pmf.resize(logw.size());
    if (family_ == Family::Good) {
      long double total = 0.0L;
      for (double lw : logw) total += std::exp(static_cast<long double>(lw - max_logw));
      table->log_norm = max_logw + std::log(static_cast<double>(total));
      for (std::size_t x = 0; x < logw.size(); ++x) pmf[x] = std::exp(logw[x] - table->log_norm);
    } else {
      for (std::size_t x = 0; x < logw.size(); ++x) pmf[x] = std::exp(logw[x]);
    }
  }

  const std::size_t last = pmf.size() - 1;
  table->tail.assign(pmf.size(), 0.0);
  for (std::size_t x = last; x-- > 0;) table->tail[x] = table->tail[x + 1] + pmf[x + 1];

  if (upper_bound()) {
    table->x_default = static_cast<long>(last);
  } else {
    long xd = static_cast<long>(last);
    for (std::size_t x = 0; x <= last; ++x) {
      if (table->tail[x] <= kDefaultTailMass) {
        xd = static_cast<long>(x);
        break;
      }
    }
    table->x_default = xd;
  }

  table->cdf.resize(static_cast<std::size_t>(table->x_default) + 1);
  long double running = 0.0L;
  for (long x = 0; x <= table->x_default; ++x) {
    running += pmf[x];
    table->cdf[x] = static_cast<double>(running);
  }
  table_ = std::move(table);
}

double CountDistribution::pmf(long x) const {
  if (x < 0) return 0.0;
  if (static_cast<std::size_t>(x) < table_->pmf.size()) return table_->pmf[x];
  return std::exp(log_pmf(x));
}

double CountDistribution::cdf(long x) const {
  if (x < 0) return 0.0;
  if (static_cast<std::size_t>(x) < table_->tail.size()) return 1.0 - table_->tail[x];
  return 1.0;
}

MomentSummary CountDistribution::moments() const {
  double mean = 0.0;
  double var = 0.0;
  std::visit(Overloaded{[&](const PoissonParams& p) { mean = var = p.mean; },
                        [&](const NegBinomialParams& p) {
                          mean = p.size * (1.0 - p.prob) / p.prob;
                          var = mean / p.prob;
                        },
                        [&](const BinomialParams& p) {
                          mean = p.trials * p.prob;
                          var = mean * (1.0 - p.prob);
                        },
                        [&](const ZIPoissonParams& p) {
                          mean = (1.0 - p.zero_weight) * p.rate;
                          var = mean * (1.0 + p.zero_weight * p.rate);
                        },
                        [&](const ZIBinomialParams& p) {
                          const double m = p.trials * p.prob;
                          mean = (1.0 - p.zero_weight) * m;
                          var = mean * (1.0 - p.prob) + p.zero_weight * (1.0 - p.zero_weight) * m * m;
                        },
                        [&](const BetaBinomialParams& p) {
                          const double ab = p.alpha + p.beta;
                          mean = p.trials * p.alpha / ab;
                          var = p.trials * p.alpha * p.beta * (ab + p.trials) / (ab * ab * (ab + 1.0));
                        },
                        [&](const GoodParams&) {
                          const MomentSummary m = summed_moments(*this);
                          mean = m.mean;
                          var = m.variance;
                        }},
             params_);
  double index = 0.0;
  if (const auto n = upper_bound()) {
    index = *n * var / (mean * (*n - mean));
  } else {
    index = var / mean;
  }
  return {mean, var, index};
}

long CountDistribution::support_truncation(double tail_mass) const {
  if (!(tail_mass > 0.0 && tail_mass < 1.0)) throw ParameterError("tail mass must lie in (0,1)");
  if (const auto n = upper_bound()) return *n;
  const auto& tail = table_->tail;
  for (std::size_t x = 0; x < tail.size(); ++x) {
    if (tail[x] <= tail_mass) return static_cast<long>(x);
  }
  return static_cast<long>(tail.size() - 1);
}

long CountDistribution::sample(RandomStream& rng) const {
  const auto& cdf = table_->cdf;
  const double u = rng.uniform();
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  if (it == cdf.end()) return table_->x_default;
  return static_cast<long>(it - cdf.begin());
}

std::span<const double> CountDistribution::truncated_pmf() const {
  return std::span<const double>(table_->pmf).first(static_cast<std::size_t>(table_->x_default) + 1);
}

std::span<const double> CountDistribution::tabulated_pmf() const { return table_->pmf; }

std::string CountDistribution::describe() const {
  std::ostringstream os;
  os.precision(10);
  os << family_name(family_) << '(';
  std::visit(Overloaded{[&](const PoissonParams& p) { os << "mean=" << p.mean; },
                        [&](const NegBinomialParams& p) { os << "size=" << p.size << ", prob=" << p.prob; },
                        [&](const BinomialParams& p) { os << "n=" << p.trials << ", prob=" << p.prob; },
                        [&](const ZIPoissonParams& p) {
                          os << "omega=" << p.zero_weight << ", rate=" << p.rate;
                        },
                        [&](const ZIBinomialParams& p) {
                          os << "omega=" << p.zero_weight << ", n=" << p.trials << ", prob=" << p.prob;
                        },
                        [&](const BetaBinomialParams& p) {
                          os << "n=" << p.trials << ", a=" << p.alpha << ", b=" << p.beta;
                        },
                        [&](const GoodParams& p) { os << "q=" << p.q << ", s=" << p.s; }},
             params_);
  os << ')';
  return os.str();
}

MomentSummary summed_moments(const CountDistribution& dist) {
  const auto pmf = dist.tabulated_pmf();
  long double mass = 0.0L;
  long double first = 0.0L;
  for (std::size_t x = 0; x < pmf.size(); ++x) {
    mass += pmf[x];
    first += static_cast<long double>(x) * pmf[x];
  }
  const long double mean = first / mass;
  long double second = 0.0L;
  for (std::size_t x = 0; x < pmf.size(); ++x) {
    const long double d = static_cast<long double>(x) - mean;
    second += d * d * pmf[x];
  }
  const double m = static_cast<double>(mean);
  const double v = static_cast<double>(second / mass);
  double index = v / m;
  if (const auto n = dist.upper_bound()) index = *n * v / (m * (*n - m));
  return {m, v, index};
}

namespace {

void feasible(bool ok, const std::string& what) {
  if (!ok) throw FeasibilityError(what);
}

CountDistribution solve_good(double mean, double dispersion) {
  // Unknowns: logit(q) and s. Start from a gamma approximation of X+1.
  const double rate = (mean + 1.0) / (dispersion * mean);
  std::array<double, 2> theta{-rate - std::log1p(-std::exp(-rate)), rate * (mean + 1.0) - 1.0};

  auto residual = [&](const std::array<double, 2>& t) -> std::array<double, 2> {
    const double q = 1.0 / (1.0 + std::exp(-t[0]));
    if (!(q > 0.0 && q < 1.0) || !std::isfinite(t[1])) return {1e300, 1e300};
    const MomentSummary m = summed_moments(CountDistribution::good(q, t[1]));
    return {(m.mean - mean) / mean, (m.dispersion_index - dispersion) / dispersion};
  };
  auto norm = [](const std::array<double, 2>& r) { return std::hypot(r[0], r[1]); };

  std::array<double, 2> r = residual(theta);
  for (int iter = 0; iter < 100 && norm(r) > 1e-13; ++iter) {
    double jac[2][2];
    for (int j = 0; j < 2; ++j) {
      const double h = 1e-7 * std::max(1.0, std::abs(theta[j]));
      auto tp = theta;
      auto tm = theta;
      tp[j] += h;
      tm[j] -= h;
      const auto rp = residual(tp);
      const auto rm = residual(tm);
      jac[0][j] = (rp[0] - rm[0]) / (2 * h);
      jac[1][j] = (rp[1] - rm[1]) / (2 * h);
    }
    const double det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
    if (!std::isfinite(det) || det == 0.0) break;
    const std::array<double, 2> step{(jac[1][1] * r[0] - jac[0][1] * r[1]) / det,
                                     (-jac[1][0] * r[0] + jac[0][0] * r[1]) / det};
    double damping = 1.0;
    bool improved = false;
    for (int k = 0; k < 40; ++k, damping *= 0.5) {
      const std::array<double, 2> trial{theta[0] - damping * step[0], theta[1] - damping * step[1]};
      const auto rt = residual(trial);
      if (norm(rt) < norm(r)) {
        theta = trial;
        r = rt;
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  feasible(norm(r) <= 1e-11, "Good distribution: no (q, s) reproduces the requested mean and "
                             "dispersion index");
  return CountDistribution::good(1.0 / (1.0 + std::exp(-theta[0])), theta[1]);
}

}  // namespace

CountDistribution from_mean_dispersion(Family family, double mean, double dispersion,
                                       std::optional<int> trials) {
  feasible(std::isfinite(mean) && mean > 0.0, "mean must be > 0");
  feasible(std::isfinite(dispersion) && dispersion > 0.0, "dispersion index must be > 0");
  int n = 0;
  if (is_bounded(family)) {
    feasible(trials.has_value() && *trials >= 1, "bounded family requires n >= 1");
    n = *trials;
    feasible(mean < n, "bounded family requires 0 < mean < n");
  }
  constexpr double kUnitTol = 1e-12;

  switch (family) {
    case Family::Poisson:
      feasible(std::abs(dispersion - 1.0) <= kUnitTol, "Poisson requires dispersion index 1");
      return CountDistribution::poisson(mean);
    case Family::Binomial:
      feasible(std::abs(dispersion - 1.0) <= kUnitTol, "Binomial requires dispersion index 1");
      return CountDistribution::binomial(n, mean / n);
    case Family::NegBinomial: {
      feasible(dispersion > 1.0, "NegBinomial requires dispersion index > 1");
      const double size = mean / (dispersion - 1.0);
      return CountDistribution::negative_binomial(size, size / (size + mean));
    }
    case Family::ZIPoisson: {
      feasible(dispersion > 1.0, "ZIPoisson requires dispersion index > 1");
      const double rate = mean + dispersion - 1.0;
      return CountDistribution::zero_inflated_poisson((dispersion - 1.0) / rate, rate);
    }
    case Family::ZIBinomial: {
      feasible(dispersion > 1.0, "ZIBinomial requires dispersion index > 1");
      // Solve (1-w) n p = mean and n var / (mean (n - mean)) = dispersion.
      const double c = dispersion * (n - mean) / n - 1.0;
      feasible(mean + c > 0.0, "ZIBinomial: dispersion index too small for this mean");
      const double omega = (c * n + mean) / (n * (mean + c));
      const double prob = mean / (n * (1.0 - omega));
      feasible(omega >= 0.0 && omega < 1.0 && prob < 1.0,
               "ZIBinomial: dispersion index too large (requires success probability < 1)");
      return CountDistribution::zero_inflated_binomial(omega, n, prob);
    }
    case Family::BetaBinomial: {
      feasible(dispersion > 1.0, "BetaBinomial requires dispersion index > 1");
      feasible(dispersion < n, "BetaBinomial requires dispersion index < n");
      const double shape_sum = (n - 1.0) / (dispersion - 1.0) - 1.0;
      const double p = mean / n;
      return CountDistribution::beta_binomial(n, shape_sum * p, shape_sum * (1.0 - p));
    }
    case Family::Good:
      return solve_good(mean, dispersion);
  }
  throw ParameterError("unknown family");
}

}  // namespace steinewma
