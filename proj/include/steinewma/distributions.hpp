#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "steinewma/rng.hpp"

namespace steinewma {

enum class Family { Poisson, NegBinomial, Binomial, ZIPoisson, ZIBinomial, BetaBinomial, Good };

std::string_view family_name(Family family);
// Accepts the names produced by family_name() plus common short aliases
// ("poi", "nb", "bin", "zip", "zib", "bb"); case-insensitive.
Family parse_family(std::string_view name);
bool is_bounded(Family family);

struct PoissonParams {
  double mean;
};
// Number of failures before the `size`-th success, success probability `prob`.
struct NegBinomialParams {
  double size;
  double prob;
};
struct BinomialParams {
  int trials;
  double prob;
};
struct ZIPoissonParams {
  double zero_weight;
  double rate;
};
struct ZIBinomialParams {
  double zero_weight;
  int trials;
  double prob;
};
struct BetaBinomialParams {
  int trials;
  double alpha;
  double beta;
};
// pmf(x) proportional to q^x (x+1)^s on x = 0, 1, ...
struct GoodParams {
  double q;
  double s;
};

using DistributionParams = std::variant<PoissonParams, NegBinomialParams, BinomialParams,
                                        ZIPoissonParams, ZIBinomialParams, BetaBinomialParams,
                                        GoodParams>;

struct MomentSummary {
  double mean;
  double variance;
  // sigma^2/mu for unbounded families, n sigma^2 / (mu (n - mu)) for bounded ones.
  double dispersion_index;
};

// Tail mass left out of the cached pmf/cdf tables used for sampling.
inline constexpr double kDefaultTailMass = 1e-12;
inline constexpr long kMaxSupport = 100000;

/*!
 * Immutable parametric count distribution.
 *
 * Construction validates the parameters and tabulates the pmf far enough into
 * the tail that the neglected mass is below 1e-20 (or up to kMaxSupport).
 * Copies share the table, so passing distributions by value is cheap and
 * instances can be shared freely between threads.
 */
class CountDistribution {
 public:
  static CountDistribution poisson(double mean);
  static CountDistribution negative_binomial(double size, double prob);
  static CountDistribution binomial(int trials, double prob);
  static CountDistribution zero_inflated_poisson(double zero_weight, double rate);
  static CountDistribution zero_inflated_binomial(double zero_weight, int trials, double prob);
  static CountDistribution beta_binomial(int trials, double alpha, double beta);
  static CountDistribution good(double q, double s);

  Family family() const { return family_; }
  const DistributionParams& params() const { return params_; }
  bool bounded() const { return is_bounded(family_); }
  // n for bounded families, nullopt otherwise.
  std::optional<int> upper_bound() const;

  double pmf(long x) const;
  double cdf(long x) const;
  MomentSummary moments() const;

  // Smallest x_max with P(X > x_max) <= tail_mass; n for bounded families.
  long support_truncation(double tail_mass) const;

  // Draw by inversion of the cdf truncated at support_truncation(kDefaultTailMass).
  long sample(RandomStream& rng) const;

  // pmf values on 0..support_truncation(kDefaultTailMass).
  std::span<const double> truncated_pmf() const;
  // pmf values on the full tabulated range (tail below 1e-20).
  std::span<const double> tabulated_pmf() const;

  std::string describe() const;

 private:
  struct Table;
  CountDistribution(Family family, DistributionParams params);

  double log_pmf(long x) const;
  void build_table();

  Family family_;
  DistributionParams params_;
  std::shared_ptr<const Table> table_;
};

// Moments by direct summation over the tabulated pmf, independent of the
// closed forms used by CountDistribution::moments().
MomentSummary summed_moments(const CountDistribution& dist);

/*!
 * Builds a distribution of the given family from its mean and dispersion index
 * (I_P for unbounded families, I_B for bounded ones).
 *
 * NegBinomial, ZIPoisson, ZIBinomial and BetaBinomial are inverted in closed
 * form; Good is solved numerically. Throws FeasibilityError naming the violated
 * constraint when no member of the family has these moments.
 */
CountDistribution from_mean_dispersion(Family family, double mean, double dispersion,
                                       std::optional<int> trials = std::nullopt);

}  // namespace steinewma
