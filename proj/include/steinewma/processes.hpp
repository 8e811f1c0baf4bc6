#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "steinewma/distributions.hpp"
#include "steinewma/rng.hpp"

namespace steinewma {

// ---------------------------------------------------------------------------
// Thinning operators
// ---------------------------------------------------------------------------

// theta o x: conditionally Binomial(x, theta).
long binomial_thin(long x, double theta, RandomStream& rng);

// rho (*)_pi x: sum of N iid counts Y_i ~ 1 + NB(1, pi), N | x ~ Binomial(x, pi rho).
long iterated_thin(long x, double rho, double pi, RandomStream& rng);

// Conditionally BetaBinomial(x, alpha, beta).
long bb_thin(long x, double alpha, double beta, RandomStream& rng);

// Conditionally zero-inflated Binomial(x, prob) with inflation zero_weight.
long zib_thin(long x, double prob, double zero_weight, RandomStream& rng);

// ---------------------------------------------------------------------------
// Process models
// ---------------------------------------------------------------------------

enum class ProcessKind { IID, PoiINAR1, GenericINAR1, NBIINAR1, BinAR1, BBAR1, ZIBAR1 };

std::string_view process_kind_name(ProcessKind kind);

inline constexpr int kDefaultBurnIn = 500;

/*!
 * Data-generating process for a count series: iid draws or one of the
 * stationary AR(1)-type Markov chains built from thinning operators.
 *
 *   PoiINAR1     X_t = rho o X_{t-1} + e_t,            e_t ~ Poi(mu (1 - rho))
 *   GenericINAR1 X_t = rho o X_{t-1} + e_t,            e_t from any count law
 *   NBIINAR1     X_t = rho (*)_pi X_{t-1} + e_t,       e_t ~ NB(nu, pi)
 *   BinAR1       X_t = alpha o X_{t-1} + beta o (n - X_{t-1})
 *   BBAR1/ZIBAR1 BinAR1 with beta-binomial / zero-inflated binomial thinnings
 *
 * Immutable; all per-path state lives with the caller.
 */
class ProcessModel {
 public:
  static ProcessModel iid(CountDistribution marginal);
  static ProcessModel poisson_inar1(double mean, double rho);
  static ProcessModel generic_inar1(CountDistribution innovation, double rho);
  static ProcessModel nb_iinar1(double mean, double size, double rho);
  static ProcessModel binar1(int trials, double mean, double rho);
  // Beta-binomial thinnings with intra-class correlation `dispersion` in (0,1).
  static ProcessModel bb_ar1(int trials, double mean, double rho, double dispersion);
  // Zero-inflated binomial thinnings sharing the inflation `zero_weight`.
  static ProcessModel zib_ar1(int trials, double mean, double rho, double zero_weight);

  ProcessKind kind() const { return kind_; }
  double rho() const { return rho_; }
  double mean() const { return mean_; }
  std::optional<int> upper_bound() const;
  // Closed-form stationary marginal, when one exists.
  const std::optional<CountDistribution>& stationary_marginal() const { return marginal_; }
  const std::optional<CountDistribution>& innovation() const { return innovation_; }
  // BinAR-type coefficients; zero for other kinds.
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  double thinning_parameter() const { return thinning_param_; }
  // Probability of the iterated thinning (NBIINAR1 only).
  double iterated_pi() const { return pi_; }

  long step(long x_prev, RandomStream& rng) const;
  long init_stationary(RandomStream& rng, int burn_in = kDefaultBurnIn) const;

  // P(X_t = y | X_{t-1} = x) for y = 0..y_max.
  std::vector<double> transition_pmf(long x_prev, long y_max) const;

  std::string describe() const;

 private:
  struct Tables;
  ProcessModel() = default;

  ProcessKind kind_ = ProcessKind::IID;
  double rho_ = 0.0;
  double mean_ = 0.0;
  int trials_ = 0;
  double alpha_ = 0.0;
  double beta_ = 0.0;
  double pi_ = 0.0;
  double thinning_param_ = 0.0;
  std::optional<CountDistribution> marginal_;
  std::optional<CountDistribution> innovation_;
  // Conditional laws of the two BinAR thinnings, indexed by the count thinned.
  std::shared_ptr<const Tables> tables_;
};

/*!
 * Builds the process the experiments use for a target marginal (family,
 * mean, dispersion index, n) and dependence rho.
 *
 * rho = 0 gives iid draws. Otherwise Poisson -> PoiINAR1, NegBinomial ->
 * NBIINAR1, Binomial -> BinAR1, ZIPoisson/Good -> INAR(1) whose innovations are
 * of that family with mean (1-rho) mu and dispersion I (1+rho) - rho, and
 * BetaBinomial/ZIBinomial -> BB-/ZIB-AR(1) whose thinning dispersion matches
 * the marginal dispersion index.
 */
ProcessModel model_for_target(Family family, double mean, double dispersion,
                              std::optional<int> trials, double rho);

// Marginal moments implied by a BinAR-type model with thinnings whose
// conditional variance is c1 x + c2 x^2.
double binar_marginal_variance(const ProcessModel& model);

struct ScenarioDGP {
  ProcessModel in_control;
  std::optional<ProcessModel> out_of_control;
  // First time index governed by the out-of-control model.
  long change_point = 1;

  const ProcessModel& model_at(long t) const {
    return (out_of_control && t >= change_point) ? *out_of_control : in_control;
  }
};

// X_0 is drawn from the in-control stationary law and not returned; the
// series holds X_1..X_length.
std::vector<long> generate(const ScenarioDGP& scenario, long length, RandomStream& rng);

}  // namespace steinewma
