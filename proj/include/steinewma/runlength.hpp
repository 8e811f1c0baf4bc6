#pragma once

#include <cstdint>
#include <vector>

#include "steinewma/charts.hpp"
#include "steinewma/processes.hpp"
#include "steinewma/rng.hpp"

namespace steinewma {

inline constexpr long kDefaultCap = 100000;
inline constexpr int kDefaultReplications = 10000;

struct RunLength {
  long length;
  bool censored;
};

// Zero-state run: X_0 from the in-control stationary law (not plotted), chart
// at its initial state, X_t from scenario.model_at(t) for t >= 1.
RunLength simulate_run_length(const ChartDesign& design, const ScenarioDGP& scenario,
                              RandomStream& rng, long cap = kDefaultCap);

struct ArlEstimate {
  double arl = 0.0;
  double se = 0.0;
  long replications = 0;
  long censored = 0;
  long cap = kDefaultCap;

  // Censored runs were counted at the cap, so the mean underestimates the ARL.
  bool lower_bound() const { return censored > 0; }
};

struct ArlOptions {
  long replications = kDefaultReplications;
  std::uint64_t seed = 1;
  long cap = kDefaultCap;
  // 0 picks std::thread::hardware_concurrency().
  unsigned workers = 0;
};

// Replication r always uses RandomStream(seed, r), and the reduction runs in
// replication order, so the result does not depend on `workers`.
ArlEstimate estimate_arl(const ChartDesign& design, const ScenarioDGP& scenario,
                         const ArlOptions& options = {});

// Raw run lengths, in replication order.
std::vector<RunLength> simulate_run_lengths(const ChartDesign& design, const ScenarioDGP& scenario,
                                            const ArlOptions& options = {});

ArlEstimate summarize_run_lengths(const std::vector<RunLength>& runs, long cap);

struct CalibrationOptions {
  double target = 370.0;
  // Accept once |ARL - target| <= tolerance_se * SE.
  double tolerance_se = 2.0;
  // Stop once the bracket is narrower than this.
  double resolution = 1e-4;
  // First upper bracket; 0 picks 0.1 for Stein charts and the asymptotic
  // in-control standard deviation of the EWMA statistic otherwise.
  double initial_upper = 0.0;
  double max_half_width = 1e3;
  // Runs are censored at min(arl.cap, cap_multiple * target) while searching.
  // A censored mean is a lower bound, so decisions with ARL >= target stay valid.
  double cap_multiple = 50.0;
  int max_iterations = 200;
  ArlOptions arl;
};

struct CalibrationPoint {
  double half_width;
  ArlEstimate estimate;
};

struct CalibrationResult {
  double half_width = 0.0;
  ArlEstimate achieved;
  int iterations = 0;
  // True if the tolerance was met; false if the search stopped on resolution.
  bool within_tolerance = false;
  double bracket_lower = 0.0;
  double bracket_upper = 0.0;
  std::vector<CalibrationPoint> history;
};

/*!
 * Finds L such that the symmetric limits center -/+ L give an in-control ARL
 * close to options.target.
 *
 * Bisection on [0, L_hi], with L_hi doubled until ARL(L_hi) >= target. Every
 * ARL evaluation reuses options.arl.seed (common random numbers), which keeps
 * the estimated ARL monotone in L for practical purposes. The limits of
 * `design` are ignored. Throws FeasibilityError for target <= 1 and
 * CalibrationError if no L <= max_half_width reaches the target.
 */
CalibrationResult calibrate_limit(const ChartDesign& design, const ScenarioDGP& in_control,
                                  const CalibrationOptions& options = {});

/*!
 * Exact zero-state ARL of a Shewhart chart on a Markov count process.
 *
 * X_0 follows the stationary marginal and is not plotted; X_1, X_2, ... are
 * compared with the limits. Solves (I - Q) a = 1 on the non-alarm states by
 * dense LU. States are truncated at support_truncation(marginal, tail_mass).
 * Requires a closed-form stationary marginal. Throws NumericalError if the
 * alarm region cannot be reached.
 */
double exact_arl_markov(const ControlLimits& limits, const ProcessModel& model,
                        double tail_mass = 1e-12);

}  // namespace steinewma
