#include "steinewma/runlength.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "steinewma/errors.hpp"

namespace steinewma {

RunLength simulate_run_length(const ChartDesign& design, const ScenarioDGP& scenario,
                              RandomStream& rng, long cap) {
  if (cap < 1) throw ParameterError("run-length cap must be >= 1");
  long x = scenario.in_control.init_stationary(rng);
  ChartState state = init_chart(design);
  for (long t = 1; t <= cap; ++t) {
    x = scenario.model_at(t).step(x, rng);
    const ChartStep step = update(design, state, x);
    if (step.alarm) return {t, false};
    state = step.state;
  }
  return {cap, true};
}

std::vector<RunLength> simulate_run_lengths(const ChartDesign& design, const ScenarioDGP& scenario,
                                            const ArlOptions& options) {
  if (options.replications < 1) throw ParameterError("replications must be >= 1");
  if (options.cap < 1) throw ParameterError("run-length cap must be >= 1");
  const auto reps = static_cast<std::size_t>(options.replications);
  std::vector<RunLength> runs(reps, RunLength{0, false});

  unsigned workers = options.workers == 0 ? std::thread::hardware_concurrency() : options.workers;
  workers = std::clamp<unsigned>(workers, 1u, static_cast<unsigned>(std::min<std::size_t>(reps, 256)));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    try {
      for (std::size_t r = next.fetch_add(1); r < reps; r = next.fetch_add(1)) {
        RandomStream rng = RandomStream::for_replication(options.seed, r);
        runs[r] = simulate_run_length(design, scenario, rng, options.cap);
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next.store(reps);
    }
  };

  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  return runs;
}

ArlEstimate summarize_run_lengths(const std::vector<RunLength>& runs, long cap) {
  ArlEstimate est;
  est.cap = cap;
  est.replications = static_cast<long>(runs.size());
  if (runs.empty()) return est;
  // Two-pass mean/variance in replication order; exact sums fit in long double.
  long double sum = 0.0L;
  for (const auto& r : runs) {
    sum += r.length;
    if (r.censored) ++est.censored;
  }
  const long double mean = sum / runs.size();
  long double ss = 0.0L;
  for (const auto& r : runs) ss += (r.length - mean) * (r.length - mean);
  est.arl = static_cast<double>(mean);
  if (runs.size() > 1) {
    const long double var = ss / (runs.size() - 1);
    est.se = static_cast<double>(std::sqrt(var / runs.size()));
  }
  return est;
}

ArlEstimate estimate_arl(const ChartDesign& design, const ScenarioDGP& scenario,
                         const ArlOptions& options) {
  return summarize_run_lengths(simulate_run_lengths(design, scenario, options), options.cap);
}

CalibrationResult calibrate_limit(const ChartDesign& design, const ScenarioDGP& in_control,
                                  const CalibrationOptions& options) {
  if (!(options.target > 1.0)) {
    throw FeasibilityError("target ARL must exceed 1 (it would require L = 0, which leaves no in-control band)");
  }
  double initial_upper = options.initial_upper;
  if (initial_upper <= 0.0) {
    const double var0 = design.in_control().moments().variance;
    const double lambda = design.lambda();
    initial_upper = is_stein(design.kind()) ? 0.1 : std::sqrt(var0 * lambda / (2.0 - lambda));
  }
  if (!(options.max_half_width >= initial_upper)) {
    throw ParameterError("calibration needs initial_upper <= max_half_width");
  }
  if (!(options.resolution > 0.0)) throw ParameterError("calibration resolution must be positive");
  if (!(options.cap_multiple >= 1.0)) throw ParameterError("calibration cap_multiple must be >= 1");

  ArlOptions arl = options.arl;
  arl.cap = std::min(arl.cap, static_cast<long>(std::ceil(options.cap_multiple * options.target)));

  CalibrationResult result;
  auto evaluate = [&](double half_width) {
    const ArlEstimate est = estimate_arl(design.with_half_width(half_width), in_control, arl);
    result.history.push_back({half_width, est});
    ++result.iterations;
    return est;
  };
  auto close_enough = [&](const ArlEstimate& est) {
    return std::abs(est.arl - options.target) <= options.tolerance_se * est.se;
  };
  auto finish = [&](double half_width, const ArlEstimate& est, bool ok) {
    result.half_width = half_width;
    result.achieved = est;
    result.within_tolerance = ok;
    return result;
  };

  double lo = 0.0;
  double hi = initial_upper;
  ArlEstimate hi_est = evaluate(hi);
  while (hi_est.arl < options.target) {
    if (close_enough(hi_est)) return finish(hi, hi_est, true);
    lo = hi;
    hi *= 2.0;
    if (hi > options.max_half_width) {
      throw CalibrationError("target ARL " + std::to_string(options.target) +
                             " not reached for L <= " + std::to_string(options.max_half_width));
    }
    hi_est = evaluate(hi);
  }
  if (close_enough(hi_est)) {
    result.bracket_lower = lo;
    result.bracket_upper = hi;
    return finish(hi, hi_est, true);
  }

  std::optional<ArlEstimate> lo_est;
  while (hi - lo > options.resolution && result.iterations < options.max_iterations) {
    const double mid = 0.5 * (lo + hi);
    const ArlEstimate mid_est = evaluate(mid);
    if (close_enough(mid_est)) {
      result.bracket_lower = lo;
      result.bracket_upper = hi;
      return finish(mid, mid_est, true);
    }
    if (mid_est.arl < options.target) {
      lo = mid;
      lo_est = mid_est;
    } else {
      hi = mid;
      hi_est = mid_est;
    }
  }
  result.bracket_lower = lo;
  result.bracket_upper = hi;
  if (lo_est && std::abs(lo_est->arl - options.target) < std::abs(hi_est.arl - options.target)) {
    return finish(lo, *lo_est, false);
  }
  return finish(hi, hi_est, false);
}

double exact_arl_markov(const ControlLimits& limits, const ProcessModel& model, double tail_mass) {
  const auto& marginal = model.stationary_marginal();
  if (!marginal) {
    throw ParameterError("exact_arl_markov needs a process with a closed-form stationary marginal, got " +
                         std::string(process_kind_name(model.kind())));
  }
  if (std::isnan(limits.lower) || std::isnan(limits.upper) || limits.lower > limits.upper) {
    throw ParameterError("exact_arl_markov needs LCL <= UCL");
  }
  long top = marginal->support_truncation(tail_mass);
  const auto bound = model.upper_bound();
  if (!bound && std::isfinite(limits.upper)) {
    top = std::max(top, static_cast<long>(std::floor(limits.upper)) + 1);
  }

  std::vector<long> in_control_states;
  for (long x = 0; x <= top; ++x) {
    if (x >= limits.lower && x <= limits.upper) in_control_states.push_back(x);
  }
  const bool reachable = limits.lower > 0.0 || (bound ? limits.upper < *bound : std::isfinite(limits.upper));
  if (!reachable) throw NumericalError("alarm region is unreachable; the ARL is infinite");
  if (in_control_states.empty()) return 1.0;

  const auto m = static_cast<Eigen::Index>(in_control_states.size());
  Eigen::MatrixXd system = Eigen::MatrixXd::Identity(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto row = model.transition_pmf(in_control_states[i], top);
    for (Eigen::Index j = 0; j < m; ++j) system(i, j) -= row[in_control_states[j]];
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(system);
  if (!(std::abs(lu.determinant()) > 1e-300)) throw NumericalError("singular run-length system");
  const Eigen::VectorXd a = lu.solve(Eigen::VectorXd::Ones(m));
  if (!a.allFinite() || (a.array() < 1.0 - 1e-9).any()) {
    throw NumericalError("run-length system is numerically unstable");
  }

  long double arl = 1.0L;
  for (long x0 = 0; x0 <= top; ++x0) {
    const double p0 = marginal->pmf(x0);
    if (p0 == 0.0) continue;
    const auto row = model.transition_pmf(x0, top);
    long double inner = 0.0L;
    for (Eigen::Index j = 0; j < m; ++j) inner += row[in_control_states[j]] * a(j);
    arl += p0 * inner;
  }
  return static_cast<double>(arl);
}

}  // namespace steinewma
