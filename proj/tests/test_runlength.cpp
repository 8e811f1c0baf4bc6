#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "steinewma/errors.hpp"
#include "steinewma/runlength.hpp"

using namespace steinewma;

namespace {

ScenarioDGP in_control(const ProcessModel& m) { return ScenarioDGP{m, std::nullopt, 1}; }

ArlOptions opts(long reps, std::uint64_t seed, unsigned workers = 0, long cap = kDefaultCap) {
  ArlOptions o;
  o.replications = reps;
  o.seed = seed;
  o.workers = workers;
  o.cap = cap;
  return o;
}

// Geometric run lengths of iid Shewhart charts: 1 / P(alarm), computed
// offline with scipy.stats and frozen here.
struct GeometricCase {
  const char* name;
  CountDistribution dist;
  ControlLimits limits;
  double arl;
};

std::vector<GeometricCase> geometric_cases() {
  return {
      {"Poi(2), X > 6", CountDistribution::poisson(2.0), {0.0, 6.0}, 220.5652611719696},
      {"Poi(1), X > 3", CountDistribution::poisson(1.0), {0.0, 3.0}, 52.66440584635392},
      {"Poi(5), X < 1 or X > 9", CountDistribution::poisson(5.0), {1.0, 9.0}, 25.929572378926103},
      {"Bin(10,0.2), X > 5", CountDistribution::binomial(10, 0.2), {0.0, 5.0}, 157.00109323001232},
      {"NB(3,0.6), X > 8", CountDistribution::negative_binomial(3.0, 0.6), {0.0, 8.0}, 168.7919144081858},
  };
}

// Zero-state Markov-chain ARLs from an independent numpy implementation.
struct MarkovCase {
  const char* name;
  ProcessModel model;
  ControlLimits limits;
  double arl;
};

std::vector<MarkovCase> markov_cases() {
  return {
      {"PoiINAR(2.1, 0.78), [0,6]", ProcessModel::poisson_inar1(2.1, 0.78), {0.0, 6.0}, 326.20240945798537},
      {"NBIINAR(2, 3, 0.5), [0,7]", ProcessModel::nb_iinar1(2.0, 3.0, 0.5), {0.0, 7.0}, 105.68556555280675},
      {"BinAR(10, 2, 0.5), [0,5]", ProcessModel::binar1(10, 2.0, 0.5), {0.0, 5.0}, 187.6742975122874},
  };
}

}  // namespace

TEST_CASE("run length edge cases") {
  const auto poi = CountDistribution::poisson(2.0);
  const auto dgp = in_control(ProcessModel::iid(poi));

  RandomStream rng(7);
  const auto never = simulate_run_length(ChartDesign::shewhart(poi, ControlLimits::unbounded()), dgp, rng, 250);
  CHECK(never.censored);
  CHECK(never.length == 250);

  // UCL below the support minimum: every observation alarms.
  const auto always = ChartDesign::shewhart(poi, {-2.0, -1.0});
  const auto est = estimate_arl(always, dgp, opts(100, 3));
  CHECK(est.arl == 1.0);
  CHECK(est.se == 0.0);
  CHECK(est.censored == 0);

  const auto capped = estimate_arl(ChartDesign::shewhart(poi, ControlLimits::unbounded()), dgp, opts(20, 3, 2, 40));
  CHECK(capped.arl == 40.0);
  CHECK(capped.censored == 20);
  CHECK(capped.lower_bound());

  CHECK_THROWS_AS(estimate_arl(always, dgp, opts(0, 1)), ParameterError);
  CHECK_THROWS_AS(estimate_arl(always, dgp, opts(10, 1, 1, 0)), ParameterError);
}

TEST_CASE("iid Shewhart ARL matches the geometric law") {
  for (const auto& c : geometric_cases()) {
    CAPTURE(c.name);
    const auto model = ProcessModel::iid(c.dist);
    CHECK(exact_arl_markov(c.limits, model) == doctest::Approx(c.arl).epsilon(1e-9));

    const auto est = estimate_arl(ChartDesign::shewhart(c.dist, c.limits), in_control(model), opts(100000, 11));
    CHECK(est.censored == 0);
    CHECK(std::abs(est.arl - c.arl) <= 3.0 * est.se);
    // Geometric: sd = sqrt(ARL (ARL - 1)).
    const double sd_expected = std::sqrt(c.arl * (c.arl - 1.0));
    CHECK(est.se * std::sqrt(100000.0) == doctest::Approx(sd_expected).epsilon(0.03));
  }
}

TEST_CASE("Markov chain ARL of Shewhart charts on INAR-type processes") {
  for (const auto& c : markov_cases()) {
    CAPTURE(c.name);
    CHECK(exact_arl_markov(c.limits, c.model) == doctest::Approx(c.arl).epsilon(1e-8));
    const auto marginal = *c.model.stationary_marginal();
    const auto est = estimate_arl(ChartDesign::shewhart(marginal, c.limits), in_control(c.model), opts(100000, 29));
    CHECK(std::abs(est.arl - c.arl) <= 3.0 * est.se);
  }
  // Tail truncation barely matters once it is below the alarm probabilities.
  const auto cases = markov_cases();
  const auto& c = cases.front();
  CHECK(exact_arl_markov(c.limits, c.model, 1e-15) == doctest::Approx(c.arl).epsilon(1e-9));
}

TEST_CASE("exact ARL errors") {
  const auto model = ProcessModel::poisson_inar1(2.0, 0.5);
  CHECK_THROWS_AS(exact_arl_markov(ControlLimits::unbounded(), model), NumericalError);
  CHECK_THROWS_AS(exact_arl_markov({0.0, 10.0}, ProcessModel::binar1(10, 2.0, 0.5)), NumericalError);
  CHECK_THROWS_AS(exact_arl_markov({3.0, 1.0}, model), ParameterError);
  const auto zip_innov = from_mean_dispersion(Family::ZIPoisson, 1.0, 2.0);
  CHECK_THROWS_AS(exact_arl_markov({0.0, 6.0}, ProcessModel::generic_inar1(zip_innov, 0.5)), ParameterError);
  // Everything alarms: ARL is exactly one.
  CHECK(exact_arl_markov({-2.0, -1.0}, model) == 1.0);
}

TEST_CASE("results do not depend on the worker count") {
  const auto model = ProcessModel::poisson_inar1(2.1, 0.78);
  const auto marginal = *model.stationary_marginal();
  const auto design = ChartDesign::stein_symmetric(marginal, WeightFunction::linear(), 0.1, 0.848);
  const auto base = simulate_run_lengths(design, in_control(model), opts(2000, 5, 1));
  const auto est1 = estimate_arl(design, in_control(model), opts(2000, 5, 1));
  for (unsigned w : {3u, 8u}) {
    CAPTURE(w);
    const auto runs = simulate_run_lengths(design, in_control(model), opts(2000, 5, w));
    REQUIRE(runs.size() == base.size());
    bool same = true;
    for (std::size_t i = 0; i < runs.size(); ++i) same = same && runs[i].length == base[i].length;
    CHECK(same);
    const auto est = estimate_arl(design, in_control(model), opts(2000, 5, w));
    CHECK(est.arl == est1.arl);
    CHECK(est.se == est1.se);
  }
  // A different seed gives a different sample.
  CHECK(estimate_arl(design, in_control(model), opts(2000, 6, 1)).arl != est1.arl);
}

TEST_CASE("out-of-control scenarios shorten the run length") {
  const auto ic = ProcessModel::poisson_inar1(2.0, 0.5);
  const auto oc = ProcessModel::poisson_inar1(3.0, 0.5);
  const auto design = ChartDesign::shewhart(*ic.stationary_marginal(), {0.0, 6.0});
  const auto a0 = estimate_arl(design, in_control(ic), opts(4000, 2));
  const auto a1 = estimate_arl(design, ScenarioDGP{ic, oc, 1}, opts(4000, 2));
  CHECK(a1.arl < 0.5 * a0.arl);
  // A late change point adds roughly its delay when no in-control alarm occurs first.
  const auto late = estimate_arl(design, ScenarioDGP{ic, oc, 50}, opts(4000, 2));
  CHECK(late.arl > a1.arl);
  CHECK(late.arl < a1.arl + 50.0);
}

TEST_CASE("calibration") {
  const auto model = ProcessModel::poisson_inar1(2.1, 0.78);
  const auto marginal = *model.stationary_marginal();
  CalibrationOptions co;
  co.arl = opts(10000, 20240517);

  SUBCASE("EWMA on Poi-INAR lands near L = 1.851") {
    const auto design = ChartDesign::ewma_symmetric(marginal, 0.1, 1.0);
    const auto res = calibrate_limit(design, in_control(model), co);
    CHECK(res.within_tolerance);
    CHECK(res.half_width == doctest::Approx(1.851).epsilon(0.03 / 1.851));
    CHECK(std::abs(res.achieved.arl - 370.0) <= 2.0 * res.achieved.se);
    // Common random numbers: ARL is monotone in L across the search.
    auto hist = res.history;
    std::sort(hist.begin(), hist.end(), [](const auto& a, const auto& b) { return a.half_width < b.half_width; });
    for (std::size_t i = 1; i < hist.size(); ++i) CHECK(hist[i].estimate.arl >= hist[i - 1].estimate.arl);
  }

  SUBCASE("Stein chart with linear weight") {
    const auto design = ChartDesign::stein_symmetric(marginal, WeightFunction::linear(), 0.1, 1.0);
    const auto res = calibrate_limit(design, in_control(model), co);
    CHECK(res.within_tolerance);
    CHECK(res.half_width == doctest::Approx(0.848).epsilon(0.02 / 0.848));
  }

  SUBCASE("infeasible targets") {
    const auto design = ChartDesign::ewma_symmetric(marginal, 0.1, 1.0);
    co.target = 1.0;
    CHECK_THROWS_AS(calibrate_limit(design, in_control(model), co), FeasibilityError);
    co.target = 0.5;
    CHECK_THROWS_AS(calibrate_limit(design, in_control(model), co), FeasibilityError);
  }

  SUBCASE("unreachable target") {
    const auto design = ChartDesign::ewma_symmetric(marginal, 0.1, 1.0);
    co.arl.replications = 500;
    co.max_half_width = 0.5;
    co.initial_upper = 0.2;
    CHECK_THROWS_AS(calibrate_limit(design, in_control(model), co), CalibrationError);
  }

  SUBCASE("deterministic") {
    const auto design = ChartDesign::ewma_symmetric(marginal, 0.2, 1.0);
    co.arl.replications = 2000;
    co.target = 100.0;
    const auto a = calibrate_limit(design, in_control(model), co);
    co.arl.workers = 1;
    const auto b = calibrate_limit(design, in_control(model), co);
    CHECK(a.half_width == b.half_width);
    CHECK(a.achieved.arl == b.achieved.arl);
    CHECK(a.iterations == b.iterations);
  }
}
