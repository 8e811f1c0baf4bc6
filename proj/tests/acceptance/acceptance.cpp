// Acceptance checks. Prints indented detail lines followed by exactly one
// "PASS <n> ..." or "FAIL <n> ..." line per criterion; exits 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "steinewma/bench.hpp"
#include "steinewma/charts.hpp"
#include "steinewma/cli.hpp"
#include "steinewma/distributions.hpp"
#include "steinewma/processes.hpp"
#include "steinewma/runlength.hpp"

using namespace steinewma;
namespace fs = std::filesystem;

namespace {

const fs::path kGolden{STEINEWMA_GOLDEN_DIR};
const fs::path kConfigs{STEINEWMA_CONFIG_DIR};

int failures = 0;

void detail(const char* text) { std::printf("    %s\n", text); }

template <class... Args>
void detail(const char* fmt, Args... args) {
  std::printf("    ");
  std::printf(fmt, args...);
  std::printf("\n");
}

void verdict(int n, bool ok, const std::string& what, double seconds) {
  std::printf("%s %d %s (%.1f s)\n", ok ? "PASS" : "FAIL", n, what.c_str(), seconds);
  std::fflush(stdout);
  if (!ok) ++failures;
}

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

ScenarioDGP in_control(const ProcessModel& m) { return ScenarioDGP{m, std::nullopt, 1}; }

ArlOptions options(long reps, std::uint64_t seed, unsigned workers = 0) {
  ArlOptions o;
  o.replications = reps;
  o.seed = seed;
  o.workers = workers;
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t chart_index(const Scenario& s, const std::string& id) {
  for (std::size_t i = 0; i < s.charts.size(); ++i) {
    if (s.charts[i].id == id) return i;
  }
  throw std::runtime_error("no chart " + id + " in " + s.id);
}

std::size_t alt_index(const Scenario& s, const std::string& label) {
  for (std::size_t i = 0; i < s.alternatives.size(); ++i) {
    if (s.alternatives[i].label == label) return i;
  }
  throw std::runtime_error("no alternative " + label + " in " + s.id);
}

std::size_t shift_index(const Scenario& s, double shift) {
  for (std::size_t i = 0; i < s.shifts.size(); ++i) {
    if (s.shifts[i] == shift) return i;
  }
  throw std::runtime_error("no shift in " + s.id);
}

// 1. Stein identity at the in-control baselines.
void stein_identity() {
  Timer timer;
  const std::vector<CountDistribution> dists = {
      CountDistribution::poisson(2.0),
      CountDistribution::poisson(5.0),
      from_mean_dispersion(Family::NegBinomial, 2.0, 5.0 / 3.0),
      from_mean_dispersion(Family::NegBinomial, 5.0, 5.0 / 3.0),
      CountDistribution::binomial(10, 0.2),
      CountDistribution::binomial(10, 0.5)};
  double worst = 0.0;
  for (const auto& d : dists) {
    const ChartKind kind = stein_kind_for(d.family());
    for (const auto& f : {WeightFunction::linear(), WeightFunction::root(), WeightFunction::inverse(),
                          WeightFunction::shifted_pmf(d)}) {
      const auto b = stein_baselines(kind, d, f);
      const auto design = ChartDesign::stein_symmetric(d, f, 0.1, 0.5);
      const double mu = d.moments().mean;
      // Poisson: A0 = mu B0; NB: A0 (nu + mu) = mu B0; Bin: A0 (n - mu) = mu B0.
      double lhs = b.a0;
      if (kind == ChartKind::SteinNegBinomial) lhs *= design.size() + mu;
      if (kind == ChartKind::SteinBinomial) lhs *= design.trials() - mu;
      const double rel = std::abs(lhs / (mu * b.b0) - 1.0);
      worst = std::max(worst, rel);
      if (rel >= 1e-10) detail("%s / %s: relative error %.3g", d.describe().c_str(), f.name().c_str(), rel);
    }
  }
  detail("24 (distribution, weight) pairs, worst relative error %.3g (limit 1e-10)", worst);
  verdict(1, worst < 1e-10, "Stein identity at the in-control baselines", timer.seconds());
}

// 2. Stated L values on Poi-INAR(1)(2.1, 0.78) give ARL0 near 370.
void inar_designs() {
  Timer timer;
  const auto model = ProcessModel::poisson_inar1(2.1, 0.78);
  const auto d = *model.stationary_marginal();
  struct Design {
    const char* name;
    ChartDesign design;
  };
  const std::vector<Design> designs = {
      {"ewma L=1.851", ChartDesign::ewma_symmetric(d, 0.1, 1.851)},
      {"stein-linear L=0.848", ChartDesign::stein_symmetric(d, WeightFunction::linear(), 0.1, 0.848)},
      {"stein-root L=0.829", ChartDesign::stein_symmetric(d, WeightFunction::root(), 0.1, 0.829)},
      {"stein-inverse L=0.2994", ChartDesign::stein_symmetric(d, WeightFunction::inverse(), 0.1, 0.2994)},
      {"stein-shifted-pmf L=0.9594",
       ChartDesign::stein_symmetric(d, WeightFunction::shifted_pmf(d), 0.1, 0.9594)}};
  bool ok = true;
  for (const auto& x : designs) {
    const auto est = estimate_arl(x.design, in_control(model), options(10000, 20240517));
    const double z = (est.arl - 370.0) / est.se;
    const bool pass = std::abs(z) <= 3.0 && est.censored == 0;
    ok = ok && pass;
    detail("%-28s ARL0 %7.1f +/- %4.1f  z = %+.2f  %s", x.name, est.arl, est.se, z, pass ? "ok" : "OUT");
  }
  verdict(2, ok, "Poi-INAR(1) EWMA/Stein designs: ARL0 within 3 SE of 370 (R = 1e4)", timer.seconds());
}

// 3. Exact Markov-chain ARL of the c-chart.
void exact_markov() {
  Timer timer;
  const auto model = ProcessModel::poisson_inar1(2.1, 0.78);
  const ControlLimits limits{0.0, 6.0};
  const double exact = exact_arl_markov(limits, model);
  const auto est =
      estimate_arl(ChartDesign::shewhart(*model.stationary_marginal(), limits), in_control(model), options(100000, 3));
  const double z = (est.arl - exact) / est.se;
  detail("exact %.6f (want 326.2 +/- 0.5)", exact);
  detail("simulated %.2f +/- %.2f with R = 1e5, z = %+.2f", est.arl, est.se, z);
  const bool ok = std::abs(exact - 326.2) <= 0.5 && std::abs(z) <= 3.0;
  verdict(3, ok, "c-chart [0,6] on Poi-INAR(1): exact Markov ARL and simulation", timer.seconds());
}

// 4. Designated table cells.
void table_cells() {
  Timer timer;
  struct Cell {
    const char* scenario;
    const char* chart;
    const char* alt;
    double shift;
  };
  const std::vector<Cell> cells = {
      {"table1a-mu2", "ewma", "Bin", -0.25},
      {"table1a-mu2", "ewma", "Bin", 0.0},
      {"table1a-mu2", "ewma", "Bin", 0.25},
      {"table1a-mu2", "stein-linear", "BB", 0.0},
      {"table1a-mu2", "stein-root", "ZIB", 0.0},
      {"table2a-mu2", "stein-linear", "NB", -0.25},
      {"table2a-mu2", "stein-linear", "NB", 0.0},
      {"table2a-mu2", "stein-linear", "NB", 0.25},
      {"table2a-mu2", "stein-linear", "oNB", 0.0},
      {"table2a-mu2", "stein-linear", "ZIP", 0.0},
      {"table2b-mu5", "stein-linear", "NB", 0.0},
      {"table3a-mu2", "stein-shifted-pmf", "Good(1/2)", 0.0},
      {"table3a-mu5", "stein-inverse", "Good(3/4)", 0.0},
      {"table4a-mu2", "stein-shifted-pmf", "Poi", -0.25},
      {"table4a-mu2", "stein-shifted-pmf", "Poi", 0.0},
      {"table4a-mu2", "stein-shifted-pmf", "Poi", 0.25},
      {"table4b-mu2", "stein-shifted-pmf", "Poi", 0.0},
      // Model-ambiguous rows: reported only.
      {"table2b-mu2", "stein-linear", "ZIP", 0.0},
      {"table1b-mu2", "stein-root", "BB", 0.0},
  };
  bool ok = true;
  int hard = 0;
  for (const auto& c : cells) {
    const Scenario& s = find_scenario(c.scenario);
    const auto r = run_cell(s, alt_index(s, c.alt), chart_index(s, c.chart), shift_index(s, c.shift));
    const ReferenceValue ref = *r.reference;
    std::string status;
    double z = 0.0;
    bool pass;
    if (ref.exceeds) {
      pass = r.estimate.lower_bound() || r.estimate.arl > 1e4;
      status = pass ? "ok (>1e4)" : "OUT";
    } else {
      // Both the reference and our value are R = 1e4 estimates.
      z = (r.estimate.arl - ref.arl) / r.estimate.se;
      pass = std::abs(z) <= 3.0 * std::sqrt(2.0);
      status = pass ? "ok" : "OUT";
    }
    if (r.approximate) {
      status += " [approximate, not scored]";
    } else {
      ok = ok && pass;
      ++hard;
    }
    detail("%-12s %-28s %s%8.1f +/- %6.1f  ref %s%.1f  z = %+.2f  %s", c.scenario, r.cell.c_str(),
           r.estimate.lower_bound() ? ">=" : "  ", r.estimate.arl, r.estimate.se, ref.exceeds ? ">" : "", ref.arl,
           z, status.c_str());
  }
  detail("tolerance: |z| <= 3 sqrt(2), the SE of a difference of two R = 1e4 estimates");
  verdict(4, ok && hard >= 12, std::to_string(hard) + " scored table cells reproduced at R = 1e4", timer.seconds());
}

// 5. Long paths of the three INAR-type processes.
void process_fidelity() {
  Timer timer;
  bool ok = true;
  std::uint64_t seed = 500;
  for (double mu : {2.0, 5.0}) {
    const double rho = 0.5;
    struct Case {
      ProcessModel model;
      double dispersion;
      std::optional<int> n;
    };
    const std::vector<Case> cases = {
        {ProcessModel::poisson_inar1(mu, rho), 1.0, std::nullopt},
        {model_for_target(Family::NegBinomial, mu, 5.0 / 3.0, std::nullopt, rho), 5.0 / 3.0, std::nullopt},
        {ProcessModel::binar1(10, mu, rho), 1.0, 10}};
    for (const auto& c : cases) {
      RandomStream rng(++seed);
      const auto x = generate(in_control(c.model), 1000000, rng);
      long double sum = 0.0L;
      for (long v : x) sum += v;
      const double mean = static_cast<double>(sum / x.size());
      long double c0 = 0.0L, c1 = 0.0L;
      for (std::size_t i = 0; i < x.size(); ++i) {
        c0 += (x[i] - mean) * (x[i] - mean);
        if (i > 0) c1 += (x[i] - mean) * (x[i - 1] - mean);
      }
      const double var = static_cast<double>(c0 / x.size());
      const double acf1 = static_cast<double>(c1 / c0);
      const double di = c.n ? *c.n * var / (mean * (*c.n - mean)) : var / mean;
      const bool pass = std::abs(mean - mu) <= 0.01 * mu && std::abs(di - c.dispersion) <= 0.02 * c.dispersion &&
                        std::abs(acf1 - rho) <= 0.02;
      ok = ok && pass;
      detail("%-40s mean %.4f  I %.4f (target %.4f)  acf1 %.4f  %s", c.model.describe().c_str(), mean, di,
             c.dispersion, acf1, pass ? "ok" : "OUT");
    }
  }
  verdict(5, ok, "1e6-step paths: mean, dispersion index and lag-1 ACF", timer.seconds());
}

// 6. Geometric run lengths for iid Shewhart charts; 1 / P(alarm) frozen from scipy.
void geometric_oracle() {
  Timer timer;
  struct Case {
    const char* name;
    CountDistribution dist;
    ControlLimits limits;
    double arl;
  };
  const std::vector<Case> cases = {
      {"Poi(2), X > 6", CountDistribution::poisson(2.0), {0.0, 6.0}, 220.5652611719696},
      {"Poi(1), X > 3", CountDistribution::poisson(1.0), {0.0, 3.0}, 52.66440584635392},
      {"Poi(5), X < 1 or X > 9", CountDistribution::poisson(5.0), {1.0, 9.0}, 25.929572378926103},
      {"Bin(10,0.2), X > 5", CountDistribution::binomial(10, 0.2), {0.0, 5.0}, 157.00109323001232},
      {"NB(3,0.6), X > 8", CountDistribution::negative_binomial(3.0, 0.6), {0.0, 8.0}, 168.7919144081858}};
  bool ok = true;
  for (const auto& c : cases) {
    const auto est = estimate_arl(ChartDesign::shewhart(c.dist, c.limits), in_control(ProcessModel::iid(c.dist)),
                                  options(10000, 61));
    const double z = (est.arl - c.arl) / est.se;
    const bool pass = std::abs(z) <= 3.0;
    ok = ok && pass;
    detail("%-24s 1/P = %9.4f  simulated %8.2f +/- %5.2f  z = %+.2f  %s", c.name, c.arl, est.arl, est.se, z,
           pass ? "ok" : "OUT");
  }
  verdict(6, ok, "iid Shewhart charts: simulated ARL vs 1/P(alarm), R = 1e4", timer.seconds());
}

int cli(std::vector<std::string> args, std::string& out) {
  args.insert(args.begin(), "steinewma");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream o, e;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), o, e);
  out = o.str();
  return code;
}

// 7. Bit-identical results across runs and worker counts, and against golden files.
void determinism() {
  Timer timer;
  bool ok = true;
  const auto model = ProcessModel::poisson_inar1(2.1, 0.78);
  const auto d = *model.stationary_marginal();
  const auto design = ChartDesign::stein_symmetric(d, WeightFunction::root(), 0.1, 0.829);
  const auto base = estimate_arl(design, in_control(model), options(5000, 99, 1));
  for (unsigned w : {1u, 2u, 4u, 8u, 0u}) {
    const auto est = estimate_arl(design, in_control(model), options(5000, 99, w));
    const bool same = est.arl == base.arl && est.se == base.se;
    ok = ok && same;
    detail("estimate_arl workers=%u: %.17g +/- %.17g %s", w, est.arl, est.se, same ? "identical" : "DIFFERS");
  }

  const std::string golden_arl = slurp(kGolden / "arl-stein-linear.json");
  for (const char* w : {"1", "3", "0"}) {
    std::string out;
    cli({"--seed", "7", "--replications", "2000", "--workers", w, "arl", "--config",
         (kConfigs / "poinar-stein-linear.json").string()},
        out);
    const bool same = out == golden_arl;
    ok = ok && same;
    detail("arl golden file, workers=%s: %s", w, same ? "identical" : "DIFFERS");
  }

  std::string series;
  cli({"simulate", "--config", (kGolden / "poinar-shift.json").string(), "--length", "200"}, series);
  const bool series_same = series == slurp(kGolden / "poinar-series.csv");
  ok = ok && series_same;
  detail("simulated series golden file: %s", series_same ? "identical" : "DIFFERS");
  for (const char* name : {"c-chart", "ewma", "stein-linear", "stein-root", "stein-inverse", "stein-shifted-pmf"}) {
    const std::string cfg = (kConfigs / (std::string("poinar-") + name + ".json")).string();
    std::string first, second;
    cli({"monitor", "--config", cfg, (kGolden / "poinar-series.csv").string()}, first);
    cli({"monitor", "--config", cfg, (kGolden / "poinar-series.csv").string()}, second);
    const bool same = first == second && first == slurp(kGolden / (std::string("monitor-") + name + ".csv"));
    ok = ok && same;
    detail("monitor golden file %-18s %s", name, same ? "identical" : "DIFFERS");
  }
  verdict(7, ok, "determinism across runs, worker counts and golden files", timer.seconds());
}

}  // namespace

int main() {
  try {
    stein_identity();
    inar_designs();
    exact_markov();
    table_cells();
    process_fidelity();
    geometric_oracle();
    determinism();
  } catch (const std::exception& e) {
    std::printf("FAIL acceptance aborted: %s\n", e.what());
    return 1;
  }
  std::printf("%s: %d criteria failed\n", failures == 0 ? "OK" : "NOT OK", failures);
  return failures == 0 ? 0 : 1;
}
