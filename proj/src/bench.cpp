#include "steinewma/bench.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "steinewma/errors.hpp"

namespace steinewma {

namespace {

constexpr double kExceeds = -1.0;  // printed as ">10^4"

using Row = std::vector<double>;  // ewma(-,0,+), chart 2(-,0,+), chart 3(-,0,+)

ChartSpec ewma_spec(double half_width) {
  ChartSpec c;
  c.id = "ewma";
  c.type = ChartType::Ewma;
  c.half_width = half_width;
  return c;
}

ChartSpec stein_spec(WeightKind weight, double half_width) {
  ChartSpec c;
  c.type = ChartType::Stein;
  c.weight = weight;
  c.half_width = half_width;
  switch (weight) {
    case WeightKind::Linear: c.id = "stein-linear"; break;
    case WeightKind::Root: c.id = "stein-root"; break;
    case WeightKind::Inverse: c.id = "stein-inverse"; break;
    case WeightKind::ShiftedPmf: c.id = "stein-shifted-pmf"; break;
    case WeightKind::Table: c.id = "stein-table"; break;
  }
  return c;
}

std::vector<std::vector<std::optional<ReferenceValue>>> to_reference(const Row& row) {
  std::vector<std::vector<std::optional<ReferenceValue>>> out(3, std::vector<std::optional<ReferenceValue>>(3));
  for (std::size_t chart = 0; chart < 3; ++chart) {
    for (std::size_t shift = 0; shift < 3; ++shift) {
      const double v = row.at(chart * 3 + shift);
      out[chart][shift] = v == kExceeds ? ReferenceValue{1e4, true} : ReferenceValue{v, false};
    }
  }
  return out;
}

struct GridSpec {
  std::string id;
  std::string title;
  Family family;
  double mean0;
  double dispersion0;
  std::optional<int> trials;
  double rho;
  std::vector<ChartSpec> charts;
  std::vector<AlternativeSpec> alternatives;
  std::vector<Row> rows;
};

Scenario make_grid(GridSpec g) {
  Scenario s;
  s.id = std::move(g.id);
  s.title = std::move(g.title);
  s.in_control_family = g.family;
  s.mean0 = g.mean0;
  s.dispersion0 = g.dispersion0;
  s.trials = g.trials;
  s.rho = g.rho;
  s.charts = std::move(g.charts);
  s.alternatives = std::move(g.alternatives);
  for (const auto& row : g.rows) s.references.push_back(to_reference(row));
  return s;
}

std::vector<Scenario> build_scenarios() {
  std::vector<Scenario> out;
  const double third5 = 5.0 / 3.0;

  // Binomial in control (n = 10).
  auto t1 = [&](std::string id, double mu0, double rho, double l_ewma, double l_lin, double l_root,
                std::vector<Row> rows) {
    const bool ar = rho > 0.0;
    out.push_back(make_grid({std::move(id),
                             "Bin(10) in control; ZIB / Bin / BB alternatives, I_B = 5/3",
                             Family::Binomial, mu0, 1.0, 10, rho,
                             {ewma_spec(l_ewma), stein_spec(WeightKind::Linear, l_lin),
                              stein_spec(WeightKind::Root, l_root)},
                             {{"ZIB", Family::ZIBinomial, third5, ar},
                              {"Bin", Family::Binomial, 1.0, false},
                              {"BB", Family::BetaBinomial, third5, ar}},
                             std::move(rows)}));
  };
  t1("table1a-mu2", 2.0, 0.0, 0.7805, 0.534, 0.4235,
     {{69.2, 87.9, 51.6, 22.7, 26.1, 29.2, 16.6, 19.1, 21.9},
      {171.5, 370.2, 99.3, 240.2, 369.5, 550.6, 191.5, 370.6, 671.0},
      {71.5, 90.0, 51.8, 25.9, 29.2, 33.3, 30.8, 40.5, 55.6}});
  t1("table1a-mu5", 5.0, 0.0, 0.974, 0.2115, 0.0511,
     {{69.2, 87.9, 51.6, 18.9, 19.9, 20.6, 12.9, 14.0, 15.5},
      {162.5, 369.5, 164.1, 307.2, 370.1, 443.4, 311.5, 369.5, 417.2},
      {66.7, 88.2, 66.3, 25.1, 26.9, 29.0, 27.4, 28.9, 30.3}});
  t1("table1b-mu2", 2.0, 0.5, 1.191, 0.639, 0.568,
     {{77.9, 73.8, 55.8, 22.9, 24.3, 25.3, 23.8, 26.9, 30.0},
      {384.8, 370.1, 158.0, 247.1, 369.7, 554.4, 211.9, 371.2, 634.3},
      {105.0, 105.7, 77.2, 33.0, 39.5, 47.0, 44.7, 58.9, 77.1}});
  t1("table1b-mu5", 5.0, 0.5, 1.493, 0.225, 0.0528,
     {{30.8, 29.9, 28.0, 7.9, 7.7, 7.3, 7.1, 6.9, 6.5},
      {258.0, 369.1, 257.3, 316.7, 370.9, 424.1, 293.9, 370.9, 421.8},
      {86.3, 96.1, 85.9, 35.3, 37.6, 39.5, 37.9, 39.4, 40.7}});

  // NB in control with I_P = 5/3.
  auto t2 = [&](std::string id, double mu0, double rho, double l_ewma, double l_lin, double l_root,
                std::vector<Row> rows) {
    const bool ar = rho > 0.0;
    out.push_back(make_grid({std::move(id),
                             "NB(I_P = 5/3) in control; ZIP (5/3) / NB / oNB (5/2) alternatives",
                             Family::NegBinomial, mu0, third5, std::nullopt, rho,
                             {ewma_spec(l_ewma), stein_spec(WeightKind::Linear, l_lin),
                              stein_spec(WeightKind::Root, l_root)},
                             {{"ZIP", Family::ZIPoisson, third5, ar},
                              {"NB", Family::NegBinomial, third5, false},
                              {"oNB", Family::NegBinomial, 2.5, false}},
                             std::move(rows)}));
  };
  t2("table2a-mu2", 2.0, 0.0, 1.156, 0.349, 0.3146,
     {{506.6, 462.0, 149.7, 139.4, 257.2, 481.5, 54.2, 81.0, 124.9},
      {605.8, 370.7, 133.1, 172.1, 370.9, 892.2, 154.0, 369.9, 1001.2},
      {171.9, 135.1, 75.6, 45.2, 67.2, 103.8, 52.2, 86.9, 163.2}});
  t2("table2a-mu5", 5.0, 0.0, 1.805, 0.1554, 0.0883,
     {{342.6, 407.5, 261.9, 116.2, 143.9, 170.2, 22.7, 24.7, 26.8},
      {444.7, 370.8, 205.3, 267.3, 369.8, 522.7, 260.0, 370.1, 537.2},
      {130.2, 124.7, 94.8, 42.9, 51.3, 59.1, 55.5, 68.7, 87.3}});
  t2("table2b-mu2", 2.0, 0.5, 1.855, 0.45, 0.4415,
     {{1287.7, 505.7, 238.0, 108.3, 167.0, 266.3, 90.6, 139.7, 219.4},
      {770.9, 369.7, 200.4, 187.4, 370.7, 710.6, 182.7, 370.7, 768.8},
      {288.9, 178.8, 115.2, 61.1, 93.5, 141.8, 75.4, 123.1, 210.1}});
  t2("table2b-mu5", 5.0, 0.5, 2.78, 0.177, 0.1105,
     {{502.7, 408.0, 284.2, 147.8, 178.4, 214.4, 93.6, 110.2, 131.1},
      {510.8, 369.6, 242.5, 278.0, 370.8, 494.2, 276.7, 370.2, 492.8},
      {183.8, 156.4, 124.4, 60.1, 71.6, 83.0, 78.5, 97.1, 122.0}});

  // Poisson in control; Good alternatives.
  auto t3 = [&](std::string id, double mu0, double rho, double l_ewma, double l_inv, double l_pmf,
                std::vector<Row> rows) {
    const bool ar = rho > 0.0;
    out.push_back(make_grid({std::move(id),
                             "Poi in control; Poi / Good (I_P = 3/4) / Good (I_P = 1/2) alternatives",
                             Family::Poisson, mu0, 1.0, std::nullopt, rho,
                             {ewma_spec(l_ewma), stein_spec(WeightKind::Inverse, l_inv),
                              stein_spec(WeightKind::ShiftedPmf, l_pmf)},
                             {{"Poi", Family::Poisson, 1.0, false},
                              {"Good(3/4)", Family::Good, 0.75, ar},
                              {"Good(1/2)", Family::Good, 0.5, ar}},
                             std::move(rows)}));
  };
  const double X = kExceeds;
  t3("table3a-mu2", 2.0, 0.0, 0.877, 0.223, 0.608,
     {{252.6, 369.1, 106.1, 274.6, 368.9, 470.8, 538.9, 370.3, 271.7},
      {622.4, 948.9, 158.5, 96.9, 142.3, 249.5, 90.7, 71.4, 60.5},
      {3611.8, 6346.9, 380.6, 32.3, 42.2, 63.0, 29.1, 26.2, 24.3}});
  t3("table3a-mu5", 5.0, 0.0, 1.388, 0.1775, 0.293,
     {{309.9, 371.4, 185.1, 352.9, 370.5, 398.1, 526.1, 368.7, 268.9},
      {1006.0, 1015.9, 327.2, X, X, X, 228.4, 149.3, 106.4},
      {8154.5, 7882.4, 1168.9, X, X, X, 52.5, 40.1, 33.2}});
  t3("table3b-mu2", 2.0, 0.5, 1.351, 0.2467, 0.7235,
     {{627.2, 371.0, 162.0, 274.8, 370.0, 478.4, 530.0, 370.5, 273.2},
      {2177.5, 814.6, 261.3, 153.7, 242.0, 439.2, 143.5, 108.9, 89.6},
      {X, 2866.0, 581.6, 47.6, 62.4, 92.3, 43.7, 36.7, 33.2}});
  t3("table3b-mu5", 5.0, 0.5, 2.123, 0.1707, 0.345,
     {{432.2, 369.8, 236.3, 332.3, 370.1, 395.3, 514.5, 370.1, 280.7},
      {1369.3, 909.2, 446.1, 2652.2, 4029.5, 5159.4, 226.6, 161.8, 122.0},
      {X, 4264.3, 1402.0, 1856.0, 6087.1, X, 69.8, 53.9, 44.3}});

  // NB in control with I_P = 5/3; less dispersed alternatives.
  auto t4 = [&](std::string id, double mu0, double rho, double l_ewma, double l_inv, double l_pmf,
                std::vector<Row> rows) {
    out.push_back(make_grid({std::move(id),
                             "NB(I_P = 5/3) in control; NB / uNB (I_P = 4/3) / Poi alternatives",
                             Family::NegBinomial, mu0, third5, std::nullopt, rho,
                             {ewma_spec(l_ewma), stein_spec(WeightKind::Inverse, l_inv),
                              stein_spec(WeightKind::ShiftedPmf, l_pmf)},
                             {{"NB", Family::NegBinomial, third5, false},
                              {"uNB", Family::NegBinomial, 4.0 / 3.0, false},
                              {"Poi", Family::Poisson, 1.0, false}},
                             std::move(rows)}));
  };
  t4("table4a-mu2", 2.0, 0.0, 1.156, 0.2215, 0.4163,
     {{605.8, 370.7, 133.1, 240.3, 371.5, 590.6, 367.7, 370.3, 325.2},
      {1531.2, 799.1, 202.7, 280.0, 380.5, 568.9, 315.1, 213.5, 152.7},
      {5998.4, 3237.7, 429.8, 106.1, 128.8, 179.9, 93.7, 70.8, 57.3}});
  t4("table4a-mu5", 5.0, 0.0, 1.805, 0.165, 0.22,
     {{444.7, 370.8, 205.3, 301.9, 369.1, 452.9, 399.3, 369.1, 328.4},
      {1072.6, 840.9, 372.4, 1185.9, 1531.8, 1921.6, 455.4, 313.1, 226.8},
      {4236.6, 3623.7, 986.3, 7006.1, X, X, 132.6, 96.9, 76.5}});
  t4("table4b-mu2", 2.0, 0.5, 1.855, 0.2412, 0.4626,
     {{770.9, 369.7, 200.4, 266.3, 369.8, 514.0, 440.5, 369.8, 293.9},
      {1797.1, 685.4, 315.4, 233.3, 319.1, 441.7, 248.6, 177.5, 137.2},
      {X, 2329.1, 713.9, 103.7, 136.9, 190.5, 87.6, 68.6, 58.2}});
  t4("table4b-mu5", 5.0, 0.5, 2.78, 0.1727, 0.247,
     {{510.8, 369.6, 242.5, 308.7, 370.7, 442.5, 414.8, 370.0, 306.6},
      {1148.0, 700.0, 420.9, 787.5, 973.5, 1222.5, 329.4, 241.2, 191.5},
      {4918.5, 2317.8, 1082.8, 1689.4, 2741.1, 4019.6, 124.0, 96.6, 78.9}});

  // Poi-INAR(1) monitoring designs, in control only.
  {
    Scenario s;
    s.id = "poinar-designs";
    s.title = "Poi-INAR(1) with mu0 = 2.1, rho = 0.78; in-control ARLs";
    s.in_control_family = Family::Poisson;
    s.mean0 = 2.1;
    s.dispersion0 = 1.0;
    s.rho = 0.78;
    ChartSpec c;
    c.id = "c-chart";
    c.type = ChartType::Shewhart;
    c.lambda = 1.0;
    c.limits = {0.0, 6.0};
    s.charts = {c,
                ewma_spec(1.851),
                stein_spec(WeightKind::Linear, 0.848),
                stein_spec(WeightKind::Root, 0.829),
                stein_spec(WeightKind::Inverse, 0.2994),
                stein_spec(WeightKind::ShiftedPmf, 0.9594)};
    s.alternatives = {{"Poi", Family::Poisson, 1.0, false}};
    s.shifts = {0.0};
    std::vector<std::vector<std::optional<ReferenceValue>>> refs;
    for (double v : {326.2, 370.3, 370.5, 370.5, 370.5, 370.2}) refs.push_back({ReferenceValue{v, false}});
    s.references = {refs};
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

ProcessModel Scenario::in_control_model() const {
  return model_for_target(in_control_family, mean0, dispersion0, trials, rho);
}

CountDistribution Scenario::in_control_distribution() const {
  return from_mean_dispersion(in_control_family, mean0, dispersion0, trials);
}

ChartDesign Scenario::design(std::size_t chart) const {
  const ChartSpec& c = charts.at(chart);
  const CountDistribution dist = in_control_distribution();
  switch (c.type) {
    case ChartType::Shewhart:
      return ChartDesign::shewhart(dist, c.limits);
    case ChartType::Ewma:
      return ChartDesign::ewma_symmetric(dist, c.lambda, c.half_width);
    case ChartType::Stein: {
      WeightFunction f = WeightFunction::linear();
      switch (c.weight) {
        case WeightKind::Linear: break;
        case WeightKind::Root: f = WeightFunction::root(); break;
        case WeightKind::Inverse: f = WeightFunction::inverse(); break;
        case WeightKind::ShiftedPmf: f = WeightFunction::shifted_pmf(dist, c.shift); break;
        case WeightKind::Table: throw ParameterError("table weights are not used by built-in scenarios");
      }
      return ChartDesign::stein_symmetric(dist, std::move(f), c.lambda, c.half_width);
    }
  }
  throw ParameterError("unknown chart type");
}

ProcessModel Scenario::alternative_model(std::size_t alt, std::size_t shift) const {
  const AlternativeSpec& a = alternatives.at(alt);
  const double mean = mean0 + shifts.at(shift);
  const std::optional<int> n = is_bounded(a.family) ? trials : std::nullopt;
  return model_for_target(a.family, mean, a.dispersion, n, rho);
}

std::optional<ReferenceValue> Scenario::reference(std::size_t alt, std::size_t chart, std::size_t shift) const {
  if (alt >= references.size() || chart >= references[alt].size() || shift >= references[alt][chart].size()) {
    return std::nullopt;
  }
  return references[alt][chart][shift];
}

std::string format_shift(double shift) {
  if (shift == 0.0) return "0";
  std::ostringstream os;
  os << (shift > 0 ? "+" : "") << shift;
  return os.str();
}

std::string Scenario::cell_id(std::size_t alt, std::size_t chart, std::size_t shift) const {
  return charts.at(chart).id + ":" + alternatives.at(alt).label + ":" + format_shift(shifts.at(shift));
}

const std::vector<Scenario>& builtin_scenarios() {
  static const std::vector<Scenario> scenarios = build_scenarios();
  return scenarios;
}

const Scenario& find_scenario(const std::string& id) {
  for (const auto& s : builtin_scenarios()) {
    if (s.id == id) return s;
  }
  std::string known;
  for (const auto& s : builtin_scenarios()) known += (known.empty() ? "" : ", ") + s.id;
  throw ParameterError("unknown scenario '" + id + "' (known: " + known + ")");
}

CellResult run_cell(const Scenario& scenario, std::size_t alt, std::size_t chart, std::size_t shift,
                    unsigned workers) {
  ScenarioDGP dgp{scenario.in_control_model(), scenario.alternative_model(alt, shift), 1};
  const ChartDesign design = scenario.design(chart);
  ArlOptions opts;
  opts.replications = scenario.replications;
  opts.seed = scenario.seed;
  opts.cap = scenario.cap;
  opts.workers = workers;

  const AlternativeSpec& a = scenario.alternatives.at(alt);
  CellResult r;
  r.scenario_id = scenario.id;
  r.cell = scenario.cell_id(alt, chart, shift);
  r.chart = scenario.charts.at(chart).id;
  r.alternative = a.label;
  r.shift = scenario.shifts.at(shift);
  r.mean = scenario.mean0 + r.shift;
  r.in_control = r.shift == 0.0 && a.family == scenario.in_control_family &&
                 a.dispersion == scenario.dispersion0;
  r.approximate = a.approximate;
  r.estimate = estimate_arl(design, dgp, opts);
  r.reference = scenario.reference(alt, chart, shift);
  return r;
}

std::vector<CellResult> run_scenario(const Scenario& scenario, unsigned workers) {
  std::vector<CellResult> out;
  for (std::size_t a = 0; a < scenario.alternatives.size(); ++a) {
    for (std::size_t c = 0; c < scenario.charts.size(); ++c) {
      for (std::size_t s = 0; s < scenario.shifts.size(); ++s) out.push_back(run_cell(scenario, a, c, s, workers));
    }
  }
  return out;
}

void write_csv(std::ostream& os, const std::vector<CellResult>& cells, bool header) {
  const auto old_precision = os.precision(10);
  if (header) os << "scenario_id,cell,mu,alt_family,arl,se,censored\n";
  for (const auto& c : cells) {
    os << c.scenario_id << ',' << c.cell << ',' << c.mean << ',' << c.alternative << ',' << c.estimate.arl
       << ',' << c.estimate.se << ',' << c.estimate.censored << '\n';
  }
  os.precision(old_precision);
}

void write_text_table(std::ostream& os, const Scenario& scenario, const std::vector<CellResult>& cells) {
  std::map<std::string, const CellResult*> by_cell;
  for (const auto& c : cells) by_cell[c.cell] = &c;

  auto fmt = [](double v, int prec) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(prec) << v;
    return s.str();
  };

  os << scenario.id << ": " << scenario.title << '\n';
  os << "mu0 = " << scenario.mean0 << ", rho = " << scenario.rho << ", R = " << scenario.replications
     << ", seed = " << scenario.seed << "\n\n";

  std::vector<std::string> header{"row", "chart", "L"};
  for (double s : scenario.shifts) header.push_back("mu=" + fmt(scenario.mean0 + s, 2));
  std::vector<std::vector<std::string>> lines{header};
  bool any_approx = false;
  for (std::size_t a = 0; a < scenario.alternatives.size(); ++a) {
    for (std::size_t c = 0; c < scenario.charts.size(); ++c) {
      const ChartSpec& chart = scenario.charts[c];
      std::vector<std::string> line;
      line.push_back(scenario.alternatives[a].label + (scenario.alternatives[a].approximate ? "*" : ""));
      any_approx = any_approx || scenario.alternatives[a].approximate;
      line.push_back(chart.id);
      line.push_back(chart.type == ChartType::Shewhart
                         ? "[" + fmt(chart.limits.lower, 0) + "," + fmt(chart.limits.upper, 0) + "]"
                         : fmt(chart.half_width, 4));
      for (std::size_t s = 0; s < scenario.shifts.size(); ++s) {
        const auto it = by_cell.find(scenario.cell_id(a, c, s));
        std::string cell = "-";
        if (it != by_cell.end()) {
          const CellResult& r = *it->second;
          cell = (r.estimate.lower_bound() ? ">=" : "") + fmt(r.estimate.arl, 1) + " +/- " + fmt(r.estimate.se, 1);
          if (r.reference) {
            cell += " (" + (r.reference->exceeds ? std::string(">1e4") : fmt(r.reference->arl, 1)) + ")";
          }
        }
        line.push_back(cell);
      }
      lines.push_back(std::move(line));
    }
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& l : lines) {
    for (std::size_t i = 0; i < l.size(); ++i) width[i] = std::max(width[i], l[i].size());
  }
  for (const auto& l : lines) {
    for (std::size_t i = 0; i < l.size(); ++i) {
      if (i > 0) os << "  ";
      if (i < 3) {
        os << std::left << std::setw(static_cast<int>(width[i])) << l[i];
      } else {
        os << std::right << std::setw(static_cast<int>(width[i])) << l[i];
      }
    }
    os << std::left << '\n';
  }
  os << "\nARL +/- SE (reference value in parentheses).";
  if (any_approx) os << " * approximate reproduction: out-of-control AR(1) model construction may differ.";
  os << '\n';
}

}  // namespace steinewma
