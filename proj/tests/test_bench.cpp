#include <cmath>
#include <set>
#include <sstream>
#include <string>

#include "doctest.h"
#include "steinewma/bench.hpp"
#include "steinewma/errors.hpp"

using namespace steinewma;

namespace {

std::size_t chart_index(const Scenario& s, const std::string& id) {
  for (std::size_t i = 0; i < s.charts.size(); ++i) {
    if (s.charts[i].id == id) return i;
  }
  FAIL("no chart " << id);
  return 0;
}

std::size_t alt_index(const Scenario& s, const std::string& label) {
  for (std::size_t i = 0; i < s.alternatives.size(); ++i) {
    if (s.alternatives[i].label == label) return i;
  }
  FAIL("no alternative " << label);
  return 0;
}

}  // namespace

TEST_CASE("built-in scenario lookups") {
  const auto& t1 = find_scenario("table1a-mu2");
  CHECK(t1.in_control_family == Family::Binomial);
  CHECK(t1.trials == 10);
  CHECK(t1.rho == 0.0);
  CHECK(t1.charts[chart_index(t1, "ewma")].half_width == 0.7805);
  CHECK(t1.charts[chart_index(t1, "stein-linear")].half_width == 0.534);
  CHECK(t1.charts[chart_index(t1, "stein-root")].half_width == 0.4235);

  const auto& t3 = find_scenario("table3a-mu5");
  CHECK(t3.mean0 == 5.0);
  CHECK(t3.charts[chart_index(t3, "stein-inverse")].half_width == 0.1775);
  CHECK(t3.charts[chart_index(t3, "stein-shifted-pmf")].half_width == 0.293);

  const auto& p = find_scenario("poinar-designs");
  CHECK(p.rho == 0.78);
  CHECK(p.charts.size() == 6);
  CHECK(p.charts[chart_index(p, "c-chart")].limits.upper == 6.0);
  CHECK(p.charts[chart_index(p, "stein-inverse")].half_width == 0.2994);

  CHECK_THROWS_AS(find_scenario("table9z"), ParameterError);
}

TEST_CASE("every tabulated cell has exactly one cell id") {
  std::size_t finite = 0;
  std::size_t exceeds = 0;
  std::set<std::string> scenario_ids;
  for (const auto& s : builtin_scenarios()) {
    CAPTURE(s.id);
    CHECK(scenario_ids.insert(s.id).second);
    std::set<std::string> cells;
    for (std::size_t a = 0; a < s.alternatives.size(); ++a) {
      for (std::size_t c = 0; c < s.charts.size(); ++c) {
        for (std::size_t k = 0; k < s.shifts.size(); ++k) {
          const auto ref = s.reference(a, c, k);
          REQUIRE(ref.has_value());
          CHECK(cells.insert(s.cell_id(a, c, k)).second);
          if (ref->exceeds) {
            ++exceeds;
            CHECK(ref->arl == 1e4);
          } else {
            ++finite;
            CHECK(ref->arl > 1.0);
          }
        }
      }
    }
  }
  CHECK(scenario_ids.size() == 17);
  // 16 grids of 27 cells plus 6 monitoring designs.
  CHECK(finite + exceeds == 16 * 27 + 6);
  CHECK(exceeds == 12);
}

TEST_CASE("cell ids and shifts") {
  CHECK(format_shift(0.0) == "0");
  CHECK(format_shift(0.25) == "+0.25");
  CHECK(format_shift(-0.25) == "-0.25");
  const auto& s = find_scenario("table2a-mu2");
  CHECK(s.cell_id(alt_index(s, "oNB"), chart_index(s, "stein-root"), 2) == "stein-root:oNB:+0.25");
}

TEST_CASE("alternative models") {
  const auto& s = find_scenario("table2b-mu2");
  const auto nb = s.alternative_model(alt_index(s, "NB"), 1);
  const auto ic = s.in_control_model();
  CHECK(nb.kind() == ic.kind());
  CHECK(nb.mean() == doctest::Approx(ic.mean()));
  CHECK(nb.rho() == doctest::Approx(0.5));
  const auto up = s.alternative_model(alt_index(s, "oNB"), 2);
  CHECK(up.mean() == doctest::Approx(2.25));
  const auto m = up.stationary_marginal()->moments();
  CHECK(m.dispersion_index == doctest::Approx(2.5));
  CHECK(s.alternatives[alt_index(s, "ZIP")].approximate);
  CHECK_FALSE(find_scenario("table2a-mu2").alternatives[0].approximate);
}

TEST_CASE("csv and text output") {
  Scenario s = find_scenario("table1a-mu2");
  s.replications = 300;
  const auto a = run_cell(s, alt_index(s, "Bin"), chart_index(s, "ewma"), 1);
  CHECK(a.in_control);
  CHECK(a.cell == "ewma:Bin:0");
  CHECK(a.estimate.replications == 300);

  std::ostringstream csv;
  write_csv(csv, {a});
  std::istringstream in(csv.str());
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  CHECK(header == "scenario_id,cell,mu,alt_family,arl,se,censored");
  CHECK(row.rfind("table1a-mu2,ewma:Bin:0,2,Bin,", 0) == 0);
  CHECK(std::count(row.begin(), row.end(), ',') == 6);

  std::ostringstream text;
  write_text_table(text, s, {a});
  CHECK(text.str().find("(370.2)") != std::string::npos);
}

TEST_CASE("cells are reproducible across worker counts") {
  Scenario s = find_scenario("table2b-mu2");
  s.replications = 1000;
  const auto a = run_cell(s, 0, 1, 2, 1);
  const auto b = run_cell(s, 0, 1, 2, 6);
  CHECK(a.estimate.arl == b.estimate.arl);
  CHECK(a.estimate.se == b.estimate.se);
}

TEST_CASE("selected cells agree with reference values") {
  // Two independent estimates with R = 1e4 each: 3 * sqrt(2) * SE.
  struct Want {
    const char* scenario;
    const char* chart;
    const char* alt;
    std::size_t shift;
  };
  for (const Want& w : {Want{"table1a-mu2", "ewma", "Bin", 1}, Want{"table1a-mu2", "stein-linear", "BB", 1},
                        Want{"table3a-mu2", "stein-shifted-pmf", "Good(1/2)", 1},
                        Want{"table4a-mu2", "stein-shifted-pmf", "Poi", 0}}) {
    const auto& s = find_scenario(w.scenario);
    const auto r = run_cell(s, alt_index(s, w.alt), chart_index(s, w.chart), w.shift);
    CAPTURE(r.cell);
    CAPTURE(r.estimate.arl);
    REQUIRE(r.reference.has_value());
    CHECK(std::abs(r.estimate.arl - r.reference->arl) <= 3.0 * std::sqrt(2.0) * r.estimate.se);
  }
}
