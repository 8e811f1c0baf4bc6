#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "steinewma/charts.hpp"
#include "steinewma/distributions.hpp"
#include "steinewma/processes.hpp"
#include "steinewma/runlength.hpp"

namespace steinewma {

enum class ChartType { Shewhart, Ewma, Stein };

struct ChartSpec {
  std::string id;  // "ewma", "stein-linear", "c-chart", ...
  ChartType type = ChartType::Ewma;
  WeightKind weight = WeightKind::Linear;  // Stein charts only; ShiftedPmf uses the in-control pmf
  int shift = 2;
  double lambda = kDefaultLambda;
  double half_width = 0.0;               // EWMA / Stein
  ControlLimits limits{0.0, 0.0};        // Shewhart
};

struct AlternativeSpec {
  std::string label;  // row label, e.g. "oNB"
  Family family;
  double dispersion;
  // Out-of-control model construction involves a modelling choice the
  // reference values may not share.
  bool approximate = false;
};

// Reference value of one cell; `exceeds` marks entries only known to be > value.
struct ReferenceValue {
  double arl;
  bool exceeds = false;
};

struct Scenario {
  std::string id;
  std::string title;
  Family in_control_family;
  double mean0;
  double dispersion0;
  std::optional<int> trials;
  double rho = 0.0;
  std::vector<ChartSpec> charts;
  std::vector<AlternativeSpec> alternatives;
  std::vector<double> shifts{-0.25, 0.0, 0.25};
  long replications = kDefaultReplications;
  std::uint64_t seed = 20240101;
  long cap = kDefaultCap;
  // references[alt][chart][shift]; empty when not tabulated.
  std::vector<std::vector<std::vector<std::optional<ReferenceValue>>>> references;

  ProcessModel in_control_model() const;
  CountDistribution in_control_distribution() const;
  ChartDesign design(std::size_t chart) const;
  ProcessModel alternative_model(std::size_t alt, std::size_t shift) const;
  std::optional<ReferenceValue> reference(std::size_t alt, std::size_t chart, std::size_t shift) const;
  std::string cell_id(std::size_t alt, std::size_t chart, std::size_t shift) const;
};

struct CellResult {
  std::string scenario_id;
  std::string cell;
  std::string chart;
  std::string alternative;
  double mean;
  double shift;
  bool in_control;
  bool approximate;
  ArlEstimate estimate;
  std::optional<ReferenceValue> reference;
};

// Table-grid scenarios ("table1a-mu2" ... "table4b-mu5") and "poinar-designs".
const std::vector<Scenario>& builtin_scenarios();
const Scenario& find_scenario(const std::string& id);

CellResult run_cell(const Scenario& scenario, std::size_t alt, std::size_t chart, std::size_t shift,
                    unsigned workers = 0);

// Every (alternative, chart, shift) cell, ordered by alternative, chart, shift.
std::vector<CellResult> run_scenario(const Scenario& scenario, unsigned workers = 0);

// scenario_id,cell,mu,alt_family,arl,se,censored
void write_csv(std::ostream& os, const std::vector<CellResult>& cells, bool header = true);
void write_text_table(std::ostream& os, const Scenario& scenario, const std::vector<CellResult>& cells);

std::string format_shift(double shift);

}  // namespace steinewma
