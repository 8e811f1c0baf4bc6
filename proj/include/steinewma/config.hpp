#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "steinewma/charts.hpp"
#include "steinewma/distributions.hpp"
#include "steinewma/processes.hpp"
#include "steinewma/runlength.hpp"

namespace steinewma {

// A count model given by its marginal (family, mean, dispersion index, n) and
// AR(1) dependence rho (0 = iid).
struct ModelConfig {
  Family family = Family::Poisson;
  double mean = 1.0;
  double dispersion = 1.0;
  std::optional<int> trials;
  double rho = 0.0;

  CountDistribution marginal() const;
  ProcessModel process() const;
};

struct ChartConfig {
  std::string type = "ewma";  // shewhart | ewma | stein
  std::string weight = "linear";  // linear | root | inverse | shifted-pmf | table
  int shift = 2;
  std::vector<double> table;
  std::string tail = "none";  // none | hold | zero
  double lambda = kDefaultLambda;
  std::optional<double> half_width;
  std::optional<double> lcl;
  std::optional<double> ucl;
  double target_arl = 370.0;
  double tolerance_se = 2.0;
};

struct RunConfig {
  ChartConfig chart;
  ModelConfig in_control;
  std::optional<ModelConfig> out_of_control;
  long change_point = 1;
  long replications = kDefaultReplications;
  std::uint64_t seed = 1;
  long cap = kDefaultCap;
  unsigned workers = 0;

  bool has_limits() const;
  // Throws ConfigError if the chart has neither L nor lcl/ucl.
  ChartDesign design() const;
  // Same chart with limits center -/+ half_width (limits in the file ignored).
  ChartDesign design_with_half_width(double half_width) const;
  ScenarioDGP scenario() const;
  ScenarioDGP in_control_scenario() const;
  ArlOptions arl_options() const;
  CalibrationOptions calibration_options() const;
};

// Parses and validates a JSON document; unknown keys are rejected. Errors are
// ConfigError with the offending key path in the message.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

// Canonical JSON rendering of a config (all defaults filled in).
std::string config_to_json(const RunConfig& config);

}  // namespace steinewma
