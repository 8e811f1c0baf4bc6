#include "steinewma/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <optional>
#include <sstream>

#include "steinewma/bench.hpp"
#include "steinewma/config.hpp"
#include "steinewma/errors.hpp"
#include "steinewma/runlength.hpp"

namespace steinewma {

using nlohmann::json;

namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(trim(field));
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

long parse_nonnegative(const std::string& text, long line, const char* what) {
  std::size_t used = 0;
  long v = 0;
  try {
    v = std::stol(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (text.empty() || used != text.size()) {
    throw DataError("line " + std::to_string(line) + ": " + what + " '" + text + "' is not an integer");
  }
  if (v < 0) throw DataError("line " + std::to_string(line) + ": " + what + " must be nonnegative");
  return v;
}

struct GlobalOptions {
  std::optional<std::uint64_t> seed;
  std::optional<long> replications;
  std::optional<long> cap;
  std::optional<unsigned> workers;
  std::string out;
};

class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw ParameterError("cannot open output file " + path);
      stream_ = &file_;
    }
  }
  std::ostream& operator*() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

void apply_overrides(RunConfig& cfg, const GlobalOptions& g) {
  if (g.seed) cfg.seed = *g.seed;
  if (g.replications) cfg.replications = *g.replications;
  if (g.cap) cfg.cap = *g.cap;
  if (g.workers) cfg.workers = *g.workers;
  if (cfg.replications < 1) throw ParameterError("--replications must be >= 1");
  if (cfg.cap < 1) throw ParameterError("--cap must be >= 1");
}

json estimate_json(const ArlEstimate& e) {
  return {{"arl", e.arl},          {"se", e.se},   {"replications", e.replications},
          {"censored", e.censored}, {"cap", e.cap}, {"lower_bound", e.lower_bound()}};
}

std::string fmt(double v, int prec = 10) {
  std::ostringstream os;
  os << std::setprecision(prec) << v;
  return os.str();
}

int cmd_calibrate(const std::string& config_path, const GlobalOptions& g, std::ostream& out, std::ostream& err) {
  RunConfig cfg = load_config(config_path);
  apply_overrides(cfg, g);
  if (cfg.chart.type == "shewhart") throw ParameterError("calibration applies to EWMA and Stein charts only");
  const CalibrationResult r =
      calibrate_limit(cfg.design_with_half_width(1.0), cfg.in_control_scenario(), cfg.calibration_options());
  json history = json::array();
  for (const auto& p : r.history) history.push_back({{"L", p.half_width}, {"arl", p.estimate.arl}, {"se", p.estimate.se}});
  json doc{{"L", r.half_width},
           {"achieved", estimate_json(r.achieved)},
           {"target_arl", cfg.chart.target_arl},
           {"iterations", r.iterations},
           {"within_tolerance", r.within_tolerance},
           {"bracket", {r.bracket_lower, r.bracket_upper}},
           {"seed", cfg.seed},
           {"history", history}};
  Output o(g.out, out);
  *o << doc.dump(2) << '\n';
  err << "L = " << fmt(r.half_width, 6) << ", ARL0 = " << fmt(r.achieved.arl, 6) << " +/- " << fmt(r.achieved.se, 4)
      << " after " << r.iterations << " evaluations ("
      << (r.within_tolerance ? "within tolerance" : "stopped on bracket resolution") << ")\n";
  return kExitOk;
}

int cmd_arl(const std::string& config_path, const GlobalOptions& g, std::ostream& out, std::ostream& err) {
  RunConfig cfg = load_config(config_path);
  apply_overrides(cfg, g);
  const ChartDesign design = cfg.design();
  const ScenarioDGP dgp = cfg.scenario();
  const ArlEstimate e = estimate_arl(design, dgp, cfg.arl_options());
  json doc = estimate_json(e);
  doc["seed"] = cfg.seed;
  std::optional<double> exact;
  if (design.kind() == ChartKind::Shewhart && !dgp.out_of_control && dgp.in_control.stationary_marginal()) {
    try {
      exact = exact_arl_markov(design.limits(), dgp.in_control);
      doc["exact_arl"] = *exact;
    } catch (const NumericalError&) {
    }
  }
  Output o(g.out, out);
  *o << doc.dump(2) << '\n';
  err << "ARL = " << fmt(e.arl, 6) << " +/- " << fmt(e.se, 4) << " (R = " << e.replications << ", censored "
      << e.censored << ")";
  if (exact) err << ", exact " << fmt(*exact, 6);
  err << '\n';
  return kExitOk;
}

int cmd_table(const std::string& scenario_id, bool list, const std::string& format, const std::string& cells,
              const GlobalOptions& g, std::ostream& out, std::ostream& err) {
  Output o(g.out, out);
  if (list) {
    for (const auto& s : builtin_scenarios()) *o << s.id << "  " << s.title << '\n';
    return kExitOk;
  }
  if (scenario_id.empty()) throw ParameterError("table needs --scenario (see --list)");
  Scenario s = find_scenario(scenario_id);
  if (g.seed) s.seed = *g.seed;
  if (g.replications) s.replications = *g.replications;
  if (g.cap) s.cap = *g.cap;
  const unsigned workers = g.workers.value_or(0);

  std::vector<CellResult> results;
  if (cells.empty()) {
    results = run_scenario(s, workers);
  } else {
    std::vector<std::string> wanted = split(cells);
    for (const auto& id : wanted) {
      bool found = false;
      for (std::size_t a = 0; a < s.alternatives.size() && !found; ++a) {
        for (std::size_t c = 0; c < s.charts.size() && !found; ++c) {
          for (std::size_t k = 0; k < s.shifts.size() && !found; ++k) {
            if (s.cell_id(a, c, k) == id) {
              results.push_back(run_cell(s, a, c, k, workers));
              found = true;
            }
          }
        }
      }
      if (!found) throw ParameterError("scenario " + s.id + " has no cell '" + id + "'");
    }
  }
  if (format == "text") {
    write_text_table(*o, s, results);
  } else {
    write_csv(*o, results);
  }
  err << s.id << ": " << results.size() << " cells, R = " << s.replications << ", seed = " << s.seed << '\n';
  return kExitOk;
}

int cmd_monitor(const std::string& config_path, const std::string& input, const GlobalOptions& g, std::ostream& out,
                std::ostream& err) {
  RunConfig cfg = load_config(config_path);
  apply_overrides(cfg, g);
  const ChartDesign design = cfg.design();
  std::ifstream in(input);
  if (!in) throw ParameterError("cannot open input file " + input);
  const std::vector<CountRow> rows = read_count_csv(in);
  SeriesResult result;
  ChartState state = init_chart(design);
  for (const auto& row : rows) {
    ChartStep step{};
    try {
      step = update(design, state, row.count);
    } catch (const DataError& e) {
      throw DataError("line " + std::to_string(row.line) + ": " + e.what());
    }
    state = step.state;
    result.records.push_back({state.t, row.count, step.z, step.alarm});
    if (step.alarm && !result.first_alarm) result.first_alarm = state.t;
  }
  Output o(g.out, out);
  write_monitor_csv(*o, design, rows, result);
  if (result.first_alarm) {
    err << "first alarm: t=" << rows[*result.first_alarm - 1].t << '\n';
    return kExitAlarm;
  }
  err << "first alarm: none\n";
  return kExitOk;
}

int cmd_pmf(const std::string& config_path, const std::string& family, std::optional<double> mean,
            std::optional<double> dispersion, std::optional<int> trials, double tail_mass, const GlobalOptions& g,
            std::ostream& out, std::ostream& err) {
  ModelConfig m;
  if (!config_path.empty()) {
    m = load_config(config_path).in_control;
  } else {
    if (family.empty() || !mean) throw ParameterError("pmf needs --config or --family and --mean");
    m.family = parse_family(family);
    m.mean = *mean;
    m.dispersion = dispersion.value_or(1.0);
    m.trials = trials;
  }
  const CountDistribution d = m.marginal();
  const long xmax = d.support_truncation(tail_mass);
  Output o(g.out, out);
  *o << std::setprecision(10) << "x,pmf,cdf\n";
  for (long x = 0; x <= xmax; ++x) *o << x << ',' << d.pmf(x) << ',' << d.cdf(x) << '\n';
  const auto mom = d.moments();
  err << d.describe() << ": mean " << fmt(mom.mean) << ", variance " << fmt(mom.variance) << ", dispersion index "
      << fmt(mom.dispersion_index) << '\n';
  return kExitOk;
}

int cmd_simulate(const std::string& config_path, long length, const GlobalOptions& g, std::ostream& out,
                 std::ostream& err) {
  RunConfig cfg = load_config(config_path);
  apply_overrides(cfg, g);
  if (length < 1) throw ParameterError("--length must be >= 1");
  RandomStream rng(cfg.seed);
  const auto series = generate(cfg.scenario(), length, rng);
  Output o(g.out, out);
  *o << "t,count\n";
  for (std::size_t i = 0; i < series.size(); ++i) *o << i + 1 << ',' << series[i] << '\n';
  err << "simulated " << length << " counts from " << cfg.scenario().in_control.describe() << '\n';
  return kExitOk;
}

}  // namespace

std::vector<CountRow> read_count_csv(std::istream& in) {
  std::string line;
  long line_no = 0;
  std::optional<std::vector<std::string>> header;
  std::vector<CountRow> rows;
  int t_col = -1;
  int count_col = -1;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string text = trim(line);
    if (text.empty()) continue;
    const auto fields = split(text);
    if (!header) {
      header = fields;
      for (std::size_t i = 0; i < fields.size(); ++i) {
        if (fields[i] == "t") t_col = static_cast<int>(i);
        if (fields[i] == "count") count_col = static_cast<int>(i);
      }
      if (count_col < 0 || fields.size() > 2 || (fields.size() == 2 && t_col < 0)) {
        throw DataError("line " + std::to_string(line_no) + ": expected header 't,count' or 'count'");
      }
      continue;
    }
    if (fields.size() != header->size()) {
      throw DataError("line " + std::to_string(line_no) + ": expected " + std::to_string(header->size()) +
                      " fields, got " + std::to_string(fields.size()));
    }
    CountRow row;
    row.line = line_no;
    row.count = parse_nonnegative(fields[count_col], line_no, "count");
    row.t = t_col >= 0 ? parse_nonnegative(fields[t_col], line_no, "t") : static_cast<long>(rows.size()) + 1;
    rows.push_back(row);
  }
  if (rows.empty()) throw DataError("empty CSV: no data rows (expected header 't,count' followed by counts)");
  return rows;
}

void write_monitor_csv(std::ostream& os, const ChartDesign& design, const std::vector<CountRow>& rows,
                       const SeriesResult& result) {
  const auto old = os.precision(10);
  os << "t,count,z,lcl,ucl,alarm\n";
  const auto& lim = design.limits();
  for (std::size_t i = 0; i < result.records.size(); ++i) {
    const auto& r = result.records[i];
    os << rows[i].t << ',' << r.count << ',' << r.z << ',' << lim.lower << ',' << lim.upper << ','
       << (r.alarm ? 1 : 0) << '\n';
  }
  os.precision(old);
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stein EWMA and classical control charts for count data"};
  app.name("steinewma");
  app.require_subcommand(1);

  GlobalOptions g;
  app.option_defaults()->always_capture_default(false);
  app.add_option("--seed", g.seed, "Master seed (overrides the config)");
  app.add_option("--replications", g.replications, "Monte-Carlo replications");
  app.add_option("--cap", g.cap, "Run-length cap");
  app.add_option("--workers", g.workers, "Worker threads (0 = all cores)");
  app.add_option("--out", g.out, "Write results to this file instead of stdout");

  std::string config;
  auto* calibrate = app.add_subcommand("calibrate", "Calibrate L to the target in-control ARL");
  calibrate->add_option("--config", config, "Chart/model JSON config")->required();
  calibrate->fallthrough();

  auto* arl = app.add_subcommand("arl", "Estimate the ARL of a chart design");
  arl->add_option("--config", config, "Chart/model JSON config")->required();
  arl->fallthrough();

  std::string scenario;
  std::string format = "csv";
  std::string cells;
  bool list = false;
  auto* table = app.add_subcommand("table", "Reproduce a built-in ARL table");
  table->add_option("--scenario", scenario, "Scenario id, e.g. table1a-mu2");
  table->add_option("--format", format, "csv or text")->check(CLI::IsMember({"csv", "text"}));
  table->add_option("--cells", cells, "Comma-separated cell ids to run (default: all)");
  table->add_flag("--list", list, "List the built-in scenarios");
  table->fallthrough();

  std::string input;
  auto* monitor = app.add_subcommand("monitor", "Apply a chart to a t,count CSV series");
  monitor->add_option("--config", config, "Chart JSON config")->required();
  monitor->add_option("input", input, "CSV file with header t,count")->required();
  monitor->fallthrough();

  std::string family;
  std::optional<double> mean;
  std::optional<double> dispersion;
  std::optional<int> trials;
  double tail_mass = kDefaultTailMass;
  auto* pmf = app.add_subcommand("pmf", "Print a distribution's pmf and moments");
  pmf->add_option("--config", config, "Use the in_control model of this config");
  pmf->add_option("--family", family, "Distribution family");
  pmf->add_option("--mean", mean, "Mean");
  pmf->add_option("--dispersion", dispersion, "Dispersion index");
  pmf->add_option("--n", trials, "Upper bound n of bounded families");
  pmf->add_option("--tail-mass", tail_mass, "Truncation tail mass");
  pmf->fallthrough();

  long length = 0;
  auto* simulate = app.add_subcommand("simulate", "Simulate a count series from a config");
  simulate->add_option("--config", config, "Model JSON config")->required();
  simulate->add_option("--length", length, "Series length")->required();
  simulate->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (calibrate->parsed()) return cmd_calibrate(config, g, out, err);
    if (arl->parsed()) return cmd_arl(config, g, out, err);
    if (table->parsed()) return cmd_table(scenario, list, format, cells, g, out, err);
    if (monitor->parsed()) return cmd_monitor(config, input, g, out, err);
    if (pmf->parsed()) return cmd_pmf(config, family, mean, dispersion, trials, tail_mass, g, out, err);
    if (simulate->parsed()) return cmd_simulate(config, length, g, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}

}  // namespace steinewma
