#include "steinewma/config.hpp"

#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "steinewma/errors.hpp"

namespace steinewma {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> keys) {
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError(where + key + ": unknown key");
  }
}

template <typename T>
T get(const json& obj, const std::string& where, const char* key) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + key + ": wrong type");
  }
}

double get_number(const json& obj, const std::string& where, const char* key) {
  if (!obj.at(key).is_number()) throw ConfigError(where + key + ": expected a number");
  return obj.at(key).get<double>();
}

long get_integer(const json& obj, const std::string& where, const char* key) {
  const json& v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigError(where + key + ": expected an integer");
  return v.get<long>();
}

ModelConfig parse_model(const json& obj, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  const std::string prefix = where + ".";
  reject_unknown(obj, prefix, {"family", "mean", "dispersion", "n", "rho"});
  ModelConfig m;
  if (!obj.contains("family")) throw ConfigError(prefix + "family: required");
  if (!obj.contains("mean")) throw ConfigError(prefix + "mean: required");
  try {
    m.family = parse_family(get<std::string>(obj, prefix, "family"));
  } catch (const ParameterError& e) {
    throw ConfigError(prefix + "family: " + e.what());
  }
  m.mean = get_number(obj, prefix, "mean");
  if (obj.contains("dispersion")) {
    m.dispersion = get_number(obj, prefix, "dispersion");
  } else if (m.family != Family::Poisson && m.family != Family::Binomial) {
    throw ConfigError(prefix + "dispersion: required for family " + std::string(family_name(m.family)));
  }
  if (obj.contains("n")) {
    const long n = get_integer(obj, prefix, "n");
    if (n < 1 || n > kMaxSupport) throw ConfigError(prefix + "n: must be a positive integer");
    m.trials = static_cast<int>(n);
  }
  if (is_bounded(m.family) && !m.trials) {
    throw ConfigError(prefix + "n: required for family " + std::string(family_name(m.family)));
  }
  if (!is_bounded(m.family) && m.trials) {
    throw ConfigError(prefix + "n: only valid for bounded families");
  }
  if (obj.contains("rho")) m.rho = get_number(obj, prefix, "rho");
  if (!(m.rho >= 0.0 && m.rho < 1.0)) throw ConfigError(prefix + "rho: must lie in [0, 1)");
  return m;
}

ChartConfig parse_chart(const json& obj) {
  const std::string prefix = "chart.";
  if (!obj.is_object()) throw ConfigError("chart: expected an object");
  reject_unknown(obj, prefix,
                 {"type", "weight", "shift", "table", "tail", "lambda", "L", "lcl", "ucl", "target_arl",
                  "tolerance_se"});
  ChartConfig c;
  if (!obj.contains("type")) throw ConfigError(prefix + "type: required");
  c.type = get<std::string>(obj, prefix, "type");
  if (c.type != "shewhart" && c.type != "ewma" && c.type != "stein") {
    throw ConfigError(prefix + "type: expected shewhart, ewma or stein");
  }
  if (obj.contains("weight")) c.weight = get<std::string>(obj, prefix, "weight");
  static const std::set<std::string> weights{"linear", "root", "inverse", "shifted-pmf", "table"};
  if (!weights.count(c.weight)) throw ConfigError(prefix + "weight: expected linear, root, inverse, shifted-pmf or table");
  if (obj.contains("shift")) c.shift = static_cast<int>(get_integer(obj, prefix, "shift"));
  if (obj.contains("table")) c.table = get<std::vector<double>>(obj, prefix, "table");
  if (obj.contains("tail")) c.tail = get<std::string>(obj, prefix, "tail");
  if (c.tail != "none" && c.tail != "hold" && c.tail != "zero") throw ConfigError(prefix + "tail: expected none, hold or zero");
  if (c.weight == "table" && c.table.empty()) throw ConfigError(prefix + "table: required for table weights");
  if (obj.contains("lambda")) c.lambda = get_number(obj, prefix, "lambda");
  if (c.type == "shewhart") c.lambda = 1.0;
  if (obj.contains("L")) c.half_width = get_number(obj, prefix, "L");
  if (obj.contains("lcl")) c.lcl = get_number(obj, prefix, "lcl");
  if (obj.contains("ucl")) c.ucl = get_number(obj, prefix, "ucl");
  if (c.half_width && (c.lcl || c.ucl)) throw ConfigError(prefix + "L: give either L or lcl/ucl, not both");
  if (c.lcl.has_value() != c.ucl.has_value()) throw ConfigError(prefix + "lcl/ucl: both limits are required");
  if (c.type == "shewhart" && c.half_width) throw ConfigError(prefix + "L: Shewhart charts take lcl/ucl");
  if (obj.contains("target_arl")) c.target_arl = get_number(obj, prefix, "target_arl");
  if (obj.contains("tolerance_se")) c.tolerance_se = get_number(obj, prefix, "tolerance_se");
  return c;
}

TailRule parse_tail(const std::string& tail) {
  if (tail == "hold") return TailRule::Hold;
  if (tail == "zero") return TailRule::Zero;
  return TailRule::None;
}

ChartDesign build_design(const RunConfig& cfg, std::optional<double> half_width) {
  const ChartConfig& c = cfg.chart;
  const CountDistribution dist = cfg.in_control.marginal();
  if (c.type == "shewhart") {
    if (!c.lcl) throw ConfigError("chart.lcl/ucl: required for Shewhart charts");
    return ChartDesign::shewhart(dist, {*c.lcl, *c.ucl});
  }
  auto limits_for = [&](double center) -> ControlLimits {
    if (half_width) return ControlLimits::symmetric(center, *half_width);
    if (c.half_width) return ControlLimits::symmetric(center, *c.half_width);
    if (c.lcl) return {*c.lcl, *c.ucl};
    throw ConfigError("chart.L: control limits required (L or lcl/ucl)");
  };
  if (c.type == "ewma") return ChartDesign::ewma(dist, c.lambda, limits_for(dist.moments().mean));

  WeightFunction f = WeightFunction::linear();
  if (c.weight == "root") f = WeightFunction::root();
  if (c.weight == "inverse") f = WeightFunction::inverse();
  if (c.weight == "shifted-pmf") f = WeightFunction::shifted_pmf(dist, c.shift);
  if (c.weight == "table") f = WeightFunction::table(c.table, parse_tail(c.tail));
  return ChartDesign::stein(stein_kind_for(dist.family()), dist, std::move(f), c.lambda, limits_for(1.0));
}

}  // namespace

CountDistribution ModelConfig::marginal() const { return from_mean_dispersion(family, mean, dispersion, trials); }

ProcessModel ModelConfig::process() const { return model_for_target(family, mean, dispersion, trials, rho); }

bool RunConfig::has_limits() const { return chart.half_width || chart.lcl; }

ChartDesign RunConfig::design() const { return build_design(*this, std::nullopt); }

ChartDesign RunConfig::design_with_half_width(double half_width) const { return build_design(*this, half_width); }

ScenarioDGP RunConfig::scenario() const {
  ScenarioDGP s{in_control.process(), std::nullopt, change_point};
  if (out_of_control) s.out_of_control = out_of_control->process();
  return s;
}

ScenarioDGP RunConfig::in_control_scenario() const { return {in_control.process(), std::nullopt, 1}; }

ArlOptions RunConfig::arl_options() const {
  ArlOptions o;
  o.replications = replications;
  o.seed = seed;
  o.cap = cap;
  o.workers = workers;
  return o;
}

CalibrationOptions RunConfig::calibration_options() const {
  CalibrationOptions o;
  o.target = chart.target_arl;
  o.tolerance_se = chart.tolerance_se;
  o.arl = arl_options();
  return o;
}

RunConfig parse_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config: expected a JSON object");
  reject_unknown(doc, "",
                 {"$schema", "description", "chart", "in_control", "out_of_control", "change_point", "replications",
                  "seed", "cap", "workers"});
  RunConfig cfg;
  if (!doc.contains("chart")) throw ConfigError("chart: required");
  if (!doc.contains("in_control")) throw ConfigError("in_control: required");
  cfg.chart = parse_chart(doc.at("chart"));
  cfg.in_control = parse_model(doc.at("in_control"), "in_control");
  if (doc.contains("out_of_control") && !doc.at("out_of_control").is_null()) {
    cfg.out_of_control = parse_model(doc.at("out_of_control"), "out_of_control");
  }
  if (doc.contains("change_point")) cfg.change_point = get_integer(doc, "", "change_point");
  if (cfg.change_point < 1) throw ConfigError("change_point: must be >= 1");
  if (doc.contains("replications")) cfg.replications = get_integer(doc, "", "replications");
  if (cfg.replications < 1) throw ConfigError("replications: must be >= 1");
  if (doc.contains("seed")) {
    if (!doc.at("seed").is_number_unsigned()) throw ConfigError("seed: expected a nonnegative integer");
    cfg.seed = doc.at("seed").get<std::uint64_t>();
  }
  if (doc.contains("cap")) cfg.cap = get_integer(doc, "", "cap");
  if (cfg.cap < 1) throw ConfigError("cap: must be >= 1");
  if (doc.contains("workers")) {
    const long w = get_integer(doc, "", "workers");
    if (w < 0) throw ConfigError("workers: must be >= 0");
    cfg.workers = static_cast<unsigned>(w);
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string config_to_json(const RunConfig& cfg) {
  auto model = [](const ModelConfig& m) {
    json j{{"family", std::string(family_name(m.family))}, {"mean", m.mean}, {"dispersion", m.dispersion},
           {"rho", m.rho}};
    if (m.trials) j["n"] = *m.trials;
    return j;
  };
  json chart{{"type", cfg.chart.type}, {"lambda", cfg.chart.lambda}, {"target_arl", cfg.chart.target_arl},
             {"tolerance_se", cfg.chart.tolerance_se}};
  if (cfg.chart.type == "stein") {
    chart["weight"] = cfg.chart.weight;
    if (cfg.chart.weight == "shifted-pmf") chart["shift"] = cfg.chart.shift;
    if (cfg.chart.weight == "table") {
      chart["table"] = cfg.chart.table;
      chart["tail"] = cfg.chart.tail;
    }
  }
  if (cfg.chart.half_width) chart["L"] = *cfg.chart.half_width;
  if (cfg.chart.lcl) {
    chart["lcl"] = *cfg.chart.lcl;
    chart["ucl"] = *cfg.chart.ucl;
  }
  json doc{{"chart", chart},
           {"in_control", model(cfg.in_control)},
           {"change_point", cfg.change_point},
           {"replications", cfg.replications},
           {"seed", cfg.seed},
           {"cap", cfg.cap}};
  if (cfg.out_of_control) doc["out_of_control"] = model(*cfg.out_of_control);
  return doc.dump(2);
}

}  // namespace steinewma
