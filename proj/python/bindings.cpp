#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "steinewma/bench.hpp"
#include "steinewma/charts.hpp"
#include "steinewma/distributions.hpp"
#include "steinewma/errors.hpp"
#include "steinewma/processes.hpp"
#include "steinewma/runlength.hpp"

namespace py = pybind11;
using namespace steinewma;

namespace {

ArlOptions arl_options(long replications, std::uint64_t seed, long cap, unsigned workers) {
  ArlOptions o;
  o.replications = replications;
  o.seed = seed;
  o.cap = cap;
  o.workers = workers;
  return o;
}

ScenarioDGP make_dgp(const ProcessModel& in_control, const std::optional<ProcessModel>& out_of_control,
                     long change_point) {
  return ScenarioDGP{in_control, out_of_control, change_point};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Stein EWMA control charts for count data";

  py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
  py::register_exception<FeasibilityError>(m, "FeasibilityError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<CalibrationError>(m, "CalibrationError", PyExc_RuntimeError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  py::enum_<Family>(m, "Family")
      .value("Poisson", Family::Poisson)
      .value("NegBinomial", Family::NegBinomial)
      .value("Binomial", Family::Binomial)
      .value("ZIPoisson", Family::ZIPoisson)
      .value("ZIBinomial", Family::ZIBinomial)
      .value("BetaBinomial", Family::BetaBinomial)
      .value("Good", Family::Good);
  m.def("parse_family", [](const std::string& s) { return parse_family(s); });

  py::class_<MomentSummary>(m, "MomentSummary")
      .def_readonly("mean", &MomentSummary::mean)
      .def_readonly("variance", &MomentSummary::variance)
      .def_readonly("dispersion_index", &MomentSummary::dispersion_index)
      .def("__repr__", [](const MomentSummary& s) {
        return "MomentSummary(mean=" + std::to_string(s.mean) + ", variance=" + std::to_string(s.variance) +
               ", dispersion_index=" + std::to_string(s.dispersion_index) + ")";
      });

  py::class_<CountDistribution>(m, "CountDistribution")
      .def_static("poisson", &CountDistribution::poisson, py::arg("mean"))
      .def_static("negative_binomial", &CountDistribution::negative_binomial, py::arg("size"), py::arg("prob"))
      .def_static("binomial", &CountDistribution::binomial, py::arg("trials"), py::arg("prob"))
      .def_static("zero_inflated_poisson", &CountDistribution::zero_inflated_poisson, py::arg("zero_weight"),
                  py::arg("rate"))
      .def_static("zero_inflated_binomial", &CountDistribution::zero_inflated_binomial, py::arg("zero_weight"),
                  py::arg("trials"), py::arg("prob"))
      .def_static("beta_binomial", &CountDistribution::beta_binomial, py::arg("trials"), py::arg("alpha"),
                  py::arg("beta"))
      .def_static("good", &CountDistribution::good, py::arg("q"), py::arg("s"))
      .def_property_readonly("family", &CountDistribution::family)
      .def_property_readonly("upper_bound", &CountDistribution::upper_bound)
      .def("pmf", &CountDistribution::pmf, py::arg("x"))
      .def("cdf", &CountDistribution::cdf, py::arg("x"))
      .def("moments", &CountDistribution::moments)
      .def("support_truncation", &CountDistribution::support_truncation, py::arg("tail_mass") = kDefaultTailMass)
      .def(
          "sample",
          [](const CountDistribution& d, std::size_t size, std::uint64_t seed) {
            RandomStream rng(seed);
            std::vector<long> out(size);
            for (auto& x : out) x = d.sample(rng);
            return out;
          },
          py::arg("size"), py::arg("seed"))
      .def("__repr__", &CountDistribution::describe);

  m.def("from_mean_dispersion", &from_mean_dispersion, py::arg("family"), py::arg("mean"), py::arg("dispersion"),
        py::arg("trials") = std::nullopt);

  py::class_<ProcessModel>(m, "ProcessModel")
      .def_static("iid", &ProcessModel::iid, py::arg("marginal"))
      .def_static("poisson_inar1", &ProcessModel::poisson_inar1, py::arg("mean"), py::arg("rho"))
      .def_static("nb_iinar1", &ProcessModel::nb_iinar1, py::arg("mean"), py::arg("size"), py::arg("rho"))
      .def_static("binar1", &ProcessModel::binar1, py::arg("trials"), py::arg("mean"), py::arg("rho"))
      .def_property_readonly("kind", [](const ProcessModel& p) { return std::string(process_kind_name(p.kind())); })
      .def_property_readonly("mean", &ProcessModel::mean)
      .def_property_readonly("rho", &ProcessModel::rho)
      .def_property_readonly("alpha", &ProcessModel::alpha)
      .def_property_readonly("beta", &ProcessModel::beta)
      .def("transition_pmf", &ProcessModel::transition_pmf, py::arg("x_prev"), py::arg("y_max"))
      .def("__repr__", &ProcessModel::describe);

  m.def("model_for_target", &model_for_target, py::arg("family"), py::arg("mean"), py::arg("dispersion"),
        py::arg("trials") = std::nullopt, py::arg("rho") = 0.0);

  m.def(
      "generate",
      [](const ProcessModel& in_control, long length, std::uint64_t seed,
         const std::optional<ProcessModel>& out_of_control, long change_point) {
        RandomStream rng(seed);
        return generate(make_dgp(in_control, out_of_control, change_point), length, rng);
      },
      py::arg("in_control"), py::arg("length"), py::arg("seed"), py::arg("out_of_control") = std::nullopt,
      py::arg("change_point") = 1);

  py::class_<WeightFunction>(m, "WeightFunction")
      .def_static("linear", &WeightFunction::linear)
      .def_static("root", &WeightFunction::root)
      .def_static("inverse", &WeightFunction::inverse)
      .def_static("shifted_pmf", &WeightFunction::shifted_pmf, py::arg("base"), py::arg("shift") = 2)
      .def_property_readonly("name", &WeightFunction::name)
      .def("__call__", &weight_eval, py::arg("x"));

  py::class_<SteinBaselines>(m, "SteinBaselines")
      .def_readonly("a0", &SteinBaselines::a0)
      .def_readonly("b0", &SteinBaselines::b0)
      .def_readonly("c0", &SteinBaselines::c0);

  py::class_<ChartDesign>(m, "ChartDesign")
      .def_static(
          "shewhart",
          [](const CountDistribution& d, double lcl, double ucl) { return ChartDesign::shewhart(d, {lcl, ucl}); },
          py::arg("in_control"), py::arg("lcl"), py::arg("ucl"))
      .def_static("ewma", &ChartDesign::ewma_symmetric, py::arg("in_control"), py::arg("lam"), py::arg("half_width"))
      .def_static("stein", &ChartDesign::stein_symmetric, py::arg("in_control"), py::arg("weight"), py::arg("lam"),
                  py::arg("half_width"))
      .def("with_half_width", &ChartDesign::with_half_width, py::arg("half_width"))
      .def_property_readonly("kind", [](const ChartDesign& d) { return std::string(chart_kind_name(d.kind())); })
      .def_property_readonly("lam", &ChartDesign::lambda)
      .def_property_readonly("lcl", [](const ChartDesign& d) { return d.limits().lower; })
      .def_property_readonly("ucl", [](const ChartDesign& d) { return d.limits().upper; })
      .def_property_readonly("baselines", &ChartDesign::baselines)
      .def_property_readonly("center", &ChartDesign::center)
      .def("__repr__", &ChartDesign::describe);

  m.def(
      "run_series",
      [](const ChartDesign& design, const std::vector<long>& counts) {
        const SeriesResult r = run_series(design, counts);
        std::vector<double> z;
        std::vector<bool> alarm;
        for (const auto& rec : r.records) {
          z.push_back(rec.z);
          alarm.push_back(rec.alarm);
        }
        py::dict out;
        out["z"] = z;
        out["alarm"] = alarm;
        out["first_alarm"] = r.first_alarm;
        return out;
      },
      py::arg("design"), py::arg("counts"));

  py::class_<ArlEstimate>(m, "ArlEstimate")
      .def_readonly("arl", &ArlEstimate::arl)
      .def_readonly("se", &ArlEstimate::se)
      .def_readonly("replications", &ArlEstimate::replications)
      .def_readonly("censored", &ArlEstimate::censored)
      .def_readonly("cap", &ArlEstimate::cap)
      .def_property_readonly("lower_bound", &ArlEstimate::lower_bound)
      .def("__repr__", [](const ArlEstimate& e) {
        return "ArlEstimate(arl=" + std::to_string(e.arl) + ", se=" + std::to_string(e.se) +
               ", censored=" + std::to_string(e.censored) + ")";
      });

  m.def(
      "estimate_arl",
      [](const ChartDesign& design, const ProcessModel& in_control, const std::optional<ProcessModel>& out_of_control,
         long replications, std::uint64_t seed, long cap, unsigned workers, long change_point) {
        const auto dgp = make_dgp(in_control, out_of_control, change_point);
        const auto opts = arl_options(replications, seed, cap, workers);
        py::gil_scoped_release release;
        return estimate_arl(design, dgp, opts);
      },
      py::arg("design"), py::arg("in_control"), py::arg("out_of_control") = std::nullopt,
      py::arg("replications") = kDefaultReplications, py::arg("seed") = 1, py::arg("cap") = kDefaultCap,
      py::arg("workers") = 0, py::arg("change_point") = 1);

  py::class_<CalibrationResult>(m, "CalibrationResult")
      .def_readonly("half_width", &CalibrationResult::half_width)
      .def_readonly("achieved", &CalibrationResult::achieved)
      .def_readonly("iterations", &CalibrationResult::iterations)
      .def_readonly("within_tolerance", &CalibrationResult::within_tolerance)
      .def_property_readonly("history", [](const CalibrationResult& r) {
        std::vector<std::pair<double, double>> h;
        for (const auto& p : r.history) h.emplace_back(p.half_width, p.estimate.arl);
        return h;
      });

  m.def(
      "calibrate_limit",
      [](const ChartDesign& design, const ProcessModel& in_control, double target, long replications,
         std::uint64_t seed, long cap, unsigned workers, double initial_upper) {
        CalibrationOptions o;
        o.target = target;
        o.initial_upper = initial_upper;
        o.arl = arl_options(replications, seed, cap, workers);
        const ScenarioDGP dgp{in_control, std::nullopt, 1};
        py::gil_scoped_release release;
        return calibrate_limit(design, dgp, o);
      },
      py::arg("design"), py::arg("in_control"), py::arg("target") = 370.0,
      py::arg("replications") = kDefaultReplications, py::arg("seed") = 1, py::arg("cap") = kDefaultCap,
      py::arg("workers") = 0, py::arg("initial_upper") = 0.0);

  m.def(
      "exact_arl_markov",
      [](double lcl, double ucl, const ProcessModel& model, double tail_mass) {
        return exact_arl_markov({lcl, ucl}, model, tail_mass);
      },
      py::arg("lcl"), py::arg("ucl"), py::arg("model"), py::arg("tail_mass") = 1e-12);

  m.def("scenario_ids", [] {
    std::vector<std::string> ids;
    for (const auto& s : builtin_scenarios()) ids.push_back(s.id);
    return ids;
  });

  m.def(
      "run_cell",
      [](const std::string& scenario_id, const std::string& cell, std::optional<long> replications,
         std::optional<std::uint64_t> seed) {
        Scenario s = find_scenario(scenario_id);
        if (replications) s.replications = *replications;
        if (seed) s.seed = *seed;
        for (std::size_t a = 0; a < s.alternatives.size(); ++a) {
          for (std::size_t c = 0; c < s.charts.size(); ++c) {
            for (std::size_t k = 0; k < s.shifts.size(); ++k) {
              if (s.cell_id(a, c, k) != cell) continue;
              CellResult r;
              {
                py::gil_scoped_release release;
                r = run_cell(s, a, c, k);
              }
              py::dict out;
              out["cell"] = r.cell;
              out["mu"] = r.mean;
              out["arl"] = r.estimate.arl;
              out["se"] = r.estimate.se;
              out["censored"] = r.estimate.censored;
              out["reference"] = r.reference ? py::cast(r.reference->arl) : py::none();
              out["approximate"] = r.approximate;
              return out;
            }
          }
        }
        throw py::key_error("no cell '" + cell + "' in " + scenario_id);
      },
      py::arg("scenario_id"), py::arg("cell"), py::arg("replications") = std::nullopt,
      py::arg("seed") = std::nullopt);
}
