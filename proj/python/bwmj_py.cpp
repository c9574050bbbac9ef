// Python bindings. Structured inputs cross the boundary as JSON text; the
// thin wrapper in bwmj/__init__.py handles the dict <-> str conversion.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bwmj/algorithms.hpp"
#include "bwmj/environments.hpp"
#include "bwmj/harness.hpp"
#include "bwmj/io.hpp"

namespace py = pybind11;
using namespace bwmj;

namespace {

CanonicalInstance parse_instance(const std::string& text) {
  return io::instance_from_json(io::json::parse(text));
}

py::dict trace_summary(const RunTrace& tr, const CanonicalInstance& inst) {
  py::dict d;
  d["instance_id"] = tr.instance_id;
  d["horizon"] = tr.horizon;
  d["rounds_used"] = tr.rounds_used;
  d["opt_value"] = tr.opt_value;
  d["sum_expected_utility"] = tr.sum_expected_utility;
  d["pseudo_regret"] = harness::pseudo_regret(tr, inst);
  if (tr.has_rounds) {
    py::list actions;
    for (const auto& r : tr.rounds) actions.append(r.action);
    d["actions"] = actions;
  }
  return d;
}

}  // namespace

PYBIND11_MODULE(_bwmj, m) {
  m.doc() = "Bandits with monotone jumps: instances, algorithms and experiment harness";

  py::register_exception<InvalidInstance>(m, "InvalidInstance", PyExc_ValueError);
  py::register_exception<harness::UnknownAlgorithm>(m, "UnknownAlgorithm", PyExc_KeyError);
  py::register_exception<io::FormatError>(m, "FormatError", PyExc_ValueError);
  py::register_exception<harness::FitError>(m, "FitError", PyExc_ValueError);

  py::class_<CanonicalInstance>(m, "Instance")
      .def(py::init(&parse_instance), py::arg("json_text"))
      .def_readonly("id", &CanonicalInstance::id)
      .def_readonly("breakpoints", &CanonicalInstance::breakpoints)
      .def_property_readonly("means",
                             [](const CanonicalInstance& s) {
                               std::vector<double> out;
                               for (const auto& d : s.distributions) out.push_back(d.mean());
                               return out;
                             })
      .def("__len__", &CanonicalInstance::size)
      .def("to_json", [](const CanonicalInstance& s) { return io::to_json(s).dump(); })
      .def("interval_index", [](const CanonicalInstance& s, double a) { return interval_index(s, a); })
      .def("expected_utility", [](const CanonicalInstance& s, double a) { return expected_utility(s, a); })
      .def("optimum",
           [](const CanonicalInstance& s) {
             const auto o = optimum(s);
             return py::make_tuple(o.action, o.value);
           })
      .def("min_jump_gap", [](const CanonicalInstance& s) { return min_jump_gap(s); });

  m.def(
      "random_instance",
      [](std::size_t n, std::uint64_t seed, double gap_min, double gap_max) {
        Rng rng(seed);
        return env::random_instance(n, rng, {gap_min, gap_max});
      },
      py::arg("n"), py::arg("seed") = 0, py::arg("gap_min") = 0.05, py::arg("gap_max") = 0.2);

  m.def(
      "lower_bound_pair",
      [](std::size_t n, std::size_t t, std::size_t i_star) {
        const auto p = env::lower_bound_pair(n, t, i_star);
        return py::make_tuple(p.base, p.perturbed, p.epsilon, p.k, p.thresholds);
      },
      py::arg("n"), py::arg("horizon"), py::arg("i_star"));

  m.def(
      "run",
      [](const CanonicalInstance& inst, const std::string& algorithm, std::size_t horizon, std::uint64_t seed,
         double gamma, std::size_t grid_size, bool record_rounds) {
        const auto reg = harness::AlgorithmRegistry::builtin();
        harness::AlgorithmSpec spec{algorithm, gamma, grid_size};
        py::gil_scoped_release release;
        auto tr = reg.get(algorithm)(inst, horizon, seed, spec, {record_rounds, nullptr});
        py::gil_scoped_acquire acquire;
        return trace_summary(tr, inst);
      },
      py::arg("instance"), py::arg("algorithm"), py::arg("horizon"), py::arg("seed") = 0, py::arg("gamma") = 0.0,
      py::arg("grid_size") = 0, py::arg("record_rounds") = false);

  m.def(
      "run_experiment",
      [](const std::vector<CanonicalInstance>& instances, const std::vector<std::string>& algorithms,
         const std::vector<std::size_t>& horizons, std::size_t replications, std::uint64_t seed, std::size_t workers,
         double gamma, bool paired_seeds) {
        harness::ExperimentConfig cfg;
        cfg.instances = instances;
        for (const auto& a : algorithms) cfg.algorithms.push_back({a, a == "id-rji-os" ? gamma : 0.0});
        cfg.horizons = horizons;
        cfg.replications = replications;
        cfg.master_seed = seed;
        cfg.workers = workers;
        cfg.paired_seeds = paired_seeds;
        harness::ExperimentResult res;
        {
          py::gil_scoped_release release;
          res = harness::run_experiment(cfg);
        }
        py::list out;
        for (const auto& a : res.aggregate) {
          py::dict d;
          d["algorithm"] = a.algorithm;
          d["instance_id"] = a.instance_id;
          d["n"] = a.n;
          d["horizon"] = a.horizon;
          d["reps"] = a.reps;
          d["mean_regret"] = a.mean_regret;
          d["std"] = a.std;
          d["ci95"] = a.ci95;
          out.append(d);
        }
        return out;
      },
      py::arg("instances"), py::arg("algorithms"), py::arg("horizons"), py::arg("replications") = 1,
      py::arg("seed") = 0, py::arg("workers") = 1, py::arg("gamma") = 0.0, py::arg("paired_seeds") = false);

  m.def(
      "fit_regret_exponent",
      [](const std::vector<std::size_t>& horizons, const std::vector<double>& means) {
        if (horizons.size() != means.size()) throw std::invalid_argument("horizons and means differ in length");
        std::vector<harness::AggregateResult> rows;
        for (std::size_t i = 0; i < horizons.size(); ++i) rows.push_back({"", "", 0, horizons[i], 1, means[i]});
        return harness::fit_regret_exponent(rows);
      },
      py::arg("horizons"), py::arg("means"));
}
