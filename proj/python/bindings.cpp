#include "dynlaw/als.hpp"
#include "dynlaw/errors.hpp"
#include "dynlaw/harness.hpp"
#include "dynlaw/io.hpp"
#include "dynlaw/rank_theory.hpp"
#include "dynlaw/selection.hpp"
#include "dynlaw/systems.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace dynlaw;

namespace {

std::vector<Interval> to_intervals(const std::vector<std::pair<double, double>>& pairs) {
  std::vector<Interval> out;
  for (auto [lo, hi] : pairs) out.push_back({lo, hi});
  return out;
}

std::vector<std::pair<double, double>> from_intervals(const std::vector<Interval>& iv) {
  std::vector<std::pair<double, double>> out;
  for (const Interval& i : iv) out.emplace_back(i.lo, i.hi);
  return out;
}

SystemSpec make_system(const std::string& kind, std::size_t d) {
  const SystemKind k = system_kind_from_string(kind);
  if (k == SystemKind::Fput) return make_fput(d);
  if (k == SystemKind::Dipole) return make_dipole(d);
  return make_lennard_jones(d);
}

} // namespace

PYBIND11_MODULE(_dynlaw, m) {
  m.doc() = "Block-sparse tensor-train recovery of dynamical laws";
  m.attr("__version__") = DYNLAW_VERSION;

  static py::exception<Error> error(m, "Error");
  py::register_exception<ConfigError>(m, "ConfigError", error.ptr());
  py::register_exception<InputError>(m, "InputError", error.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", error.ptr());
  py::register_exception<DimensionError>(m, "DimensionError", error.ptr());
  py::register_exception<DomainError>(m, "DomainError", error.ptr());

  py::class_<SystemSpec>(m, "System")
      .def(py::init(&make_system), py::arg("kind"), py::arg("d"))
      .def_property_readonly("d", [](const SystemSpec& s) { return s.d; })
      .def_property_readonly("kind", [](const SystemSpec& s) { return to_string(s.kind); })
      .def("rhs", [](const SystemSpec& s, const std::vector<double>& x) { return Vector(s.rhs(x)); })
      .def("targets", [](const SystemSpec& s, const Matrix& X) { return system_targets(s, X); })
      .def("default_domains",
           [](const SystemSpec& s) { return from_intervals(default_sampler(s).intervals); });

  py::class_<Dictionary>(m, "Dictionary")
      .def(py::init([](const std::string& kind, int degree, const std::vector<std::pair<double, double>>& domains) {
             return make_dictionary(kind, degree, to_intervals(domains));
           }),
           py::arg("kind"), py::arg("degree"), py::arg("domains"))
      .def_property_readonly("size", &Dictionary::size)
      .def("eval", [](const Dictionary& d, std::size_t mode, double x) { return Vector(d.eval(mode, x)); })
      .def("weights", [](const Dictionary& d) { return d.degree_map().weights(); });

  py::class_<SelectionTable>(m, "SelectionTable")
      .def(py::init(&local_selection_table), py::arg("d"), py::arg("L"))
      .def_property_readonly("alpha", &SelectionTable::alpha)
      .def("at", &SelectionTable::at);

  py::class_<TrainOptions>(m, "TrainOptions")
      .def(py::init<>())
      .def_readwrite("max_sweeps", &TrainOptions::max_sweeps)
      .def_readwrite("loss_rel_tol", &TrainOptions::loss_rel_tol)
      .def_readwrite("ridge", &TrainOptions::ridge)
      .def_readwrite("restarts", &TrainOptions::restarts)
      .def_readwrite("revert_on_increase", &TrainOptions::revert_on_increase)
      .def_readwrite("seed", &TrainOptions::seed);

  py::class_<ModelEnsemble>(m, "Model")
      .def(py::init([](const Dictionary& dict, const SelectionTable& table, int lambda, std::size_t rho,
                       std::uint64_t seed) { return make_ensemble(dict, table, lambda, rho, seed); }),
           py::arg("dictionary"), py::arg("table"), py::arg("lam"), py::arg("rho"), py::arg("seed") = 0)
      .def_property_readonly("d", &ModelEnsemble::order)
      .def_property_readonly("parameter_count", &ModelEnsemble::parameter_count)
      .def("evaluate", [](const ModelEnsemble& e, const Matrix& X) { return e.evaluate_batch(X); })
      .def("to_json", [](const ModelEnsemble& e) { return dump_json(to_json(e)); })
      .def_static("from_json", [](const std::string& s) { return model_from_json(Json::parse(s)); });

  m.def(
      "sample",
      [](const SystemSpec& system, std::size_t M, double sigma, std::uint64_t seed) {
        const TrainingSet data = sample_dataset(system, default_sampler(system, sigma, seed), M);
        return py::make_tuple(data.X, data.Y);
      },
      py::arg("system"), py::arg("M"), py::arg("sigma") = 0.0, py::arg("seed") = 0,
      "States and targets (M x d each) drawn from the system's default box.");

  m.def(
      "train",
      [](const ModelEnsemble& init, const Matrix& X, const Matrix& Y, const TrainOptions& options) {
        TrainingSet data{X, Y, init.dictionary().domains()};
        TrainResult r = [&] {
          py::gil_scoped_release release;
          return train(init, data, options);
        }();
        return py::make_tuple(std::move(r.model), r.history.sweep_loss, r.history.converged);
      },
      py::arg("model"), py::arg("X"), py::arg("Y"), py::arg("options") = TrainOptions{},
      "Returns (model, per-sweep full loss, converged).");

  m.def("residuum", py::overload_cast<const Matrix&, const Matrix&>(&residuum), py::arg("predicted"),
        py::arg("truth"));

  m.def("c1_bound", &c1_bound, py::arg("chi"), py::arg("Ltilde"));
  m.def("c2_factor", &c2_factor, py::arg("N"), py::arg("d"), py::arg("k"), py::arg("K"));
  m.def("corollary_rank_bound", &corollary_rank_bound, py::arg("N"), py::arg("chi"), py::arg("g"), py::arg("eps"));
  m.def("truncated_dipole_error", &truncated_dipole_error, py::arg("d"), py::arg("Ltilde"), py::arg("samples"),
        py::arg("seed") = 0);

  m.def(
      "run_config",
      [](const std::string& config_json, std::size_t M, double sigma, int restart) {
        const Experiment exp(parse_config(Json::parse(config_json)));
        CellResult r = [&] {
          py::gil_scoped_release release;
          return run_cell(exp, {M, sigma, restart});
        }();
        return py::make_tuple(r.row.residuum, r.row.status, r.history.sweep_loss);
      },
      py::arg("config_json"), py::arg("M"), py::arg("sigma") = 0.0, py::arg("restart") = 0,
      "Runs one cell of an experiment config; returns (residuum, status, per-sweep loss).");
}
