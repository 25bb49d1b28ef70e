// Python module _core. Configs cross the boundary as JSON text; the package
// wrapper turns dicts into that.

#include "oddvmc/config.hpp"
#include "oddvmc/errors.hpp"
#include "oddvmc/experiment.hpp"
#include "oddvmc/theory.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace oddvmc;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<double> to_vec(const Array& a) { return {a.data(), a.data() + a.size()}; }

Array to_array(const std::vector<double>& v) {
  Array out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

RunConfig config_from(const std::string& text) { return parse_run_config(nlohmann::json::parse(text)); }

// Ansatz plus the config it came from
struct PyAnsatz {
  RunConfig config;
  Ansatz ansatz;

  explicit PyAnsatz(const std::string& text)
      : config(config_from(text)), ansatz(config.train.molecule, config.train.ansatz) {}

  void check(const std::vector<double>& r, const std::vector<double>& p) const {
    if (static_cast<int>(r.size()) != ansatz.dim()) {
      throw std::invalid_argument("positions need " + std::to_string(ansatz.dim()) + " coordinates");
    }
    if (p.size() != ansatz.layout().size()) {
      throw std::invalid_argument("params need " + std::to_string(ansatz.layout().size()) + " entries");
    }
  }
};

py::dict record_dict(const TrainRecord& r) {
  py::dict d;
  d["step"] = r.step;
  d["energy"] = r.energy;
  d["stderr"] = r.stderr_;
  d["accept_rate"] = r.accept_rate;
  d["alpha"] = r.alpha;
  d["skipped"] = r.skipped;
  return d;
}

} // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "oddvmc core bindings";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def("molecule_presets", &molecule_preset_names);
  m.def("config_hash", [](const std::string& text) { return config_hash(config_from(text)); });
  m.def("resolve_config", [](const std::string& text) { return to_json(config_from(text)).dump(); },
        "Validated config with every default filled in, as JSON text.");

  py::class_<PyAnsatz>(m, "Ansatz")
      .def(py::init<const std::string&>(), py::arg("config_json"))
      .def_property_readonly("n_params", [](const PyAnsatz& a) { return a.ansatz.layout().size(); })
      .def_property_readonly("dim", [](const PyAnsatz& a) { return a.ansatz.dim(); })
      .def_property_readonly("n_nuclei", [](const PyAnsatz& a) { return a.ansatz.molecule().n_nuclei(); })
      .def("init_params", [](const PyAnsatz& a, std::uint64_t seed) { return to_array(a.ansatz.init_params(seed)); },
           py::arg("seed") = 0)
      .def("param_blocks",
           [](const PyAnsatz& a) {
             py::dict d;
             for (const auto& b : a.ansatz.layout().blocks()) {
               d[py::str(b.name)] = py::make_tuple(b.offset, b.size());
             }
             return d;
           })
      .def("log_psi",
           [](const PyAnsatz& a, const Array& r, const Array& p) {
             const auto rv = to_vec(r), pv = to_vec(p);
             a.check(rv, pv);
             const auto s = a.ansatz.log_psi(std::span<const double>(rv), std::span<const double>(pv));
             return py::make_tuple(s.sign, s.logabs);
           })
      .def("determinants",
           [](const PyAnsatz& a, const Array& r, const Array& p) {
             const auto rv = to_vec(r), pv = to_vec(p);
             a.check(rv, pv);
             std::vector<std::pair<int, double>> out;
             for (const auto& d : a.ansatz.determinants(rv, pv)) {
               out.emplace_back(d.sign, d.logabs);
             }
             return out;
           })
      .def("grad_log_psi",
           [](const PyAnsatz& a, const Array& r, const Array& p) {
             const auto rv = to_vec(r), pv = to_vec(p);
             a.check(rv, pv);
             return to_array(a.ansatz.grad_log_psi(rv, pv));
           },
           "d log|psi| / d params.")
      .def("local_energy",
           [](const PyAnsatz& a, const Array& r, const Array& p) {
             const auto rv = to_vec(r), pv = to_vec(p);
             a.check(rv, pv);
             const auto e = local_energy(a.ansatz, rv, std::span<const double>(pv));
             py::dict d;
             d["kinetic"] = e.kinetic;
             d["electron_nuclear"] = e.electron_nuclear;
             d["electron_electron"] = e.electron_electron;
             d["nuclear_nuclear"] = e.nuclear_nuclear;
             d["total"] = e.total;
             return d;
           })
      .def("sample",
           [](const PyAnsatz& a, const Array& p, int n, std::uint64_t seed) {
             const auto pv = to_vec(p);
             const auto configs = psi2_configurations(a.ansatz, pv, n, seed);
             py::array_t<double> out({static_cast<py::ssize_t>(configs.size()), static_cast<py::ssize_t>(a.ansatz.dim())});
             auto w = out.mutable_unchecked<2>();
             for (std::size_t i = 0; i < configs.size(); ++i) {
               for (int k = 0; k < a.ansatz.dim(); ++k) {
                 w(static_cast<py::ssize_t>(i), k) = configs[i][static_cast<std::size_t>(k)];
               }
             }
             return out;
           },
           py::arg("params"), py::arg("n"), py::arg("seed") = 0, "Configurations drawn from psi^2.")
      .def("cusp_scan",
           [](const PyAnsatz& a, const Array& p, int nucleus, const Array& radii, const Array& background,
              std::array<double, 3> direction) {
             const auto pv = to_vec(p), rv = to_vec(radii), bg = to_vec(background);
             a.check(bg, pv);
             std::vector<py::dict> out;
             for (const auto& pt : cusp_scan(a.ansatz, pv, nucleus, direction, rv, bg)) {
               py::dict d;
               d["radius"] = pt.radius;
               d["log_derivative"] = pt.along;
               d["averaged"] = pt.averaged;
               d["flagged"] = pt.flagged;
               out.push_back(d);
             }
             return out;
           },
           py::arg("params"), py::arg("nucleus"), py::arg("radii"), py::arg("background"),
           py::arg("direction") = std::array<double, 3>{0.0, 0.0, 1.0});

  m.def(
      "train",
      [](const std::string& text) {
        const auto c = config_from(text);
        TrainResult res;
        {
          py::gil_scoped_release release;
          res = train(c.train);
        }
        py::dict d;
        d["energy"] = res.energy;
        d["stderr"] = res.stderr_;
        d["alpha"] = res.alpha;
        d["diverged"] = res.diverged;
        d["diagnostic"] = res.diagnostic;
        d["params"] = to_array(res.params);
        py::list recs;
        for (const auto& r : res.records) {
          recs.append(record_dict(r));
        }
        d["records"] = recs;
        return d;
      },
      py::arg("config_json"));

  m.def(
      "run_checks",
      [](const std::string& scope, int trials, std::uint64_t seed, bool random_v) {
        SuiteOptions opt;
        opt.trials = trials;
        opt.seed = seed;
        opt.random_v = random_v;
        std::vector<CheckReport> reps;
        {
          py::gil_scoped_release release;
          reps = run_checks(parse_check_scope(scope), opt);
        }
        std::vector<std::string> out;
        for (const auto& r : reps) {
          out.push_back(r.to_json());
        }
        return out;
      },
      py::arg("scope") = "all", py::arg("trials") = 1000, py::arg("seed") = 0, py::arg("random_v") = false);

  m.def(
      "run_experiment",
      [](const std::string& text, const std::string& dir) {
        const auto c = config_from(text);
        RunOutcome o;
        {
          py::gil_scoped_release release;
          o = run_experiment(c, dir);
        }
        py::dict d;
        d["energy"] = o.row.energy;
        d["stderr"] = o.row.stderr_;
        d["nan_flag"] = o.row.nan_flag;
        d["config_hash"] = o.config_hash;
        return d;
      },
      py::arg("config_json"), py::arg("output_dir"));
}
