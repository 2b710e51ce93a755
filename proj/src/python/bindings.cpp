#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>

#include "msb/cli.hpp"
#include "msb/ergodics.hpp"
#include "msb/io.hpp"
#include "msb/laplace.hpp"
#include "msb/simulate.hpp"

namespace py = pybind11;
using namespace msb;

namespace {

Vec2 vec(std::pair<double, double> p) { return {p.first, p.second}; }
MixedState state(std::pair<double, std::int64_t> p) { return {p.first, p.second}; }

py::array_t<double> rows_array(const std::vector<MixedState>& rows) {
  py::array_t<double> out({static_cast<py::ssize_t>(rows.size()), py::ssize_t{2}});
  auto a = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    a(i, 0) = rows[i].y1;
    a(i, 1) = static_cast<double>(rows[i].y2);
  }
  return out;
}

std::vector<Vec2> points(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 2 || a.shape(1) != 2) throw ValidationError("expected an (n, 2) array");
  auto v = a.unchecked<2>();
  std::vector<Vec2> out(static_cast<std::size_t>(a.shape(0)));
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = {v(i, 0), v(i, 1)};
  return out;
}

GroundMetric metric_of(const std::string& m) {
  if (m == "euclidean") return GroundMetric::kEuclidean;
  if (m == "manhattan") return GroundMetric::kManhattan;
  throw ValidationError("metric must be \"euclidean\" or \"manhattan\"");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Mixed-state branching processes: flows, simulation, Wasserstein ergodicity";
  m.attr("__version__") = kVersion;

  py::register_exception<NumericError>(m, "NumericError", PyExc_RuntimeError);
  py::register_exception<UnsupportedError>(m, "UnsupportedError", PyExc_NotImplementedError);
  py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_ValueError);

  py::class_<BranchingMechanism>(m, "BranchingMechanism")
      .def_readonly("a11", &BranchingMechanism::a11)
      .def_readonly("a21", &BranchingMechanism::a21)
      .def_readonly("alpha", &BranchingMechanism::alpha)
      .def("__repr__", [](const BranchingMechanism& b) { return "BranchingMechanism(" + to_json(b).dump() + ")"; });
  py::class_<ImmigrationMechanism>(m, "ImmigrationMechanism")
      .def_readonly("b", &ImmigrationMechanism::b)
      .def("__repr__", [](const ImmigrationMechanism& i) { return "ImmigrationMechanism(" + to_json(i).dump() + ")"; });

  m.def("parse_mechanism", [](const std::string& text) {
        const MechanismFile f = parse_mechanism(nlohmann::json::parse(text));
        return py::make_tuple(f.branching, f.immigration ? py::cast(*f.immigration) : py::none());
      }, py::arg("text"), "Parse a mechanism document (JSON text); returns (branching, immigration or None).");

  m.def("validate", [](const BranchingMechanism& b) {
        std::vector<std::pair<std::string, std::string>> out;
        for (const auto& v : validate_branching(b)) out.emplace_back(v.field, v.message);
        return out;
      });

  m.def("phi", [](const BranchingMechanism& b, std::pair<double, double> l) {
        const Vec2 v = phi(b, vec(l));
        return std::make_pair(v.x1, v.x2);
      });
  m.def("psi", [](const ImmigrationMechanism& i, std::pair<double, double> l) { return psi(i, vec(l)); });
  m.def("moment_matrix", [](const BranchingMechanism& b) {
        const Mat2 h = moment_matrix(b);
        return std::vector<std::vector<double>>{{h.m11, h.m12}, {h.m21, h.m22}};
      });

  m.def("solve_v", [](const BranchingMechanism& b, std::pair<double, double> l, double horizon, double step) {
        const FlowGrid g = solve_v(b, vec(l), horizon, step);
        py::array_t<double> v({static_cast<py::ssize_t>(g.values.size()), py::ssize_t{2}});
        auto a = v.mutable_unchecked<2>();
        for (std::size_t i = 0; i < g.values.size(); ++i) {
          a(i, 0) = g.values[i].x1;
          a(i, 1) = g.values[i].x2;
        }
        return py::make_tuple(py::array_t<double>(g.times.size(), g.times.data()), v);
      }, py::arg("mech"), py::arg("lam"), py::arg("horizon"), py::arg("step") = kDefaultStep);

  m.def("transition_laplace", [](const BranchingMechanism& b, std::pair<double, std::int64_t> x,
                                 std::pair<double, double> l, double t, double step) {
        return transition_laplace(b, state(x), vec(l), t, step);
      }, py::arg("mech"), py::arg("x"), py::arg("lam"), py::arg("t"), py::arg("step") = kDefaultStep);

  m.def("mean_state", [](const BranchingMechanism& b, std::pair<double, std::int64_t> x, double t) {
        const Vec2 v = mean_state(b, state(x), t);
        return std::make_pair(v.x1, v.x2);
      });

  m.def("survival_tau", [](const BranchingMechanism& b, std::pair<double, std::int64_t> y,
                           std::pair<double, double> r, double horizon, double step) {
        const ScalarFlowGrid g = survival_tau(b, state(y), vec(r), horizon, step);
        return py::make_tuple(py::array_t<double>(g.times.size(), g.times.data()),
                              py::array_t<double>(g.values.size(), g.values.data()));
      }, py::arg("mech"), py::arg("y"), py::arg("r"), py::arg("horizon"), py::arg("step") = kDefaultStep);

  m.def("stationary_laplace", [](const BranchingMechanism& b, const ImmigrationMechanism& i,
                                 std::pair<double, double> l) {
        const StationaryLaplace s = stationary_laplace(b, i, vec(l));
        py::dict d;
        d["value"] = s.value;
        d["horizon"] = s.horizon;
        d["tail_bound"] = s.tail_bound;
        return d;
      });

  m.def("ensemble", [](const BranchingMechanism& b, std::optional<ImmigrationMechanism> i,
                       std::pair<double, std::int64_t> x0, double t, double dt, std::size_t replicas,
                       std::uint64_t seed, unsigned threads) {
        EnsembleOptions o;
        o.dt = dt;
        o.replicas = replicas;
        o.seed = seed;
        o.threads = threads;
        EnsembleSample s;
        {
          py::gil_scoped_release release;
          s = ensemble(b, i ? &*i : nullptr, state(x0), t, o);
        }
        return rows_array(s.rows);
      }, py::arg("mech"), py::arg("imm"), py::arg("x0"), py::arg("t"), py::arg("dt") = 1e-3,
      py::arg("replicas") = 10000, py::arg("seed") = 42, py::arg("threads") = 0,
      "Terminal states (n, 2); replica i uses stream (seed, i).");

  m.def("ergodic_rate", [](const BranchingMechanism& b) {
        const ErgodicRate r = ergodic_rate(b);
        py::dict d;
        d["lambda1"] = r.lambda1;
        d["lambda2"] = r.lambda2;
        d["theta"] = std::vector<double>{r.theta11, r.theta12, r.theta21, r.theta22};
        d["vartheta"] = r.vartheta;
        d["rate"] = r.rate;
        return d;
      });

  m.def("w1_bounds", [](const BranchingMechanism& b, std::pair<double, std::int64_t> x,
                        std::pair<double, std::int64_t> y, double t) {
        const W1Bounds w = w1_bounds(b, state(x), state(y), t);
        return std::make_pair(w.lower, w.upper);
      });

  m.def("wasserstein1", [](py::array_t<double, py::array::c_style | py::array::forcecast> a,
                           py::array_t<double, py::array::c_style | py::array::forcecast> b,
                           const std::string& metric) {
        return wasserstein1_exact(points(a), points(b), metric_of(metric));
      }, py::arg("a"), py::arg("b"), py::arg("metric") = "euclidean");

  m.def("run_config", [](const std::string& path, const std::string& out_dir, unsigned threads) {
        std::ostringstream log;
        const ExitCode c = run(parse_config(path), out_dir, threads, log);
        return py::make_tuple(static_cast<int>(c), log.str());
      }, py::arg("path"), py::arg("out_dir") = "./out", py::arg("threads") = 0);
}
