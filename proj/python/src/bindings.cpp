#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "minkflow/error.hpp"
#include "minkflow/flow.hpp"
#include "minkflow/io.hpp"
#include "minkflow/minkowski.hpp"
#include "minkflow/shapes.hpp"
#include "minkflow/verify.hpp"

namespace py = pybind11;
using namespace minkflow;

namespace {

py::array_t<double> to_numpy(const ScalarField& v) { return py::array_t<double>(v.size(), v.data()); }

ScalarField from_numpy(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  return ScalarField(a.data(), a.data() + a.size());
}

ScalarField field_arg(const GridPtr& g, const py::object& obj) {
  if (py::isinstance<py::str>(obj)) return sample(*g, SpherePolynomial::parse(obj.cast<std::string>()));
  if (py::isinstance<py::float_>(obj) || py::isinstance<py::int_>(obj))
    return ScalarField(g->size(), obj.cast<double>());
  return from_numpy(obj.cast<py::array_t<double, py::array::c_style | py::array::forcecast>>());
}

py::array_t<double> rows_array(const std::vector<TrajectoryRow>& rows) {
  py::array_t<double> out({rows.size(), std::size_t{9}});
  auto m = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const double v[9] = {r.t, r.dt, r.eta, r.J, r.Z0, r.residual, r.lambda_min, r.u_min, r.u_max};
    for (py::ssize_t k = 0; k < 9; ++k) m(static_cast<py::ssize_t>(i), k) = v[k];
  }
  return out;
}

py::dict trajectory_dict(const Trajectory& tr) {
  py::dict d;
  d["status"] = to_string(tr.status);
  d["failure"] = tr.failure;
  d["regime"] = to_string(tr.regime);
  d["steps"] = tr.final_state.step;
  d["t"] = tr.final_state.t;
  d["residual"] = tr.final_state.residual;
  d["c"] = tr.c();
  d["body"] = tr.final_state.u;
  d["rows"] = rows_array(tr.rows);
  d["monotonicity_violations"] = tr.monitors.monotonicity_violations;
  d["max_Z0_drift"] = tr.monitors.max_Z0_drift;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Support-function flows and L_p Minkowski solver";

  static py::exception<Error> exc(m, "Error", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(exc, e.what());
    }
  });

  py::class_<SphereGrid, std::shared_ptr<SphereGrid>>(m, "Grid")
      .def(py::init([](int n, int n_theta, int n_phi) {
             if (n == 2 && n_phi == 0) n_phi = 2 * n_theta;
             return std::const_pointer_cast<SphereGrid>(SphereGrid::build(n, n_theta, n_phi));
           }),
           py::arg("n") = 2, py::arg("n_theta") = 32, py::arg("n_phi") = 0)
      .def_property_readonly("n", &SphereGrid::dim)
      .def_property_readonly("n_theta", &SphereGrid::n_theta)
      .def_property_readonly("n_phi", &SphereGrid::n_phi)
      .def("__len__", &SphereGrid::size)
      .def("nodes",
           [](const SphereGrid& g) {
             py::array_t<double> out({g.size(), std::size_t{3}});
             auto a = out.mutable_unchecked<2>();
             for (std::size_t i = 0; i < g.size(); ++i)
               for (py::ssize_t k = 0; k < 3; ++k) a(static_cast<py::ssize_t>(i), k) = g.node(i)[k];
             return out;
           })
      .def("weights", [](const SphereGrid& g) {
        const auto w = g.weights();
        return py::array_t<double>(w.size(), w.data());
      });

  py::class_<SupportField>(m, "Body")
      .def(py::init([](std::shared_ptr<SphereGrid> g, const py::object& values, bool symmetric) {
             SupportField b{g, field_arg(g, values), symmetric};
             if (b.u.size() != g->size()) throw Error(ErrorCode::size_mismatch, "body needs one value per grid node");
             return b;
           }),
           py::arg("grid"), py::arg("values"), py::arg("symmetric") = false)
      .def_static(
          "from_shape",
          [](std::shared_ptr<SphereGrid> g, const std::string& text, std::uint64_t seed) {
            return make_shape(parse_shape(text, g->dim(), seed), g);
          },
          py::arg("grid"), py::arg("shape"), py::arg("seed") = 0)
      .def_property_readonly("u", [](const SupportField& b) { return to_numpy(b.u); })
      .def_readonly("symmetric", &SupportField::symmetric)
      .def("volume", &volume)
      .def("sigma", [](const SupportField& b) { return to_numpy(curvature(b).sigma); })
      .def("lambda_min", [](const SupportField& b) { return curvature(b).lambda_min; })
      .def("renormalized", [](const SupportField& b) { return renormalize(b); })
      .def("scaled", &scaled)
      .def("dual", &dual_body)
      .def("sup_distance", &sup_distance);

  m.def(
      "flow",
      [](std::shared_ptr<SphereGrid> g, double alpha, double beta, const py::object& f, const SupportField* initial,
         bool symmetrize, long max_steps, double tol_residual, double cfl_safety) {
        FlowConfig c;
        c.params = FlowParams::make(*g, alpha, beta, field_arg(g, f), symmetrize);
        c.initial = initial ? *initial : make_shape(Shape::sphere(1), g);
        c.symmetrize = symmetrize;
        c.max_steps = max_steps;
        c.tol_residual = tol_residual;
        c.cfl_safety = cfl_safety;
        Trajectory tr;
        {
          py::gil_scoped_release nogil;
          tr = run(c);
        }
        return trajectory_dict(tr);
      },
      py::arg("grid"), py::arg("alpha"), py::arg("beta"), py::arg("f") = 1.0, py::arg("initial") = nullptr,
      py::arg("symmetrize") = true, py::arg("max_steps") = 20000, py::arg("tol_residual") = 1e-3,
      py::arg("cfl_safety") = 0.08);

  m.def(
      "lp_solve",
      [](double p, std::shared_ptr<SphereGrid> g, const py::object& phi, const SupportField* initial,
         double tol_residual, long max_steps) {
        LpOptions o;
        o.tol_residual = tol_residual;
        o.max_steps = max_steps;
        const LpProblem pr{p, g, field_arg(g, phi)};
        LpSolution s;
        {
          py::gil_scoped_release nogil;
          s = solve(pr, initial, o);
        }
        py::dict d;
        d["body"] = s.u;
        d["c"] = s.c;
        d["residual"] = s.residual;
        d["unique_up_to_dilation"] = s.unique_up_to_dilation;
        d["status"] = to_string(s.trajectory.status);
        d["steps"] = s.trajectory.final_state.step;
        return d;
      },
      py::arg("p"), py::arg("grid"), py::arg("phi"), py::arg("initial") = nullptr, py::arg("tol_residual") = 1e-4,
      py::arg("max_steps") = 60000);

  m.def(
      "manufactured_phi", [](const SupportField& b, double p) { return to_numpy(manufactured_phi(b, p)); },
      py::arg("body"), py::arg("p"));
  m.def(
      "lp_residual",
      [](const SupportField& b, const py::object& phi, double p) { return lp_residual(b, field_arg(b.grid, phi), p); },
      py::arg("body"), py::arg("phi"), py::arg("p"));

  m.def(
      "verify",
      [](std::shared_ptr<SphereGrid> g, int samples, std::uint64_t seed, std::vector<std::string> checks) {
        VerifyOptions o;
        o.grid = g;
        o.samples = samples;
        o.seed = seed;
        o.checks = std::move(checks);
        const VerifyReport rep = run_verify(o);
        py::list out;
        for (const auto& c : rep.checks)
          for (const auto& it : c.items) {
            py::dict d;
            d["check"] = c.name;
            d["item"] = it.name;
            d["value"] = it.value;
            d["tolerance"] = it.tolerance;
            d["pass"] = it.pass;
            out.append(d);
          }
        return out;
      },
      py::arg("grid"), py::arg("samples") = 20, py::arg("seed") = 7, py::arg("checks") = std::vector<std::string>{});

  m.def(
      "write_body", [](const SupportField& b, const std::string& path) { write_body(b, path, "python"); },
      py::arg("body"), py::arg("path"));
  m.def(
      "read_body", [](const std::string& path) { return read_body(path); }, py::arg("path"));
}
