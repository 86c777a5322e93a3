#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "anisolab/config.hpp"
#include "anisolab/run.hpp"

namespace py = pybind11;
using namespace anisolab;

namespace {

using FArray = py::array_t<double, py::array::f_style | py::array::forcecast>;

// Nodal fields are Fortran-ordered arrays indexed [i, j(, k)] along x, y(, z).
FArray to_array(const Field& u) {
  const Grid& g = u.grid();
  std::vector<py::ssize_t> shape(static_cast<std::size_t>(g.dim()), g.n());
  FArray out(shape);
  std::copy(u.values().begin(), u.values().end(), out.mutable_data());
  return out;
}

Field from_array(const Grid& g, const FArray& a) {
  if (a.ndim() != g.dim()) throw std::invalid_argument("field array must have one axis per grid dimension");
  for (py::ssize_t ax = 0; ax < a.ndim(); ++ax)
    if (a.shape(ax) != g.n()) throw std::invalid_argument("field array shape does not match the grid");
  return Field(g, std::vector<double>(a.data(), a.data() + a.size()));
}

py::dict solve_report_dict(const SolveReport& r) {
  py::dict d;
  d["converged"] = r.converged;
  d["residual"] = r.residual;
  d["iterations"] = r.iterations;
  d["picard_used"] = r.picard_used;
  py::list ladder;
  for (const DeltaLevel& l : r.delta_ladder) {
    py::dict e;
    e["delta"] = l.delta;
    e["iterations"] = l.iterations;
    e["residual"] = l.residual;
    e["converged"] = l.converged;
    ladder.append(e);
  }
  d["delta_ladder"] = ladder;
  py::list hist;
  for (const IterationRecord& it : r.history) {
    py::dict e;
    e["delta"] = it.delta;
    e["kind"] = it.kind;
    e["step"] = it.step;
    e["merit_before"] = it.merit_before;
    e["merit_after"] = it.merit_after;
    e["residual"] = it.residual;
    e["accepted"] = it.accepted;
    hist.append(e);
  }
  d["history"] = hist;
  return d;
}

py::dict ladder_report_dict(const LadderReport& rep) {
  py::dict d;
  d["complete"] = rep.complete;
  d["passed"] = rep.passed();
  py::list levels;
  for (const LevelRecord& l : rep.levels) {
    py::dict e;
    e["level"] = l.level;
    e["epsilon"] = l.epsilon;
    e["w_norm"] = l.w_norm;
    e["phi_integral"] = l.phi_integral;
    e["increment"] = l.increment ? py::object(py::float_(*l.increment)) : py::object(py::none());
    e["energy_residual"] = l.energy_residual;
    e["iterations"] = l.iterations;
    e["solve_residual"] = l.solve_residual;
    e["converged"] = l.converged;
    py::list tr;
    for (const TruncationDiagnostics& t : l.truncation) {
      py::dict td;
      td["k"] = t.k;
      td["distance"] = t.distance;
      td["defect"] = t.defect;
      td["tail_lhs"] = t.tail.lhs;
      td["tail_rhs"] = t.tail.rhs;
      td["tail_margin"] = t.tail.margin;
      tr.append(td);
    }
    e["truncation"] = tr;
    levels.append(e);
  }
  d["levels"] = levels;
  py::list asserts;
  for (const LadderAssertion& a : rep.assertions) asserts.append(py::make_tuple(a.name, a.passed, a.detail));
  d["assertions"] = asserts;
  if (rep.integrability) {
    py::dict s;
    s["total"] = rep.integrability->total;
    s["levels"] = rep.integrability->levels;
    s["tail_mass"] = rep.integrability->tail_mass;
    s["fractions"] = rep.integrability->fractions;
    s["set_mass"] = rep.integrability->set_mass;
    d["integrability"] = s;
  } else {
    d["integrability"] = py::none();
  }
  d["U"] = to_array(rep.U);
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Anisotropic elliptic solver laboratory";
  m.attr("__version__") = kVersion;

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def("validate_exponents", [](const std::vector<double>& p) {
    const Validation v = validate({p});
    return py::make_tuple(v.ok, v.violation);
  }, py::arg("p"), "(ok, violation) for an exponent vector.");

  m.def("derive_exponents", [](const std::vector<double>& p) {
    const DerivedExponents d = derive({p});
    py::dict out;
    out["p"] = d.p;
    out["pstar"] = d.pstar;
    out["pprime"] = d.pprime;
    return out;
  }, py::arg("p"));

  m.def("young_constant", [](const std::vector<double>& leading, double delta) {
    return young_constant(leading, delta);
  }, py::arg("leading"), py::arg("delta"));

  m.def("lambda_for", &lambda_for_value, py::arg("zeta_k"), py::arg("nu0"));
  m.def("bea_margin", &bea_margin, py::arg("t"), py::arg("lam"), py::arg("zeta_k"), py::arg("nu0"));
  m.def("phi_lambda", &phi_lambda, py::arg("t"), py::arg("lam"));

  py::class_<RunConfig>(m, "Config")
      .def_static("parse", &parse_config, py::arg("text"))
      .def_static("load", &load_config, py::arg("path"))
      .def("serialize", &serialize_config)
      .def_property("mode", [](const RunConfig& c) { return std::string(to_string(c.mode)); },
                    [](RunConfig& c, const std::string& s) { c.mode = parse_mode(s); })
      .def_property_readonly("p", [](const RunConfig& c) { return c.p.p; })
      .def_readonly("n", &RunConfig::n)
      .def_readwrite("epsilon", &RunConfig::epsilon)
      .def_readwrite("seed", &RunConfig::seed)
      .def_readwrite("out_dir", &RunConfig::out_dir)
      .def_readwrite("dump_fields", &RunConfig::dump_fields)
      .def("__eq__", [](const RunConfig& a, const RunConfig& b) { return a == b; })
      .def("__repr__", [](const RunConfig& c) { return "<Config mode=" + std::string(to_string(c.mode)) + ">"; });

  py::class_<ProblemInstance>(m, "Problem")
      .def(py::init([](const RunConfig& cfg, const std::string& base_dir) { return make_instance(cfg, base_dir); }),
           py::arg("config"), py::arg("base_dir") = ".")
      .def_property_readonly("shape", [](const ProblemInstance& p) {
        return std::vector<int>(static_cast<std::size_t>(p.grid.dim()), p.grid.n());
      })
      .def_property_readonly("h", [](const ProblemInstance& p) { return p.grid.h(); })
      .def_readwrite("epsilon", &ProblemInstance::epsilon)
      .def("residual", [](const ProblemInstance& p, const FArray& u, double delta) {
        return to_array(residual(p, from_array(p.grid, u), delta));
      }, py::arg("u"), py::arg("delta") = 0.0)
      .def("dual_norm", [](const ProblemInstance& p, const FArray& w) {
        return dual_norm(from_array(p.grid, w), p.flux.exponents);
      }, py::arg("w"))
      .def("w_norm", [](const ProblemInstance& p, const FArray& u) {
        return anisotropic_norm(from_array(p.grid, u), p.flux.exponents);
      }, py::arg("u"))
      .def("energy_residual", [](const ProblemInstance& p, const FArray& u) {
        return energy_residual(from_array(p.grid, u), p);
      }, py::arg("u"))
      .def("solve", [](const ProblemInstance& p, py::object u0, double tol, int max_iter) {
        SolverOptions opts;
        opts.tol = tol;
        opts.max_iter = max_iter;
        Field start = u0.is_none() ? Field(p.grid) : from_array(p.grid, u0.cast<FArray>());
        std::pair<Field, SolveReport> res;
        {
          py::gil_scoped_release release;
          res = solve_regularized(p, std::move(start), opts);
        }
        return py::make_tuple(to_array(res.first), solve_report_dict(res.second));
      }, py::arg("u0") = py::none(), py::arg("tol") = 1e-8, py::arg("max_iter") = 200);

  m.def("truncate", [](const FArray& u, double k) {
    const auto dim = static_cast<int>(u.ndim());
    const Grid g(dim, static_cast<int>(u.shape(0)));
    return to_array(truncate(from_array(g, u), k));
  }, py::arg("u"), py::arg("k"));

  m.def("run_checks", [](const RunConfig& cfg, const std::string& base_dir) {
    const std::vector<CheckResult> checks = run_checks(cfg, make_instance(cfg, base_dir));
    py::list out;
    for (const CheckResult& c : checks) {
      py::dict d;
      d["name"] = c.name;
      d["passed"] = c.passed;
      d["statistic"] = c.statistic;
      d["samples"] = c.samples;
      d["witness"] = c.witness;
      out.append(d);
    }
    return out;
  }, py::arg("config"), py::arg("base_dir") = ".");

  m.def("run_ladder", [](const RunConfig& cfg, const std::string& base_dir) {
    const ProblemInstance inst = make_instance(cfg, base_dir);
    LadderReport rep;
    {
      py::gil_scoped_release release;
      rep = run_ladder(cfg.ladder, inst, cfg.solver);
    }
    return ladder_report_dict(rep);
  }, py::arg("config"), py::arg("base_dir") = ".");

  m.def("run", [](const RunConfig& cfg, const std::string& base_dir) {
    std::ostringstream log;
    const int code = run(cfg, log, base_dir);
    return py::make_tuple(code, log.str());
  }, py::arg("config"), py::arg("base_dir") = ".",
     "Runs the configured mode, writes artifacts under config.out_dir and returns (exit_code, log).");
}
