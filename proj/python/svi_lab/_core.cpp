#include "svi/harness.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace svi;

namespace {

py::dict verdict_dict(const std::optional<ConditionVerdict>& v) {
  py::dict d;
  if (!v) return d;
  d["holds"] = v->holds;
  py::list violated;
  for (const auto& x : v->violated) violated.append(py::make_tuple(x.predicate, x.lhs, x.rhs));
  d["violated"] = violated;
  d["binding"] = v->binding;
  return d;
}

py::dict schedule_verdict_dict(const ScheduleVerdict& v) {
  py::dict d;
  if (v.as_convergence) d["as"] = verdict_dict(v.as_convergence);
  if (v.ms_convergence) d["ms"] = verdict_dict(v.ms_convergence);
  if (v.averaging_abcr) d["avg"] = verdict_dict(v.averaging_abcr);
  if (v.least_norm) d["least_norm"] = verdict_dict(v.least_norm);
  if (v.ratio_vanishes) d["ratio_vanishes"] = *v.ratio_vanishes;
  return d;
}

py::dict gap_dict(const GapReport& g) {
  py::dict d;
  d["value"] = g.value;
  d["certificate"] = g.certificate;
  d["method"] = to_string(g.method);
  d["restarts"] = g.restarts;
  d["tolerance"] = g.tolerance;
  d["converged"] = g.converged;
  d["fw_gap"] = g.fw_gap;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Stochastic approximation for monotone stochastic variational inequalities";
  m.attr("__version__") = "0.1.0";

  py::register_exception<UnsupportedOperation>(m, "UnsupportedOperation");
  py::register_exception<ConvergenceFailure>(m, "ConvergenceFailure");
  py::register_exception<PoisonedState>(m, "PoisonedState");
  py::register_exception<ConfigError>(m, "ConfigError");

  py::class_<CournotGame>(m, "CournotGame")
      .def(py::init<>())
      .def_static("standard_5x4", &CournotGame::standard_5x4)
      .def_readwrite("firms", &CournotGame::firms)
      .def_readwrite("nodes", &CournotGame::nodes)
      .def_readwrite("sigma", &CournotGame::sigma)
      .def_readwrite("a_lb", &CournotGame::a_lb)
      .def_readwrite("a_ub", &CournotGame::a_ub)
      .def_readwrite("b", &CournotGame::b)
      .def_readwrite("c", &CournotGame::c)
      .def_readwrite("d", &CournotGame::d)
      .def_readwrite("cap", &CournotGame::cap)
      .def_property_readonly("dimension", &CournotGame::dimension)
      .def("validate", &CournotGame::validate)
      .def("g_index", &CournotGame::g_index)
      .def("s_index", &CournotGame::s_index);

  m.def("expected_map", &cournot_expected_map, py::arg("game"), py::arg("x"));
  m.def(
      "sample_map",
      [](const CournotGame& g, const Vector& x, std::uint64_t seed) {
        Rng rng(seed);
        return cournot_sample_map(g, x, rng);
      },
      py::arg("game"), py::arg("x"), py::arg("seed"));
  m.def(
      "bound_C",
      [](const CournotGame& g, double eps) { return bound_C_for_cournot(g, eps).C; },
      py::arg("game"), py::arg("eps") = 0.0);
  m.def(
      "diameter_bound", [](const CournotGame& g) { return g.feasible_set()->diameter_bound(); },
      py::arg("game"));

  m.def(
      "project",
      [](const CournotGame& g, const Vector& x) { return g.feasible_set()->project(x); },
      py::arg("game"), py::arg("x"));
  m.def(
      "contains",
      [](const CournotGame& g, const Vector& x, double tol) {
        return g.feasible_set()->contains(x, tol);
      },
      py::arg("game"), py::arg("x"), py::arg("tol") = 1e-9);
  m.def(
      "project_cournot_block",
      [](const Vector& cap, const Vector& g0, const Vector& s0) {
        const CournotBlock block(cap);
        const BlockProjection p = block.project_parts(g0, s0);
        return py::make_tuple(p.g, p.s);
      },
      py::arg("cap"), py::arg("g0"), py::arg("s0"));

  m.def(
      "strong_gap",
      [](const CournotGame& g, const Vector& x) {
        return gap_dict(strong_gap(CournotMap(g), *g.feasible_set(), x));
      },
      py::arg("game"), py::arg("x"));
  m.def(
      "weak_gap",
      [](const CournotGame& g, const Vector& x, int restarts, double tol, std::uint64_t seed) {
        return gap_dict(weak_gap(CournotMap(g), *g.feasible_set(), x, restarts, tol, seed));
      },
      py::arg("game"), py::arg("x"), py::arg("restarts") = 16, py::arg("tol") = 1e-8,
      py::arg("seed") = 0x9a9);
  m.def(
      "reference_solution",
      [](const CournotGame& g, double tol) {
        return reference_solution(*g.feasible_set(), CournotMap(g), tol);
      },
      py::arg("game"), py::arg("tol") = 1e-10);
  m.def(
      "tikhonov_solve",
      [](const CournotGame& g, double eta, double tol) {
        const CournotOracle oracle(g, 0.0);
        return tikhonov_solve(*g.feasible_set(), oracle, MapKind::exact, eta, 0.0, tol).s;
      },
      py::arg("game"), py::arg("eta"), py::arg("tol") = 1e-10);

  py::class_<PowerLawTriple>(m, "PowerLawTriple")
      .def(py::init<>())
      .def(py::init([](double gamma0, double a, double eta0, double b, double eps0, double c,
                       double offset) {
             return PowerLawTriple{gamma0, a, eta0, b, eps0, c, offset};
           }),
           py::arg("gamma0") = 1.0, py::arg("a") = 0.5, py::arg("eta0") = 0.0,
           py::arg("b") = 0.0, py::arg("eps0") = 0.0, py::arg("c") = 0.0,
           py::arg("offset") = 0.0)
      .def_readwrite("gamma0", &PowerLawTriple::gamma0)
      .def_readwrite("a", &PowerLawTriple::a)
      .def_readwrite("eta0", &PowerLawTriple::eta0)
      .def_readwrite("b", &PowerLawTriple::b)
      .def_readwrite("eps0", &PowerLawTriple::eps0)
      .def_readwrite("c", &PowerLawTriple::c)
      .def_readwrite("offset", &PowerLawTriple::offset)
      .def("eval",
           [](const PowerLawTriple& t, long k) {
             const StepParameters p = eval(t, k);
             return py::make_tuple(p.gamma, p.eta, p.eps);
           })
      .def("__eq__", [](const PowerLawTriple& a, const PowerLawTriple& b) { return a == b; })
      .def("__repr__", [](const PowerLawTriple& t) {
        return "PowerLawTriple(gamma0=" + format_double(t.gamma0) + ", a=" + format_double(t.a) +
               ", eta0=" + format_double(t.eta0) + ", b=" + format_double(t.b) +
               ", eps0=" + format_double(t.eps0) + ", c=" + format_double(t.c) +
               ", offset=" + format_double(t.offset) + ")";
      });

  m.def("rssa_setting", &rssa_setting, py::arg("index"), py::arg("horizon"));
  m.def(
      "validate_as", [](const PowerLawTriple& t) { return schedule_verdict_dict(validate_as(t)); },
      py::arg("triple"));
  m.def(
      "validate_ms", [](const PowerLawTriple& t) { return schedule_verdict_dict(validate_ms(t)); },
      py::arg("triple"));
  m.def(
      "validate_averaging",
      [](const PowerLawTriple& t, double r) {
        return schedule_verdict_dict(validate_averaging(t, r));
      },
      py::arg("triple"), py::arg("r"));
  m.def(
      "rate_preset",
      [](double delta, double delta_prime) {
        const RatePreset p = rate_preset(delta, delta_prime);
        return py::make_tuple(p.a, p.b, p.c, p.r_max);
      },
      py::arg("delta"), py::arg("delta_prime"));
  m.def("window_stepsize", &window_stepsize, py::arg("M"), py::arg("C"), py::arg("r"),
        py::arg("k"));
  m.def(
      "feasible_region_grid",
      [](int resolution) {
        py::list out;
        for (const auto& c : feasible_region_grid(resolution)) {
          out.append(py::make_tuple(c.a, c.b, c.c, c.as_holds, c.ms_holds));
        }
        return out;
      },
      py::arg("resolution"));

  m.def(
      "ub_bounds",
      [](double M, double C, double lambda, long N, long ell) {
        const WindowBounds b = ub_bounds(M, C, lambda, N, ell);
        return py::make_tuple(b.ub1, b.ub2, b.h);
      },
      py::arg("M"), py::arg("C"), py::arg("lam"), py::arg("N"), py::arg("ell"));
  m.def(
      "loglog_rate_fit",
      [](const std::vector<double>& Ns, const std::vector<double>& gaps) {
        const RateFit f = loglog_rate_fit(Ns, gaps);
        return py::make_tuple(f.slope, f.intercept, f.r_squared);
      },
      py::arg("Ns"), py::arg("gaps"));

  m.def(
      "run_path",
      [](const CournotGame& g, const std::string& scheme, const PowerLawTriple& schedule,
         long horizon, std::uint64_t seed, double r, std::vector<long> ticks,
         std::optional<Vector> start) {
        SolverConfig cfg;
        cfg.scheme = parse_scheme(scheme);
        cfg.schedule = schedule;
        cfg.r = r;
        cfg.horizon = horizon;
        cfg.ticks = std::move(ticks);
        cfg.start = start ? *start : Vector::Zero(g.dimension());
        const CournotOracle oracle(g, schedule.eps0);
        const PathRecord rec = run_path(cfg, oracle, *g.feasible_set(), seed);
        py::list out;
        for (const auto& cp : rec.checkpoints) {
          py::dict d;
          d["k"] = cp.k;
          d["x"] = cp.x;
          d["average"] = cp.average;
          d["gamma"] = cp.params.gamma;
          d["eta"] = cp.params.eta;
          d["eps"] = cp.params.eps;
          out.append(d);
        }
        return out;
      },
      py::arg("game"), py::arg("scheme"), py::arg("schedule"), py::arg("horizon"),
      py::arg("seed"), py::arg("r") = 1.0, py::arg("ticks") = std::vector<long>{},
      py::arg("start") = std::nullopt);

  m.def(
      "run_config",
      [](const std::string& text, int threads) {
        const RunConfig cfg = load_run_config(parse_config_text(text, "<string>"));
        RunResult result;
        {
          py::gil_scoped_release release;
          result = run_experiment(cfg, threads);
        }
        py::dict d;
        d["paths_csv"] = paths_csv(result);
        d["aggregate_csv"] = aggregate_csv(result);
        d["effective_config"] = effective_config_text(cfg);
        return d;
      },
      py::arg("text"), py::arg("threads") = 1);
  m.def(
      "effective_config",
      [](const std::string& text) {
        return effective_config_text(load_run_config(parse_config_text(text, "<string>")));
      },
      py::arg("text"));
}
