#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "coalweb/cli.hpp"
#include "coalweb/coalescence_maps.hpp"
#include "coalweb/error.hpp"
#include "coalweb/experiments.hpp"
#include "coalweb/increments.hpp"
#include "coalweb/path_space.hpp"
#include "coalweb/voter.hpp"
#include "coalweb/walks.hpp"

namespace py = pybind11;
using namespace coalweb;

namespace {

py::object fraction(const Rational& r) {
  static py::object cls = py::module_::import("fractions").attr("Fraction");
  return cls(py::int_(py::str(numerator(r).str())), py::int_(py::str(denominator(r).str())));
}

PathKind path_kind(const std::string& s) {
  if (s == "step") return PathKind::step;
  if (s == "interpolated") return PathKind::interpolated;
  throw InvalidArgument("path kind must be step or interpolated");
}

Path make_path(const std::string& kind, const std::vector<std::pair<double, double>>& points, std::optional<double> t_end) {
  std::vector<Breakpoint> b;
  for (const auto& [t, x] : points) b.push_back({t, x});
  return t_end ? Path(path_kind(kind), std::move(b), *t_end) : Path(path_kind(kind), std::move(b));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Coalescing random walks, the voter model and their diffusive limits.";

  static py::exception<InvalidArgument> invalid(m, "InvalidArgument", PyExc_ValueError);
  static py::exception<GuardViolation> guard(m, "GuardViolation", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const GuardViolation& e) {
      PyErr_SetString(guard.ptr(), e.what());
    } catch (const InvalidArgument& e) {
      PyErr_SetString(invalid.ptr(), e.what());
    }
  });

  py::class_<IncrementDistribution>(m, "Law")
      .def_property_readonly("mean", &IncrementDistribution::mean)
      .def_property_readonly("variance", &IncrementDistribution::variance)
      .def_property_readonly("sigma", &IncrementDistribution::sigma)
      .def_property_readonly("period", &IncrementDistribution::period)
      .def_property_readonly("text", &IncrementDistribution::text)
      .def("support", [](const IncrementDistribution& law) {
        py::dict d;
        for (const auto& s : law.exact_support()) d[py::int_(s.offset)] = fraction(s.prob);
        return d;
      })
      .def("__eq__", [](const IncrementDistribution& a, const IncrementDistribution& b) { return a == b; })
      .def("__repr__", [](const IncrementDistribution& law) { return "Law(\"" + law.text() + "\")"; });

  m.def("parse_law", [](const std::string& s) { return parse_law(s); }, py::arg("text"));
  m.def("lazy_uniform_law", &lazy_uniform_law);
  m.def("two_step_law", &two_step_law);

  m.def("ladder_pmf", [](const IncrementDistribution& law) { return ladder_distribution_exact(law).pmf; },
        py::arg("law"), "P(Z = k) for k = 1, 2, ... of the strict ascending ladder height.");
  m.def("overshoot_limit",
        [](const IncrementDistribution& law) { return overshoot_limit(law, ladder_distribution_exact(law)); },
        py::arg("law"), "Limiting overshoot law P(O = k), k = 0, 1, ...");

  m.def("enumerate_exact",
        [](const IncrementDistribution& law, std::int64_t width, std::int64_t steps) {
          const auto occ = enumerate_exact(law, width, steps);
          py::list single, pair;
          for (const auto& p : occ.single) single.append(fraction(p));
          for (const auto& row : occ.pair) {
            py::list r;
            for (const auto& p : row) r.append(fraction(p));
            pair.append(r);
          }
          return py::make_tuple(single, pair);
        },
        py::arg("law"), py::arg("width"), py::arg("steps"),
        "Exact single and pair occupancy probabilities on a torus, as Fractions.");

  m.def("density",
        [](const IncrementDistribution& law, std::int64_t t, std::int64_t width, std::size_t trials,
           std::uint64_t seed) {
          const auto d = density(law, t, width, trials, seed);
          return py::make_tuple(d.p, d.se);
        },
        py::arg("law"), py::arg("t"), py::arg("width"), py::arg("trials"), py::arg("seed"),
        "Occupation probability of a site at time t from a full torus start: (estimate, se).");

  m.def("occupied_sites",
        [](const IncrementDistribution& law, std::int64_t width, std::int64_t t, std::uint64_t seed) {
          const SpaceTimeWindow w{0, width, 0.0, static_cast<double>(t), Boundary::torus, 0};
          return simulate_discrete(w, law, full_band_origins(w, 0.0), seed).occupied(static_cast<double>(t));
        },
        py::arg("law"), py::arg("width"), py::arg("t"), py::arg("seed"));

  py::class_<Path>(m, "Path")
      .def(py::init(&make_path), py::arg("kind"), py::arg("points"), py::arg("t_end") = py::none())
      .def("value", &Path::value)
      .def_property_readonly("t0", &Path::t0)
      .def_property_readonly("t_end", &Path::t_end)
      .def_property_readonly("points", [](const Path& p) {
        std::vector<std::pair<double, double>> out;
        for (const auto& b : p.breakpoints()) out.emplace_back(b.t, b.x);
        return out;
      })
      .def("__eq__", [](const Path& a, const Path& b) { return a == b; });

  m.def("rho", [](double x1, double t1, double x2, double t2) { return rho({x1, t1}, {x2, t2}); });
  m.def("path_distance",
        [](const Path& a, const Path& b, int grid) {
          const auto d = path_distance(a, b, grid);
          return py::make_tuple(d.value, d.error_bound);
        },
        py::arg("a"), py::arg("b"), py::arg("grid") = kDefaultGrid, "(value, error bound)");
  m.def("hausdorff",
        [](const PathSet& a, const PathSet& b, int grid) {
          const auto d = hausdorff(a, b, grid);
          return py::make_tuple(d.value, d.error_bound);
        },
        py::arg("a"), py::arg("b"), py::arg("grid") = kDefaultGrid, "(value, error bound)");

  m.def("coalesce",
        [](const std::vector<Path>& paths, const std::string& map, const std::string& kind) {
          IndependentFamily fam;
          fam.kind = kind == "step"           ? FamilyKind::lattice_step
                     : kind == "interpolated" ? FamilyKind::lattice_interpolated
                     : kind == "gaussian"     ? FamilyKind::gaussian_grid
                                              : throw InvalidArgument("unknown family kind " + kind);
          fam.paths = paths;
          if (map != "f" && map != "g") throw InvalidArgument("map must be f or g");
          const auto out = map == "f" ? apply_f(fam) : apply_g(fam);
          py::list log;
          for (const auto& e : out.state.merge_log) log.append(py::make_tuple(e.time, e.absorbed, e.representative));
          return py::make_tuple(out.paths, out.state.representative, log);
        },
        py::arg("paths"), py::arg("map") = "g", py::arg("kind") = "interpolated",
        "Apply the crossing (g) or coincidence (f) map: (paths, representatives, merge log).");

  m.def("interface_trace",
        [](const IncrementDistribution& law, double horizon, std::vector<double> times, std::uint64_t seed,
           const std::string& time_kind) {
          const auto tr = interface_trace(law, parse_time_kind(time_kind), horizon, std::move(times), seed);
          py::list samples;
          for (const auto& s : tr.samples) samples.append(py::make_tuple(s.t, s.l, s.r));
          return py::make_tuple(samples, tr.alpha);
        },
        py::arg("law"), py::arg("horizon"), py::arg("times"), py::arg("seed"), py::arg("time_kind") = "continuous",
        "Heaviside voter interface: ([(t, l, r)], opinions on [l, r] at the horizon).");

  m.def("dual_check",
        [](const IncrementDistribution& law, const std::string& time_kind, std::int64_t x_lo,
           std::vector<std::uint8_t> initial, double horizon, std::uint64_t seed,
           const std::vector<std::pair<std::int64_t, double>>& a) {
          const auto x_hi = x_lo + static_cast<std::int64_t>(initial.size());
          const CoupledRealization c(law, parse_time_kind(time_kind), x_lo, x_hi, horizon,
                                     VoterState(x_lo, x_hi, std::move(initial)), seed);
          std::vector<SpaceTimeSite> sites;
          for (const auto& [x, t] : a) sites.push_back({x, t});
          return dual_check(c, sites);
        },
        py::arg("law"), py::arg("time_kind"), py::arg("x_lo"), py::arg("initial"), py::arg("horizon"),
        py::arg("seed"), py::arg("a"));

  m.def("etahat_reference", &etahat_reference, py::arg("a"), py::arg("b"), py::arg("t"));
  m.def("experiment_kinds", [] {
    std::vector<std::string> out;
    for (auto k : all_experiment_kinds()) out.push_back(to_string(k));
    return out;
  });
  m.def("run_experiment_json",
        [](const std::vector<std::string>& args) {
          const auto inv = parse_cli(args);
          if (inv.subcommand == "oracle" || inv.subcommand == "metrics") {
            throw InvalidArgument("run_experiment takes an experiment subcommand");
          }
          py::gil_scoped_release release;
          return report_json(run(inv.config));
        },
        py::arg("args"), "Run an experiment from CLI-style arguments and return the JSON report.");
  m.def("cli_main",
        [](const std::vector<std::string>& args) {
          std::ostringstream out, err;
          const int code = cli_main(args, out, err);
          return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "(exit code, stdout, stderr) of the command-line tool.");
}
