#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>
#include <string>
#include <vector>

#include "fklab/config.hpp"
#include "fklab/estimators.hpp"
#include "fklab/geometry.hpp"
#include "fklab/ising.hpp"
#include "fklab/oracle.hpp"
#include "fklab/runio.hpp"

namespace py = pybind11;

namespace {

fklab::McKnobs make_knobs(bool sw, int burn_in, int thinning, std::uint64_t seed, int chains) {
  fklab::McKnobs mc;
  mc.swendsen_wang = sw;
  mc.burn_in = burn_in;
  mc.thinning = thinning;
  mc.seed = seed;
  mc.chains = chains;
  return mc;
}

fklab::BoundarySpec make_bc(const fklab::Region& region, const std::string& bc) {
  if (bc == "free") return fklab::BoundarySpec::free_bc();
  if (bc == "wired") return fklab::BoundarySpec::wired(region);
  throw py::value_error("bc must be \"free\" or \"wired\", got \"" + bc + "\"");
}

fklab::Coords to_coords(const fklab::Region& region, const std::vector<int>& x) {
  if (static_cast<int>(x.size()) != region.d())
    throw py::value_error("coordinate list must have exactly d=" + std::to_string(region.d()) +
                          " entries");
  fklab::Coords c{};
  for (std::size_t i = 0; i < x.size(); ++i) c[i] = x[i];
  return c;
}

int checked_vertex(const fklab::Region& region, const std::vector<int>& x) {
  int id = region.vertex_id(to_coords(region, x));
  if (id < 0) throw py::value_error("coordinates do not name a region vertex");
  return id;
}

std::string config_text(const py::object& config) {
  if (py::isinstance<py::str>(config)) return config.cast<std::string>();
  if (py::isinstance<py::dict>(config)) {
    py::object dumps = py::module_::import("json").attr("dumps");
    return dumps(config).cast<std::string>();
  }
  throw py::type_error("config must be a JSON string or a dict");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "fklab core bindings: exact FK oracles, Monte Carlo estimators, and the run driver";

  m.attr("__version__") = fklab::kToolVersion;
  m.attr("ESTIMATOR_STREAMS") = fklab::kEstimatorStreams;
  m.attr("MAX_ORACLE_EDGES") = fklab::kMaxOracleEdges;
  m.attr("MAX_ORACLE_SPINS") = fklab::kMaxOracleSpins;

  py::register_exception<fklab::CapExceeded>(m, "CapExceeded");
  static py::exception<fklab::ConfigError> config_error(m, "ConfigError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const fklab::ConfigError& e) {
      std::string text;
      for (const auto& issue : e.issues()) {
        if (!text.empty()) text += "\n";
        text += issue;
      }
      py::set_error(config_error, text.c_str());
    }
  });

  py::class_<fklab::Frac>(m, "Frac", "Exact rational, parsed from \"1/2\", \"2\", or \"0.25\"")
      .def(py::init(&fklab::Frac::parse), py::arg("text"))
      .def_readonly("num", &fklab::Frac::num)
      .def_readonly("den", &fklab::Frac::den)
      .def("value", &fklab::Frac::value)
      .def("floor_times", &fklab::Frac::floor_times, py::arg("k"))
      .def("__str__", &fklab::Frac::str)
      .def("__repr__", [](const fklab::Frac& f) { return "Frac(\"" + f.str() + "\")"; });
  py::implicitly_convertible<py::str, fklab::Frac>();

  py::class_<fklab::Region>(m, "Region", "A finite box-like vertex set with its edges and ghosts")
      .def_static("box", &fklab::Region::box, py::arg("d"), py::arg("n"))
      .def_static("slab", &fklab::Region::slab, py::arg("d"), py::arg("l"), py::arg("n"))
      .def_static("rect", &fklab::Region::rect, py::arg("d"), py::arg("l"), py::arg("m"))
      .def_static("half_box", &fklab::Region::half_box, py::arg("d"), py::arg("k"))
      .def_static("bare_edge", &fklab::Region::bare_edge, py::arg("d") = 2)
      .def_static("plaquette", &fklab::Region::plaquette)
      .def_property_readonly("d", &fklab::Region::d)
      .def_property_readonly("n_vertices", &fklab::Region::n_vertices)
      .def_property_readonly("n_edges", &fklab::Region::n_edges)
      .def_property_readonly("n_ghosts", &fklab::Region::n_ghosts)
      .def("contains",
           [](const fklab::Region& r, const std::vector<int>& x) {
             return r.contains(to_coords(r, x));
           },
           py::arg("x"))
      .def("__repr__", [](const fklab::Region& r) { return "Region(" + r.spec().str() + ")"; });

  py::class_<fklab::DerivedQuantity>(m, "DerivedQuantity")
      .def_readonly("name", &fklab::DerivedQuantity::name)
      .def_readonly("value", &fklab::DerivedQuantity::value)
      .def_readonly("stderr", &fklab::DerivedQuantity::stderr_value)
      .def_readonly("bound_only", &fklab::DerivedQuantity::bound_only)
      .def("__repr__", [](const fklab::DerivedQuantity& d) {
        return "DerivedQuantity(" + d.name + "=" + fklab::format_double(d.value) + ")";
      });

  py::class_<fklab::EstimatorResult>(m, "EstimatorResult")
      .def_readonly("name", &fklab::EstimatorResult::name)
      .def_readonly("params", &fklab::EstimatorResult::params)
      .def_readonly("samples", &fklab::EstimatorResult::samples)
      .def_readonly("estimate", &fklab::EstimatorResult::estimate)
      .def_readonly("stderr", &fklab::EstimatorResult::stderr_value)
      .def_readonly("derived", &fklab::EstimatorResult::derived)
      .def_readonly("seconds", &fklab::EstimatorResult::seconds)
      .def("__repr__", [](const fklab::EstimatorResult& r) {
        return "EstimatorResult(" + r.name + ", estimate=" + fklab::format_double(r.estimate) +
               ", stderr=" + fklab::format_double(r.stderr_value) + ")";
      });

  py::class_<fklab::SurfaceDerivativeReport>(m, "SurfaceDerivativeReport")
      .def_readonly("tau", &fklab::SurfaceDerivativeReport::tau)
      .def_readonly("fd", &fklab::SurfaceDerivativeReport::fd)
      .def_readonly("exact", &fklab::SurfaceDerivativeReport::exact)
      .def_readonly("gap", &fklab::SurfaceDerivativeReport::gap);

  m.def(
      "oracle_partition",
      [](const fklab::Region& region, double p, double q, const std::string& bc) {
        return fklab::fk_partition({&region, make_bc(region, bc), p, q});
      },
      py::arg("region"), py::arg("p"), py::arg("q"), py::arg("bc") = "free",
      "Exact FK partition function by enumeration (edge count capped)");

  m.def(
      "oracle_edge_marginal",
      [](const fklab::Region& region, int edge, double p, double q, const std::string& bc) {
        if (edge < 0 || edge >= region.n_edges())
          throw py::value_error("edge index out of range");
        return fklab::fk_edge_marginal({&region, make_bc(region, bc), p, q}, edge);
      },
      py::arg("region"), py::arg("edge"), py::arg("p"), py::arg("q"), py::arg("bc") = "free",
      "Exact probability that one edge is open");

  m.def(
      "oracle_connection",
      [](const fklab::Region& region, const std::vector<int>& x, const std::vector<int>& y,
         double p, double q, const std::string& bc) {
        int a = checked_vertex(region, x);
        int b = checked_vertex(region, y);
        return fklab::fk_event_prob(
            {&region, make_bc(region, bc), p, q},
            [a, b](const fklab::BondConfig&, const fklab::OracleView& view) {
              return view.same(a, b);
            });
      },
      py::arg("region"), py::arg("x"), py::arg("y"), py::arg("p"), py::arg("q"),
      py::arg("bc") = "free", "Exact probability that two vertices share a cluster");

  m.def(
      "disconnection",
      [](int d, long big_l, const fklab::Frac& delta, long c, double p, double q, long samples,
         bool sw, int burn_in, int thinning, std::uint64_t seed, int chains) {
        return fklab::disconnection_free(d, big_l, delta, c, p, q, samples,
                                         make_knobs(sw, burn_in, thinning, seed, chains));
      },
      py::arg("d"), py::arg("L"), py::arg("delta"), py::arg("C"), py::arg("p"), py::arg("q"),
      py::arg("samples"), py::arg("sw") = false, py::arg("burn_in") = 1000,
      py::arg("thinning") = 10, py::arg("seed") = 1, py::arg("chains") = 1,
      "Probability that the bottom layer fails to reach the top layer, with the "
      "surface tension rate attached as a derived quantity");

  m.def(
      "wired_surface_tension",
      [](int d, long big_l, long big_m, double p, long samples, bool sw, int burn_in,
         int thinning, std::uint64_t seed, int chains) {
        return fklab::wired_surface_tension_estimate(
            d, big_l, big_m, p, samples, make_knobs(sw, burn_in, thinning, seed, chains));
      },
      py::arg("d"), py::arg("L"), py::arg("M"), py::arg("p"), py::arg("samples"),
      py::arg("sw") = false, py::arg("burn_in") = 1000, py::arg("thinning") = 10,
      py::arg("seed") = 1, py::arg("chains") = 1,
      "q=2 ghost-camp disconnection probability on the wired rectangle");

  m.def(
      "slab_connection",
      [](int d, long big_l, long big_n, double p, double q, double eps,
         const std::vector<int>& x, long samples, bool sw, int burn_in, int thinning,
         std::uint64_t seed, int chains) {
        fklab::Coords cx{};
        if (x.empty()) {
          cx[static_cast<std::size_t>(d) - 2] = static_cast<int>(big_n);
          cx[static_cast<std::size_t>(d) - 1] = static_cast<int>(big_n);
        } else {
          if (static_cast<int>(x.size()) != d)
            throw py::value_error("x must have exactly d entries");
          for (std::size_t i = 0; i < x.size(); ++i) cx[i] = x[i];
        }
        return fklab::slab_connection(d, big_l, big_n, p, q, eps, cx, samples,
                                      make_knobs(sw, burn_in, thinning, seed, chains));
      },
      py::arg("d"), py::arg("L"), py::arg("N"), py::arg("p"), py::arg("q"),
      py::arg("eps") = 0.0, py::arg("x") = std::vector<int>{}, py::arg("samples") = 1024,
      py::arg("sw") = false, py::arg("burn_in") = 1000, py::arg("thinning") = 10,
      py::arg("seed") = 1, py::arg("chains") = 1,
      "Probability of {0 <-> x} in the sprinkled configuration on the free slab; "
      "x defaults to the far corner of the last two axes");

  m.def(
      "weak_mixing_gap",
      [](int d, long big_k, double s, double p, long samples, bool sw, int burn_in, int thinning,
         std::uint64_t seed, int chains) {
        return fklab::weak_mixing_gap(d, big_k, s, p, samples,
                                      make_knobs(sw, burn_in, thinning, seed, chains));
      },
      py::arg("d"), py::arg("K"), py::arg("s"), py::arg("p"), py::arg("samples"),
      py::arg("sw") = false, py::arg("burn_in") = 1000, py::arg("thinning") = 10,
      py::arg("seed") = 1, py::arg("chains") = 1,
      "Marginal gap of the origin edge on the half-box between rest-wired and rest-free");

  m.def("annulus_sequence", &fklab::annulus_sequence, py::arg("L"), py::arg("delta"),
        "Decreasing annulus radius schedule used by the uniqueness trajectory");

  m.def("surface_derivative_check", &fklab::surface_derivative_check, py::arg("d"), py::arg("L"),
        py::arg("M"), py::arg("beta"), py::arg("h") = 1e-4,
        "Finite-difference cross-check of the surface tension beta derivative "
        "against the exact per-edge correlation-gap sum (enumeration-backed)");

  m.def(
      "run",
      [](const py::object& config) {
        fklab::ExperimentConfig cfg = fklab::ExperimentConfig::from_json_text(config_text(config));
        std::ostringstream out, err;
        int code = fklab::run_experiment(cfg, out, err);
        std::string text = out.str();
        std::string run_dir;
        auto pos = text.rfind("run dir: ");
        if (pos != std::string::npos) {
          auto end = text.find('\n', pos);
          run_dir = text.substr(pos + 9, end == std::string::npos ? end : end - pos - 9);
        }
        py::dict result;
        result["exit_code"] = code;
        result["run_dir"] = run_dir;
        result["output"] = text;
        result["messages"] = err.str();
        return result;
      },
      py::arg("config"),
      "Run one experiment from a config dict or JSON string, exactly as the CLI "
      "would; returns exit_code, run_dir, and the captured output");
}
