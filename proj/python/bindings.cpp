#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lyapoqs/cli.hpp"
#include "lyapoqs/config.hpp"
#include "lyapoqs/errors.hpp"
#include "lyapoqs/lyapunov.hpp"
#include "lyapoqs/nonhermitian.hpp"
#include "lyapoqs/observables.hpp"
#include "lyapoqs/perturbative.hpp"
#include "lyapoqs/regression.hpp"
#include "lyapoqs/spectral.hpp"

namespace py = pybind11;
using namespace lyapoqs;

namespace {

Level level_arg(const std::string& name) { return parse_level(name); }

Statistics stats_arg(const std::string& name) {
  if (name == "fermion") return Statistics::Fermionic;
  if (name == "boson") return Statistics::Bosonic;
  throw Error(ErrorKind::InvalidArgument, "statistics must be 'fermion' or 'boson', got '" + name + "'");
}

// An open system together with its drift, built once.
struct System {
  OpenSystem sys;
  NonHermitianSystem nh;
  QuadOptions quad;

  System(OpenSystem s, QuadOptions q) : sys(std::move(s)), nh(build_nonhermitian(sys, q)), quad(q) {}
};

System from_config(const RunConfig& cfg) {
  if (!cfg.has_system && !cfg.has_resonant_level)
    throw Error(ErrorKind::Config, "config has neither 'system' nor 'resonant_level'");
  return System(build_open_system(cfg), cfg.quad);
}

py::dict record_dict(const ResonantLevelRecord& r) {
  py::dict d;
  d["occupation"] = r.occupation;
  d["current"] = r.current;
  d["taus"] = r.taus;
  d["two_time_exact"] = r.two_time_exact;
  d["two_time_naive"] = r.two_time_naive;
  return d;
}

}  // namespace

PYBIND11_MODULE(_lyapoqs, m) {
  m.doc() = "Lyapunov-equation steady states and dynamics of open quadratic systems";

  static py::exception<Error> exc(m, "LyapoqsError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object inst = py::handle(exc.ptr())(std::string(to_string(e.kind())) + ": " + e.what());
      inst.attr("kind") = to_string(e.kind());
      PyErr_SetObject(exc.ptr(), inst.ptr());
    }
  });

  py::class_<SpectralFunction>(m, "SpectralFunction")
      .def_static("wide_band", &SpectralFunction::wide_band, py::arg("gamma"))
      .def_static("lorentzian", &SpectralFunction::lorentzian, py::arg("gamma"), py::arg("center"), py::arg("width"))
      .def_static("ohmic_exp", &SpectralFunction::ohmic_exp, py::arg("coupling"), py::arg("cutoff"),
                  py::arg("power") = 1.0)
      .def_static("tabulated", &SpectralFunction::tabulated, py::arg("omega"), py::arg("values"))
      .def("__call__", [](const SpectralFunction& s, double w) { return s(w); });

  py::class_<BathAttachment>(m, "Bath")
      .def(py::init([](int site, const SpectralFunction& spectral, double beta, double mu, const std::string& stats) {
             return BathAttachment{site, spectral, beta, mu, stats_arg(stats)};
           }),
           py::arg("site"), py::arg("spectral"), py::arg("beta") = 1.0, py::arg("mu") = 0.0,
           py::arg("statistics") = "fermion")
      .def_readonly("site", &BathAttachment::site)
      .def_readonly("beta", &BathAttachment::beta)
      .def_readonly("mu", &BathAttachment::mu);

  m.def("chain_hamiltonian", &tridiagonal_hamiltonian, py::arg("onsite"), py::arg("hopping"));

  py::class_<System>(m, "System")
      .def(py::init([](const CMatrix& h, const std::vector<BathAttachment>& baths, double epsilon,
                       const std::string& stats, double rel_tol) {
             QuadOptions q;
             q.rel_tol = rel_tol;
             return System(build_system(h, baths, epsilon, stats_arg(stats)), q);
           }),
           py::arg("h"), py::arg("baths"), py::arg("epsilon"), py::arg("statistics") = "fermion",
           py::arg("rel_tol") = 1e-8)
      .def_static("from_config", [](const std::string& path) { return from_config(load_config(path)); },
                  py::arg("path"))
      .def_static("from_json", [](const std::string& text) { return from_config(parse_config(text)); },
                  py::arg("text"))
      .def_property_readonly("n_sites", [](const System& s) { return s.sys.n_sites(); })
      .def_property_readonly("epsilon", [](const System& s) { return s.sys.epsilon; })
      .def_property_readonly("hamiltonian", [](const System& s) { return s.sys.h(); })
      .def_property_readonly("eigenfrequencies", [](const System& s) { return s.sys.hamiltonian.omega; })
      .def_property_readonly("drift", [](const System& s) { return s.nh.g; })
      .def_property_readonly("drift_eigenvalues", [](const System& s) { return s.nh.g_eig.lambda; })
      .def_property_readonly("warnings", [](const System& s) { return s.sys.warnings; })
      .def("dark_states", [](const System& s) { return dark_states(s.sys, s.nh); })
      .def(
          "ness",
          [](const System& s, const std::string& level) {
            return solve_ness(level_arg(level), s.sys, s.nh, s.quad).c;
          },
          py::arg("level") = "l1", "Steady-state correlation matrix C_lm = <c_l^dag c_m>.")
      .def(
          "dynamics",
          [](const System& s, const std::vector<double>& times, std::optional<CMatrix> c0, const std::string& level) {
            const CMatrix start = c0 ? *c0 : CMatrix::Zero(s.sys.n_sites(), s.sys.n_sites());
            std::vector<CMatrix> out;
            for (const auto& c : solve_differential(level_arg(level), s.sys, s.nh, start, times, s.quad))
              out.push_back(c.c);
            return out;
          },
          py::arg("times"), py::arg("c0") = py::none(), py::arg("level") = "l1")
      .def(
          "two_time",
          [](const System& s, const std::vector<double>& taus, double t, std::optional<CMatrix> c0,
             const std::string& level) {
            const CMatrix start = c0 ? *c0 : CMatrix::Zero(s.sys.n_sites(), s.sys.n_sites());
            return two_time(level_arg(level), s.sys, s.nh, start, t, taus, s.quad).values;
          },
          py::arg("taus"), py::arg("t") = 0.0, py::arg("c0") = py::none(), py::arg("level") = "l1",
          "C(t + tau, t) for each tau.")
      .def(
          "pert_ness", [](const System& s) { return pert_ness(s.sys, s.nh, s.quad); },
          "Weak-coupling steady state in the eigenbasis of H.")
      .def("pert_regime_margin", [](const System& s) { return check_pert_regime(s.sys, s.nh).min_margin; })
      .def("to_site_basis", [](const System& s, const CMatrix& y) { return to_site_basis(s.sys.hamiltonian, y); })
      .def(
          "bond_currents",
          [](const System& s, const CMatrix& c) { return bond_currents(s.sys, make_correlation(c)); },
          py::arg("c"))
      .def(
          "pert_current", [](const System& s, int bond) { return pert_current_formula(s.sys, s.nh, bond); },
          py::arg("bond") = 0)
      .def(
          "conductance", [](const System& s, int r, int site) { return dimensionless_conductance(s.sys, r, site); },
          py::arg("r"), py::arg("s"), "Dimensionless conductance W(r, s).");

  m.def(
      "resonant_level",
      [](double eps0, double gamma_l, double gamma_r, double beta_l, double beta_r, double mu_l, double mu_r,
         const std::vector<double>& taus) {
        return record_dict(resonant_level_suite({eps0, gamma_l, gamma_r, beta_l, beta_r, mu_l, mu_r}, taus));
      },
      py::arg("eps0") = 0.0, py::arg("gamma_l") = 1.0, py::arg("gamma_r") = 1.0, py::arg("beta_l") = 1.0,
      py::arg("beta_r") = 1.0, py::arg("mu_l") = 0.0, py::arg("mu_r") = 0.0, py::arg("taus") = std::vector<double>{},
      "Closed-form steady state of a single level between two wide-band baths.");

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::vector<std::string> full = {"lyapunov-oqs"};
        full.insert(full.end(), args.begin(), args.end());
        std::vector<char*> argv;
        for (auto& a : full) argv.push_back(a.data());
        return run_cli(static_cast<int>(argv.size()), argv.data());
      },
      py::arg("args"), "Run the command-line tool in process and return its exit code.");
}
