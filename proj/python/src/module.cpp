#include <pybind11/pybind11.h>
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/stl.h>

#include <limits>
#include <string>
#include <vector>

#include "spinsqz/analysis.hpp"
#include "spinsqz/ed.hpp"
#include "spinsqz/error.hpp"
#include "spinsqz/lattice.hpp"
#include "spinsqz/rotor_oat.hpp"
#include "spinsqz/rsw.hpp"
#include "spinsqz/run_config.hpp"
#include "spinsqz/runner.hpp"

namespace py = pybind11;
using namespace spinsqz;

namespace {

py::array_t<double> col(const TimeSeries& ts, double SqueezingPoint::*f) {
  const auto v = ts.column(f);
  return py::array_t<double>(v.size(), v.data());
}

py::dict series_dict(const TimeSeries& ts) {
  py::dict d;
  d["t"] = col(ts, &SqueezingPoint::t);
  d["m_x"] = col(ts, &SqueezingPoint::m_x);
  d["var_e1"] = col(ts, &SqueezingPoint::var_e1);
  d["var_e2"] = col(ts, &SqueezingPoint::var_e2);
  d["cov_12"] = col(ts, &SqueezingPoint::cov12);
  d["v_perp_min"] = col(ts, &SqueezingPoint::v_perp_min);
  d["theta_min"] = col(ts, &SqueezingPoint::theta_min);
  d["xi2"] = col(ts, &SqueezingPoint::xi2);
  d["var_jx"] = col(ts, &SqueezingPoint::var_jx);
  std::vector<double> nsw;
  bool any = false;
  for (const auto& p : ts.points) {
    nsw.push_back(p.n_sw.value_or(std::numeric_limits<double>::quiet_NaN()));
    any = any || p.n_sw.has_value();
  }
  if (any) d["n_sw"] = py::array_t<double>(nsw.size(), nsw.data());
  if (!ts.m_x_err.empty()) {
    d["m_x_err"] = py::array_t<double>(ts.m_x_err.size(), ts.m_x_err.data());
    d["xi2_err"] = py::array_t<double>(ts.xi2_err.size(), ts.xi2_err.data());
  }
  d["metadata"] = ts.metadata.dump();
  d["warnings"] = ts.warnings;
  return d;
}

RunConfig config_from(const py::kwargs& kw) {
  RunConfig cfg;
  for (auto [k, v] : kw) cfg.set(py::str(k), py::str(v));
  cfg.validate();
  return cfg;
}

CouplingMatrix lattice_couplings(const std::string& family, int L, int Ly, double J, double alpha, double rb) {
  return build_couplings(LatticeGeometry::rectangle(L, Ly > 0 ? Ly : L), {parse_family(family), J, alpha, rb});
}

}  // namespace

PYBIND11_MODULE(_spinsqz, m) {
  m.doc() = "spin squeezing solvers for 2D XXZ quenches";

  static py::exception<ConfigError> config_error(m, "ConfigError", PyExc_ValueError);
  static py::exception<NumericalError> numerical_error(m, "NumericalError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConfigError& e) {
      config_error(e.what());
    } catch (const NumericalError& e) {
      numerical_error(e.what());
    }
  });

  m.attr("__version__") = SPINSQZ_VERSION;

  // same keys as the CLI config files
  m.def("quench", [](const py::kwargs& kw) { return series_dict(run_quench(config_from(kw)).series); });
  m.def("config_hash", [](const py::kwargs& kw) { return config_from(kw).hash(); });

  m.def("couplings", [](const std::string& family, int L, int Ly, double J, double alpha, double rb) {
          const auto cm = lattice_couplings(family, L, Ly, J, alpha, rb);
          return py::make_tuple(cm.values, cm.J0);
        },
        py::arg("family") = "nn", py::arg("L") = 4, py::arg("Ly") = 0, py::arg("J") = 1.0,
        py::arg("alpha") = 3.0, py::arg("rb") = 0.0);

  m.def("bare_chi", [](const std::string& family, int L, double delta, double rb, double alpha) {
          return bare_inertia(lattice_couplings(family, L, 0, 1.0, alpha, rb), delta).chi;
        },
        py::arg("family"), py::arg("L"), py::arg("delta"), py::arg("rb") = 0.0, py::arg("alpha") = 3.0);

  m.def("tower", [](const std::string& family, int L, int Ly, double delta, double rb, double alpha) {
          const auto lv = tower_energies(lattice_couplings(family, L, Ly, 1.0, alpha, rb), delta);
          const auto minima = tower_minima(lv);
          const auto fit = tos_fit(minima);
          py::dict d;
          d["sectors"] = minima;
          d["chi"] = fit.rotor.chi;
          d["E0"] = fit.E0;
          d["max_rel_deviation"] = fit.max_rel_deviation;
          d["warnings"] = fit.warnings;
          return d;
        },
        py::arg("family"), py::arg("L"), py::arg("Ly") = 0, py::arg("delta") = 0.5, py::arg("rb") = 0.0,
        py::arg("alpha") = 3.0);

  m.def("oat_optimum", [](int N, double chi) {
          const auto o = oat_optimum(N, chi);
          py::dict d;
          d["xi2_min"] = o.xi2_min;
          d["t_opt"] = o.t_opt;
          d["v_perp_min"] = o.v_perp_min;
          d["t_min"] = o.t_min;
          d["m_x_at_opt"] = o.m_x_at_opt;
          return d;
        },
        py::arg("N"), py::arg("chi"));

  m.def("fit_power_law", [](const std::vector<double>& x, const std::vector<double>& y, double sign) {
          const auto f = fit_power_law(x, y, sign, "exponent");
          return py::make_tuple(f.value, f.se);
        },
        py::arg("x"), py::arg("y"), py::arg("sign") = 1.0);
}
