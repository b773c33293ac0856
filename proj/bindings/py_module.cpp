// Python bindings: the main solver operations on numpy arrays and plain
// config text.  Grid fields cross the boundary as C-contiguous float64
// arrays of shape (M, M, M) for scalars and (3, M, M, M) for vector fields,
// matching the native component-planar storage order.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

#include "hallmhd/basis.hpp"
#include "hallmhd/config.hpp"
#include "hallmhd/diagnostics.hpp"
#include "hallmhd/driver.hpp"
#include "hallmhd/io.hpp"
#include "hallmhd/mollify.hpp"
#include "hallmhd/transport.hpp"
#include "hallmhd/verification.hpp"

namespace py = pybind11;
using namespace hallmhd;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

GridField field_from_array(const DoubleArray& a, double L) {
  const py::buffer_info buf = a.request();
  int ncomp = 0, M = 0;
  if (buf.ndim == 3) {
    ncomp = 1;
    M = static_cast<int>(buf.shape[0]);
    if (buf.shape[1] != M || buf.shape[2] != M)
      throw std::invalid_argument("scalar field must have shape (M, M, M)");
  } else if (buf.ndim == 4 && buf.shape[0] == 3) {
    ncomp = 3;
    M = static_cast<int>(buf.shape[1]);
    if (buf.shape[2] != M || buf.shape[3] != M)
      throw std::invalid_argument("vector field must have shape (3, M, M, M)");
  } else {
    throw std::invalid_argument("field must have shape (M, M, M) or (3, M, M, M)");
  }
  if (M < 1) throw std::invalid_argument("field grid is empty");
  GridField f(TorusDomain{L, M}, ncomp);
  std::memcpy(f.v.data(), buf.ptr, f.v.size() * sizeof(double));
  return f;
}

py::array_t<double> array_from_field(const GridField& f) {
  const int M = f.domain.M;
  std::vector<py::ssize_t> shape;
  if (f.ncomp == 1)
    shape = {M, M, M};
  else
    shape = {3, M, M, M};
  py::array_t<double> out(shape);
  std::memcpy(out.request().ptr, f.v.data(), f.v.size() * sizeof(double));
  return out;
}

py::array_t<double> array_from_vector(const Eigen::VectorXd& v) {
  // Spell out shape and strides; the single-count array_t constructor is
  // fragile under aggressive inlining (strides can come out zero).
  const std::vector<py::ssize_t> shape{static_cast<py::ssize_t>(v.size())};
  const std::vector<py::ssize_t> strides{static_cast<py::ssize_t>(sizeof(double))};
  py::array_t<double> out(shape, strides);
  std::memcpy(out.request().ptr, v.data(), static_cast<size_t>(v.size()) * sizeof(double));
  return out;
}

Eigen::VectorXd vector_from_array(const DoubleArray& a) {
  const py::buffer_info buf = a.request();
  if (buf.ndim != 1) throw std::invalid_argument("coefficient array must be one-dimensional");
  Eigen::VectorXd v(buf.shape[0]);
  std::memcpy(v.data(), buf.ptr, static_cast<size_t>(buf.shape[0]) * sizeof(double));
  return v;
}

py::dict run_config(const std::string& text) {
  SimConfig c = parse_config(text);
  RunSetup setup = build_setup(c);
  RunResult rr = run_simulation(setup.input, setup.driver);

  py::list ledger;
  for (const LedgerRow& row : rr.ledger) {
    py::dict d;
    d["t"] = row.t;
    d["kinetic_energy"] = row.e_kin;
    d["magnetic_energy"] = row.e_mag;
    d["viscous_dissipation"] = row.d_visc;
    d["resistive_dissipation"] = row.d_resist;
    d["residual"] = row.residual;
    ledger.append(d);
  }
  py::dict out;
  out["t_final"] = rr.t_final;
  out["initial_energy"] = rr.initial_energy;
  out["windows_completed"] = rr.windows_completed;
  out["velocity_coefficients"] = array_from_vector(rr.alpha);
  out["magnetic_coefficients"] = array_from_vector(rr.beta);
  out["density"] = array_from_field(rr.rho.rho);
  out["density_bounds"] = py::make_tuple(rr.rho.lo, rr.rho.hi);
  out["viscous_dissipation"] = rr.d_visc;
  out["resistive_dissipation"] = rr.d_resist;
  out["ledger"] = ledger;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Spectral Galerkin solver for a density-dependent incompressible "
            "magnetofluid with Hall coupling";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);

  m.def("version", &version_string, "Build version string.");

  m.def("canonical_config", [](const std::string& text) { return render_config(parse_config(text)); },
        py::arg("text"),
        "Parse a key = value run configuration and return its canonical echo "
        "(raises ValueError listing every violation).");

  m.def("run_config", &run_config, py::arg("text"),
        "Run a simulation described by config text; returns final state, "
        "energies, and the per-window energy ledger.");

  m.def("mode_count",
        [](int K, double L, int M) { return enumerate_modes(TorusDomain{L, M}, K).n(); },
        py::arg("K"), py::arg("L") = 6.283185307179586476925286766559, py::arg("M") = 16,
        "Number of divergence-free basis modes at cutoff K.");

  m.def("synthesize_field",
        [](const DoubleArray& coeffs, int K, int M, double L) {
          Basis basis = enumerate_modes(TorusDomain{L, M}, K);
          return array_from_field(synthesize(basis, vector_from_array(coeffs)));
        },
        py::arg("coefficients"), py::arg("K"), py::arg("M") = 16,
        py::arg("L") = 6.283185307179586476925286766559,
        "Evaluate a coefficient vector as a vector field on the M^3 grid.");

  m.def("project_field",
        [](const DoubleArray& field, int K, double L) {
          GridField f = field_from_array(field, L);
          Basis basis = enumerate_modes(f.domain, K);
          return array_from_vector(project_L2(basis, f));
        },
        py::arg("field"), py::arg("K"), py::arg("L") = 6.283185307179586476925286766559,
        "L2-project a vector field onto the divergence-free basis at cutoff K.");

  m.def("beltrami_field",
        [](double amplitude, double sigma, double L, double t, int M) {
          return array_from_field(beltrami_reference(amplitude, sigma, L, t, M));
        },
        py::arg("amplitude") = 1.0, py::arg("sigma") = 1.0,
        py::arg("L") = 6.283185307179586476925286766559, py::arg("t") = 0.0, py::arg("M") = 16,
        "Exact decaying force-free eigenfield at time t.");

  m.def("level_set_histogram",
        [](const DoubleArray& rho, double lo, double hi, int nbins, double L) {
          return level_set_histogram(field_from_array(rho, L), lo, hi, nbins);
        },
        py::arg("rho"), py::arg("lo"), py::arg("hi"), py::arg("nbins") = 32,
        py::arg("L") = 6.283185307179586476925286766559,
        "Cell-volume-weighted occupation of equal-width density bands.");

  m.def("smooth_density",
        [](const DoubleArray& rho, double eps, double L) {
          GridField f = field_from_array(rho, L);
          Mollifier mol = build_mollifier(f.domain, eps);
          return array_from_field(mollify(mol, f));
        },
        py::arg("rho"), py::arg("eps"), py::arg("L") = 6.283185307179586476925286766559,
        "Periodic convolution with the compactly supported bump kernel of "
        "radius eps (requires 3 dx <= eps <= L/2).");

  m.def("cancellation_residuals",
        [](const DoubleArray& u, const DoubleArray& B, double L) {
          CancellationReport rep =
              check_cancellations(field_from_array(u, L), field_from_array(B, L));
          py::dict d;
          d["pointwise"] = rep.lorentz_selfdot;
          d["integral"] = rep.duality_pairing;
          return d;
        },
        py::arg("u"), py::arg("B"), py::arg("L") = 6.283185307179586476925286766559,
        "Scaled residuals of the induction-coupling cancellation identities.");

  m.def("divergence_residual",
        [](const DoubleArray& field, double L) {
          return divergence_residual(field_from_array(field, L));
        },
        py::arg("field"), py::arg("L") = 6.283185307179586476925286766559,
        "Relative L2 norm of the spectral divergence of a vector field.");

  m.def("write_snapshot",
        [](const std::string& path, const DoubleArray& field, double L) {
          write_snapshot(path, field_from_array(field, L));
        },
        py::arg("path"), py::arg("field"), py::arg("L") = 6.283185307179586476925286766559,
        "Write a grid field to the binary snapshot format.");

  m.def("read_snapshot",
        [](const std::string& path) {
          GridField f = read_snapshot(path);
          return py::make_tuple(array_from_field(f), f.domain.L);
        },
        py::arg("path"), "Read a binary snapshot; returns (field, L).");
}
