// Compactly-supported smoothing kernel and initial-data preparation.
//
// The kernel is eta(x) = C exp(1/(|x|^2 - 1)) on |x| < 1 (zero outside),
// scaled to eta_eps(x) = eps^-3 eta(x/eps).  On the grid the convolution is a
// periodic direct sum with convex weights normalized to 1 exactly, so the
// smoothed field's min/max never leave the input's range (bit level).
// Initial states: density smoothed pointwise, velocity and magnetic data
// smoothed then L2-projected onto the divergence-free basis.

#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "hallmhd/basis.hpp"
#include "hallmhd/geometry.hpp"

namespace hallmhd {

struct Mollifier {
  TorusDomain domain;
  double eps = 0.0;
  // Periodic lattice offsets with |offset * dx| < eps and their convex
  // weights (sum exactly 1 after normalization).
  std::vector<std::array<int, 3>> offsets;
  std::vector<double> weights;
  // Discrete integral of the raw (unnormalized, eps-scaled) kernel; the
  // normalizer applied is 1/(raw_integral) in units of cell volume.
  double raw_integral = 0.0;
};

// Errors if the support covers fewer than 3 grid cells (eps < 3 dx) or does
// not fit in half the box.
Mollifier build_mollifier(const TorusDomain& domain, double eps);

// Periodic convolution, component by component.  Output clamped to the local
// input range touched by the kernel support (analytically a no-op).
GridField mollify(const Mollifier& m, const GridField& f);

struct InitialData {
  GridField rho0eps;        // smoothed density
  Eigen::VectorXd alpha0;   // projected smoothed velocity coefficients
  Eigen::VectorXd beta0;    // projected smoothed magnetic coefficients
  double rho_lo = 0.0;      // certified density bounds (min/max of rho0eps)
  double rho_hi = 0.0;
};

InitialData build_initial_state(const Basis& basis, const GridField& rho0, const GridField& u0,
                                const GridField& B0, double eps);

// Unnormalized profile exp(1/(r^2-1)) for r = |x| < 1 (zero outside); the
// analytic normalizer 1/integral is frozen in the tests as an oracle.
double mollifier_profile(double r);

}  // namespace hallmhd
