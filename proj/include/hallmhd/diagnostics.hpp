// Trajectory diagnostics: energy bookkeeping, algebraic cancellation checks,
// and weak-form residuals against a fixed bank of space-time test functions.
//
// The weak-form identities evaluated by weak_residuals, for test functions
// vanishing at the final time:
//   density:   -int_0^T int (rho dphi/dt + rho u . grad phi)  = int rho0 phi(0)
//   momentum:   int_0^T int (-rho u . dPhi/dt - (rho u x u) : grad Phi
//                            + 2 mu(rho) d(u) : d(Phi))
//              = int_0^T int (curl B x B) . Phi + int rho0 u0 . Phi(0)
//   magnetic:   int_0^T int (-B . dPsi/dt + (B x u + h (curl B x B)/rho
//                            + curl B / sigma(rho)) . curl Psi)
//              = int B0 . Psi(0)
// Space integrals use nodal quadrature; time integrals use composite Simpson
// over uniform knot runs with trapezoid fallback.

#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "hallmhd/basis.hpp"
#include "hallmhd/driver.hpp"
#include "hallmhd/geometry.hpp"
#include "hallmhd/material.hpp"
#include "hallmhd/transport.hpp"

namespace hallmhd {

// Kinetic and magnetic energy by nodal quadrature:
// (1/2 int rho |u|^2, 1/2 int |B|^2).
std::pair<double, double> total_energy(const GridField& rho, const GridField& u,
                                       const GridField& B);

// Pointwise algebraic identities of the induction coupling.
//   lorentz_selfdot: max over nodes of |(curl B x B) . curl B|, normalized by
//     the local magnitude scale (a cross product is orthogonal to its factors).
//   duality_pairing: |<curl B x B, u> - <B x u, curl B>| (equal by cyclicity
//     of the scalar triple product), normalized by the non-cancelling
//     integrand magnitude int |curl B||B||u|; that scale stays meaningful
//     when both pairings vanish identically (force-free B or tiny u), where
//     the pairings' own magnitudes are pure rounding noise.
struct CancellationReport {
  double lorentz_selfdot = 0.0;
  double duality_pairing = 0.0;
};
CancellationReport check_cancellations(const GridField& u, const GridField& B);

// Relative L2 norm of the spectral divergence of a vector field.
double divergence_residual(const GridField& field);

// Time integral of knot samples: composite Simpson over uniform triples,
// trapezoid on leftover or non-uniform segments.
double integrate_knots(const std::vector<double>& t, const std::vector<double>& f);

struct TrajectorySample {
  double t = 0.0;
  Eigen::VectorXd alpha, beta;
  DensitySnapshot rho;
};

struct SolutionTrajectory {
  const Basis* basis = nullptr;
  std::vector<TrajectorySample> samples;
};

// Collects knot-resolved samples from a simulation via the window callback.
// Densities are advected from each window start along the converged window
// velocity, so the last sample density of a window equals the driver's
// window-end density bitwise.
class TrajectoryRecorder {
 public:
  TrajectoryRecorder(const Basis& basis, const SimulationInput& input);
  WindowCallback callback();
  const SolutionTrajectory& trajectory() const { return traj_; }

 private:
  SolutionTrajectory traj_;
  DensitySnapshot rho_cursor_;
};

// One weak-form defect: |left side minus right side| of the identity for a
// single test function, plus the magnitude scale of its constituent terms.
struct WeakResidualRow {
  char equation = '?';  // 'r' density, 'u' momentum, 'b' magnetic
  int mode = 0;         // test-space index (density mode 0 = constant)
  int degree = 1;       // time polynomial degree of (1 - t/T)^degree
  double residual = 0.0;
  double scale = 0.0;
};

std::vector<WeakResidualRow> weak_residuals(const SolutionTrajectory& traj,
                                            const TransportCoefficients& coeffs,
                                            int n_test_modes = 6);

}  // namespace hallmhd
