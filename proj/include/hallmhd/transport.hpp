// Semi-Lagrangian density transport along divergence-free velocity
// trajectories.
//
// Characteristics are traced with the classical fourth-order one-step method,
// substep-capped at a quarter cell per step; the velocity is evaluated by
// exact trigonometric synthesis at off-grid points (piecewise-linear in time
// between trajectory knots).  The density is evaluated at the foot of each
// characteristic through monotone (bound-preserving) tricubic interpolation,
// so transported densities never leave the initial range, bit for bit.

#pragma once

#include <Eigen/Dense>
#include <vector>

#include "hallmhd/basis.hpp"
#include "hallmhd/geometry.hpp"

namespace hallmhd {

// Velocity history over a time interval: coefficient snapshots at increasing
// knots, interpolated linearly in time; plus an optional uniform drift
// (outside the mean-free basis span) so exact-translation flows are
// expressible for transport diagnostics.
struct VelocityTrajectory {
  const Basis* basis = nullptr;
  std::vector<double> knots;
  std::vector<Eigen::VectorXd> alpha;
  Vec3 mean_drift{};

  // Velocity at time t and (arbitrary) point x; errors if t outside the
  // knot range beyond a small slack.
  Vec3 eval(double t, const Vec3& x) const;
  // Upper bound for sup |u| over the trajectory (coefficient-sum bound plus
  // drift); used for the characteristic substep cap.
  double max_speed() const;
};

struct DensitySnapshot {
  GridField rho;
  double t = 0.0;
  double lo = 0.0, hi = 0.0;  // certified bounds
};

// Foot of the characteristic through (x, t_from) at time t_to (backward or
// forward).  Substep = min(dt_cap, 0.25 dx / max_speed).
Vec3 trace_characteristic(const VelocityTrajectory& traj, const Vec3& x, double t_from,
                          double t_to, double dt_cap);

// rho(t_to, x) = from.rho interpolated at the foot of the characteristic
// through (x, t_to) traced back to from.t.
DensitySnapshot advect_density(const DensitySnapshot& from, const VelocityTrajectory& traj,
                               double t_to, double dt_cap);

// Monotone tricubic interpolation of a scalar grid field at point x
// (periodic).  Result lies in the hull of the surrounding 2x2x2 nodes.
double monotone_tricubic(const GridField& f, const Vec3& x);

// Cell-volume-weighted measure of {alpha <= rho < beta} (beta may be +inf;
// the histogram's last bin closes at its upper edge instead).
double level_set_measure(const GridField& rho, double alpha, double beta);

// Volumes of nbins equal-width level sets spanning [lo, hi].
std::vector<double> level_set_histogram(const GridField& rho, double lo, double hi, int nbins);

}  // namespace hallmhd
