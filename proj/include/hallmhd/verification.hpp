// Reference comparisons and refinement studies.
//
// relative_energy compares a coarse ("weak") trajectory against a reference
// ("strong") trajectory at >= 2x the mode resolution (or an analytically
// exact one) on the reference grid.  It evaluates, at every common sample
// time,
//   lhs(t) = 1/2 (rho_min ||u-u_ref||^2 + ||B-B_ref||^2 + ||rho-rho_ref||^2)
//            + int_0^t (mu_min ||grad u - grad u_ref||^2
//                       + (1/sigma_max) ||curl B - curl B_ref||^2) ds
// together with the cumulative sum of the constant-one Hoelder products that
// bound the right-hand side of the comparison identity (differences paired
// with measured reference norms).  gronwall_check then verifies the additive
// a-posteriori inequality lhs(t) <= (1+slack)(lhs(0) + rhs_cum(t)) + floor.
//
// refinement_study reruns a configuration along one refinement axis and
// reports Cauchy differences of (alpha, beta, rho) between consecutive
// levels in L2-in-time norms, a fitted log-log rate, and the per-level
// level-set drift of the density histogram.

#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "hallmhd/basis.hpp"
#include "hallmhd/diagnostics.hpp"
#include "hallmhd/driver.hpp"
#include "hallmhd/geometry.hpp"
#include "hallmhd/material.hpp"

namespace hallmhd {

// Exact decaying circularly-polarized eigenfield on an M^3 grid of the
// periodic box [0,L)^3:
//   B(t) = amplitude (sin kz + cos ky, sin kx + cos kz, sin ky + cos kx)
//          * exp(-(2 pi / L)^2 t / sigma),   k = 2 pi / L,
// which satisfies curl B = (2 pi / L) B and solves the linear induction
// equation with constant conductivity (all nonlinear terms vanish on it).
GridField beltrami_reference(double amplitude, double sigma_const, double L, double t,
                             int M);

// Embed coefficients of a coarser cutoff into a finer basis over the same
// box: the coarse mode list is a prefix of the fine one (verified).
Eigen::VectorXd embed_coefficients(const Basis& coarse, const Basis& fine,
                                   const Eigen::VectorXd& c);

struct RelativeEnergyRow {
  double t = 0.0;
  double term_u = 0.0, term_b = 0.0, term_rho = 0.0;  // pointwise halves
  double diss_u = 0.0, diss_b = 0.0;                  // cumulative in time
  double rhs_cum = 0.0;  // cumulative Hoelder-product bound
  double lhs() const { return term_u + term_b + term_rho + diss_u + diss_b; }
};

struct RelativeEnergySeries {
  std::vector<RelativeEnergyRow> rows;
  double rho_lower = 0.0, mu_lower = 0.0, sigma_upper = 0.0;
  // Measured reference-regularity norms, maxima over time.
  double grad_rho_l3 = 0.0, dudt_l3 = 0.0, dbdt_l3 = 0.0;
  double grad_u_inf = 0.0, grad_b_inf = 0.0;
};

RelativeEnergySeries relative_energy(const SolutionTrajectory& weak,
                                     const SolutionTrajectory& ref,
                                     const TransportCoefficients& coeffs);

struct GronwallVerdict {
  bool ok = false;
  double worst_margin = 0.0;   // max over rows of lhs - (1+slack)(lhs0 + rhs_cum)
  double exp_c_integral = 0.0; // exp of the accumulated measured rate
};
GronwallVerdict gronwall_check(const RelativeEnergySeries& s, double slack = 0.1,
                               double floor_abs = 1e-8);

enum class RefinementAxis { modes_n, mollify_eps, tolerance };

// One level of a study: a self-contained simulation setup.  input.basis must
// point at *basis.
struct LevelSetup {
  std::shared_ptr<Basis> basis;
  SimulationInput input;
  DriverConfig config;
  double parameter = 0.0;  // K, eps, or tolerance
};
using LevelFactory = std::function<LevelSetup(int level)>;

struct RefinementLevel {
  double parameter = 0.0;
  bool ok = false;
  std::string note;
  // L2-in-time Cauchy differences against the previous level (0 on the
  // first level and on failures).
  double cauchy_alpha = 0.0, cauchy_beta = 0.0, cauchy_rho = 0.0;
  double level_set_drift = 0.0;  // max per-bin histogram drift over the run
  // Per-snapshot difference norms against the previous level at the common
  // output times (empty on the first level and on failures); these are the
  // `t vs error` columns of the study data files.
  std::vector<double> times, diff_alpha, diff_beta, diff_rho;
};

struct RefinementReport {
  RefinementAxis axis = RefinementAxis::modes_n;
  std::vector<RefinementLevel> levels;
  // Least-squares slope of ln(cauchy difference) against ln(parameter):
  // positive when the difference shrinks with a shrinking parameter
  // (tolerance, eps); negative when it shrinks with a growing parameter
  // (mode cutoff).  Zero when fewer than two valid differences exist.
  double rate_alpha = 0.0, rate_beta = 0.0, rate_rho = 0.0;
};

RefinementReport refinement_study(const LevelFactory& make_level, RefinementAxis axis,
                                  int levels);

}  // namespace hallmhd
