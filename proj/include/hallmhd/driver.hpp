// Windowed fixed-point driver.
//
// Time is split into windows.  Within one window the solver iterates the map
// F: given a candidate coefficient trajectory (piecewise linear over the
// window knots), (1) transport the density from the window start along the
// candidate velocity, (2) assemble the linearized system with the background
// frozen at the window midpoint, (3) integrate the linear ODEs knot to knot
// from the fixed window-start state.  The iteration starts from the constant
// extension of the start state and applies under-relaxation
// x_{m+1} = (1-w) x_m + w F(x_m); the residual is the relative L2-in-time
// distance between F(x_m) and x_m.  On convergence the last F output is the
// window solution.  If the iteration does not converge the window is halved
// recursively up to a depth limit, after which a NumericalError carrying the
// residual history is thrown.
//
// An energy monitor aborts the run if total energy plus cumulative
// dissipation ever exceeds the initial energy beyond a configured slack.

#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "hallmhd/basis.hpp"
#include "hallmhd/galerkin.hpp"
#include "hallmhd/geometry.hpp"
#include "hallmhd/transport.hpp"

namespace hallmhd {

struct PicardSettings {
  int knots_per_window = 5;   // includes both endpoints
  double tol = 1e-9;          // residual threshold
  int max_iter = 25;          // F evaluations per window attempt
  double relaxation = 1.0;    // under-relaxation weight on F
  int max_halvings = 6;       // recursive window-halving depth limit
};

// Coefficient trajectory over the knots of one window.  The first knot holds
// the fixed start state; d_visc/d_resist are cumulative from the window
// start (only meaningful on outputs of the window map).
struct WindowIterate {
  std::vector<double> knots;
  std::vector<Eigen::VectorXd> alpha, beta;
  std::vector<double> d_visc, d_resist;
};

// One application of the window map F (transport + assemble + integrate).
// rho_start must be the density at candidate.knots.front().  Optional
// outputs: the midpoint assembly and the midpoint density.
WindowIterate apply_window_map(const Basis& basis, const TransportCoefficients& coeffs,
                               const DensitySnapshot& rho_start,
                               const WindowIterate& candidate, double ode_tol,
                               AssembledSystem* sys_out = nullptr,
                               DensitySnapshot* rho_mid_out = nullptr);

struct FixedPointDiagnostics {
  long total_iterations = 0;          // F evaluations across all windows
  int deepest_halving = 0;
  std::vector<double> last_residual_history;
};

// Converged solution of one window (possibly stitched from halved
// subwindows).  Knot arrays cover the full span; energies are evaluated with
// the frozen assembly of the subwindow each knot belongs to; dissipation is
// cumulative from the window start.
struct WindowResult {
  std::vector<double> knots;
  std::vector<Eigen::VectorXd> alpha, beta;
  std::vector<double> e_kin, e_mag, d_visc, d_resist;
  DensitySnapshot rho_end;
  long iterations = 0;
  double final_residual = 0.0;
};

WindowResult solve_window(const Basis& basis, const TransportCoefficients& coeffs,
                          const DensitySnapshot& rho_start, const Eigen::VectorXd& alpha0,
                          const Eigen::VectorXd& beta0, double t0, double t1,
                          const PicardSettings& picard, double ode_tol, int depth = 0,
                          FixedPointDiagnostics* diag = nullptr);

struct SimulationInput {
  const Basis* basis = nullptr;
  TransportCoefficients coeffs;
  DensitySnapshot rho0;  // density at t = 0 with certified bounds
  Eigen::VectorXd alpha0, beta0;
};

struct DriverConfig {
  double t_final = 1.0;
  double dt_window = 0.1;
  double ode_tol = 1e-10;
  double energy_monitor_tol = 1e-6;  // slack for E + D <= E(0)
  PicardSettings picard;
};

struct LedgerRow {
  double t = 0.0, e_kin = 0.0, e_mag = 0.0;
  double d_visc = 0.0, d_resist = 0.0;  // cumulative from t = 0
  double residual = 0.0;                // final Picard residual of the window
};

struct RunResult {
  double t_final = 0.0;
  Eigen::VectorXd alpha, beta;
  DensitySnapshot rho;
  double d_visc = 0.0, d_resist = 0.0;
  double initial_energy = 0.0;
  std::vector<LedgerRow> ledger;
  FixedPointDiagnostics fixed_point;
  long windows_completed = 0;
};

// Called after every completed top-level window (stitched across any
// halvings), before the energy monitor examines its rows.
using WindowCallback = std::function<void(const WindowResult&)>;

RunResult run_simulation(const SimulationInput& input, const DriverConfig& config,
                         const WindowCallback& callback = {});

}  // namespace hallmhd
