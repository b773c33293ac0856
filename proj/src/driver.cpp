#include "hallmhd/driver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <utility>

namespace hallmhd {

namespace {

// Linear interpolation of a knot trajectory at time t (t within knot range).
void lerp_state(const WindowIterate& it, double t, Eigen::VectorXd& alpha,
                Eigen::VectorXd& beta) {
  const std::vector<double>& kn = it.knots;
  if (t <= kn.front()) {
    alpha = it.alpha.front();
    beta = it.beta.front();
    return;
  }
  if (t >= kn.back()) {
    alpha = it.alpha.back();
    beta = it.beta.back();
    return;
  }
  size_t hi = std::upper_bound(kn.begin(), kn.end(), t) - kn.begin();
  size_t lo = hi - 1;
  double w = (t - kn[lo]) / (kn[hi] - kn[lo]);
  alpha = (1.0 - w) * it.alpha[lo] + w * it.alpha[hi];
  beta = (1.0 - w) * it.beta[lo] + w * it.beta[hi];
}

// Relative L2-in-time distance between an image Fx and a candidate x over
// shared knots (trapezoid weights; uniform spacing cancels in the ratio).
double window_residual(const WindowIterate& fx, const WindowIterate& x) {
  KahanSum num, den;
  const size_t nk = fx.knots.size();
  for (size_t k = 0; k < nk; ++k) {
    double w = (k == 0 || k + 1 == nk) ? 0.5 : 1.0;
    num.add(w * ((fx.alpha[k] - x.alpha[k]).squaredNorm() +
                 (fx.beta[k] - x.beta[k]).squaredNorm()));
    den.add(w * (fx.alpha[k].squaredNorm() + fx.beta[k].squaredNorm()));
  }
  double num_v = std::sqrt(std::max(num.value(), 0.0));
  if (num_v == 0.0) return 0.0;
  return num_v / std::max(std::sqrt(std::max(den.value(), 0.0)), 1e-300);
}

VelocityTrajectory trajectory_of(const Basis& basis, const WindowIterate& it) {
  VelocityTrajectory traj;
  traj.basis = &basis;
  traj.knots = it.knots;
  traj.alpha = it.alpha;
  traj.mean_drift = Vec3{0.0, 0.0, 0.0};
  return traj;
}

std::string format_history(const std::vector<double>& hist) {
  std::ostringstream os;
  for (size_t i = 0; i < hist.size(); ++i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3e", hist[i]);
    os << (i ? ", " : "") << buf;
  }
  return os.str();
}

}  // namespace

WindowIterate apply_window_map(const Basis& basis, const TransportCoefficients& coeffs,
                               const DensitySnapshot& rho_start,
                               const WindowIterate& candidate, double ode_tol,
                               AssembledSystem* sys_out, DensitySnapshot* rho_mid_out) {
  const size_t nk = candidate.knots.size();
  if (nk < 2) throw ConfigError("window map: need at least two knots");
  if (candidate.alpha.size() != nk || candidate.beta.size() != nk)
    throw ConfigError("window map: knot/coefficient count mismatch");
  const int n = basis.n();
  for (size_t k = 0; k < nk; ++k) {
    if (candidate.alpha[k].size() != n || candidate.beta[k].size() != n)
      throw ConfigError("window map: coefficient dimension does not match the basis");
    if (k > 0 && !(candidate.knots[k] > candidate.knots[k - 1]))
      throw ConfigError("window map: knots must be strictly increasing");
  }
  const double t0 = candidate.knots.front();
  const double t1 = candidate.knots.back();
  if (std::abs(rho_start.t - t0) > 1e-9 * (1.0 + std::abs(t0)))
    throw ConfigError("window map: density snapshot time does not match the window start");

  // Transport the density along the candidate velocity to the window midpoint.
  DensitySnapshot rho_at_start = rho_start;
  rho_at_start.t = t0;  // normalize exactly
  VelocityTrajectory traj = trajectory_of(basis, candidate);
  const double t_mid = 0.5 * (t0 + t1);
  DensitySnapshot rho_mid = advect_density(rho_at_start, traj, t_mid, t1 - t0);

  // Freeze the advecting velocity and magnetic background at the midpoint.
  Eigen::VectorXd alpha_mid, beta_mid;
  lerp_state(candidate, t_mid, alpha_mid, beta_mid);
  GridField u_bar = synthesize(basis, alpha_mid);
  GridField b_bar = synthesize(basis, beta_mid);
  AssembledSystem sys = assemble_system(basis, rho_mid.rho, u_bar, b_bar, coeffs);

  // Integrate the linear system knot to knot from the fixed start state.
  WindowIterate out;
  out.knots = candidate.knots;
  OdeState y;
  y.alpha = candidate.alpha.front();
  y.beta = candidate.beta.front();
  y.d_visc = 0.0;
  y.d_resist = 0.0;
  out.alpha.push_back(y.alpha);
  out.beta.push_back(y.beta);
  out.d_visc.push_back(0.0);
  out.d_resist.push_back(0.0);
  for (size_t k = 1; k < nk; ++k) {
    y = step_linear(sys, y, candidate.knots[k - 1], candidate.knots[k], ode_tol);
    out.alpha.push_back(y.alpha);
    out.beta.push_back(y.beta);
    out.d_visc.push_back(y.d_visc);
    out.d_resist.push_back(y.d_resist);
  }

  if (sys_out) *sys_out = std::move(sys);
  if (rho_mid_out) *rho_mid_out = std::move(rho_mid);
  return out;
}

WindowResult solve_window(const Basis& basis, const TransportCoefficients& coeffs,
                          const DensitySnapshot& rho_start, const Eigen::VectorXd& alpha0,
                          const Eigen::VectorXd& beta0, double t0, double t1,
                          const PicardSettings& picard, double ode_tol, int depth,
                          FixedPointDiagnostics* diag) {
  if (!(t1 > t0)) throw ConfigError("solve_window: window must have positive length");
  if (picard.knots_per_window < 2)
    throw ConfigError("solve_window: need at least two knots per window");
  if (picard.max_iter < 1) throw ConfigError("solve_window: max_iter must be positive");
  if (!(picard.relaxation > 0.0) || picard.relaxation > 1.0)
    throw ConfigError("solve_window: relaxation must lie in (0, 1]");
  if (picard.max_halvings < 0)
    throw ConfigError("solve_window: max_halvings must be nonnegative");

  const int nk = picard.knots_per_window;
  WindowIterate x;
  x.knots.resize(nk);
  for (int k = 0; k < nk; ++k) x.knots[k] = t0 + (t1 - t0) * k / (nk - 1);
  x.knots.front() = t0;
  x.knots.back() = t1;
  x.alpha.assign(nk, alpha0);  // constant extension of the start state
  x.beta.assign(nk, beta0);

  std::vector<double> history;
  for (int m = 0; m < picard.max_iter; ++m) {
    AssembledSystem sys;
    WindowIterate fx = apply_window_map(basis, coeffs, rho_start, x, ode_tol, &sys);
    if (diag) ++diag->total_iterations;
    double resid = window_residual(fx, x);
    history.push_back(resid);
    if (resid <= picard.tol) {
      if (diag) diag->last_residual_history = history;
      WindowResult r;
      r.knots = fx.knots;
      r.e_kin.reserve(nk);
      r.e_mag.reserve(nk);
      for (int k = 0; k < nk; ++k) {
        r.e_kin.push_back(0.5 * fx.alpha[k].dot(sys.mass * fx.alpha[k]));
        r.e_mag.push_back(0.5 * fx.beta[k].squaredNorm());
      }
      DensitySnapshot rho_at_start = rho_start;
      rho_at_start.t = t0;
      VelocityTrajectory traj = trajectory_of(basis, fx);
      r.rho_end = advect_density(rho_at_start, traj, t1, t1 - t0);
      r.alpha = std::move(fx.alpha);
      r.beta = std::move(fx.beta);
      r.d_visc = std::move(fx.d_visc);
      r.d_resist = std::move(fx.d_resist);
      r.iterations = m + 1;
      r.final_residual = resid;
      return r;
    }
    const double w = picard.relaxation;
    for (int k = 0; k < nk; ++k) {
      x.alpha[k] = (1.0 - w) * x.alpha[k] + w * fx.alpha[k];
      x.beta[k] = (1.0 - w) * x.beta[k] + w * fx.beta[k];
    }
  }

  if (depth >= picard.max_halvings) {
    if (diag) diag->last_residual_history = history;
    std::ostringstream os;
    os << "fixed-point iteration did not converge on window [" << t0 << ", " << t1
       << "] at halving depth " << depth << " (limit " << picard.max_halvings
       << "); residual history after " << history.size()
       << " iterations: " << format_history(history);
    throw NumericalError(os.str());
  }
  if (diag) diag->deepest_halving = std::max(diag->deepest_halving, depth + 1);

  const double t_mid = 0.5 * (t0 + t1);
  WindowResult left = solve_window(basis, coeffs, rho_start, alpha0, beta0, t0, t_mid,
                                   picard, ode_tol, depth + 1, diag);
  WindowResult right =
      solve_window(basis, coeffs, left.rho_end, left.alpha.back(), left.beta.back(), t_mid,
                   t1, picard, ode_tol, depth + 1, diag);

  WindowResult r = std::move(left);
  const double dv0 = r.d_visc.back();
  const double dr0 = r.d_resist.back();
  for (size_t k = 1; k < right.knots.size(); ++k) {
    r.knots.push_back(right.knots[k]);
    r.alpha.push_back(std::move(right.alpha[k]));
    r.beta.push_back(std::move(right.beta[k]));
    r.e_kin.push_back(right.e_kin[k]);
    r.e_mag.push_back(right.e_mag[k]);
    r.d_visc.push_back(dv0 + right.d_visc[k]);
    r.d_resist.push_back(dr0 + right.d_resist[k]);
  }
  r.rho_end = std::move(right.rho_end);
  r.iterations += right.iterations;
  r.final_residual = std::max(r.final_residual, right.final_residual);
  return r;
}

RunResult run_simulation(const SimulationInput& input, const DriverConfig& config,
                         const WindowCallback& callback) {
  if (!input.basis) throw ConfigError("run_simulation: basis is required");
  const Basis& basis = *input.basis;
  const int n = basis.n();
  if (input.alpha0.size() != n || input.beta0.size() != n)
    throw ConfigError("run_simulation: initial coefficients do not match the basis");
  if (input.rho0.rho.ncomp != 1 || !(input.rho0.rho.domain == basis.domain))
    throw ConfigError("run_simulation: density grid does not match the basis domain");
  if (!(config.t_final >= 0.0)) throw ConfigError("run_simulation: t_final must be >= 0");
  if (!(config.dt_window > 0.0)) throw ConfigError("run_simulation: dt_window must be > 0");
  if (!(config.ode_tol > 0.0)) throw ConfigError("run_simulation: ode_tol must be > 0");
  if (!(config.energy_monitor_tol >= 0.0))
    throw ConfigError("run_simulation: energy_monitor_tol must be >= 0");

  RunResult out;
  out.fixed_point = FixedPointDiagnostics{};

  // Initial energies from a dedicated assembly of the t = 0 state.
  {
    GridField u0 = synthesize(basis, input.alpha0);
    GridField b0 = synthesize(basis, input.beta0);
    AssembledSystem sys0 = assemble_system(basis, input.rho0.rho, u0, b0, input.coeffs);
    double ek0 = 0.5 * input.alpha0.dot(sys0.mass * input.alpha0);
    double em0 = 0.5 * input.beta0.squaredNorm();
    out.initial_energy = ek0 + em0;
    out.ledger.push_back(LedgerRow{0.0, ek0, em0, 0.0, 0.0, 0.0});
  }

  Eigen::VectorXd alpha = input.alpha0;
  Eigen::VectorXd beta = input.beta0;
  DensitySnapshot rho = input.rho0;
  rho.t = 0.0;
  KahanSum dcv, dcr;
  const double e0 = out.initial_energy;
  const double slack = e0 * config.energy_monitor_tol + config.energy_monitor_tol;

  long n_windows = 0;
  if (config.t_final > 0.0)
    n_windows =
        std::max<long>(1, (long)std::ceil(config.t_final / config.dt_window - 1e-9));

  double t_a = 0.0;
  for (long kwin = 1; kwin <= n_windows; ++kwin) {
    double t_b = (kwin == n_windows) ? config.t_final
                                     : std::min(kwin * config.dt_window, config.t_final);
    WindowResult wr = solve_window(basis, input.coeffs, rho, alpha, beta, t_a, t_b,
                                   config.picard, config.ode_tol, 0, &out.fixed_point);
    if (callback) callback(wr);

    for (size_t k = 1; k < wr.knots.size(); ++k) {
      LedgerRow row;
      row.t = wr.knots[k];
      row.e_kin = wr.e_kin[k];
      row.e_mag = wr.e_mag[k];
      row.d_visc = dcv.value() + wr.d_visc[k];
      row.d_resist = dcr.value() + wr.d_resist[k];
      row.residual = wr.final_residual;
      double total = row.e_kin + row.e_mag + row.d_visc + row.d_resist;
      if (total > e0 + slack) {
        std::ostringstream os;
        os << "energy monitor tripped at t = " << row.t << ": energy plus dissipation "
           << total << " exceeds the initial energy " << e0 << " beyond the allowed slack "
           << slack;
        throw NumericalError(os.str());
      }
      out.ledger.push_back(row);
    }

    alpha = wr.alpha.back();
    beta = wr.beta.back();
    rho = std::move(wr.rho_end);
    dcv.add(wr.d_visc.back());
    dcr.add(wr.d_resist.back());
    ++out.windows_completed;
    t_a = t_b;
  }

  out.t_final = t_a;
  out.alpha = std::move(alpha);
  out.beta = std::move(beta);
  out.rho = std::move(rho);
  out.d_visc = dcv.value();
  out.d_resist = dcr.value();
  return out;
}

}  // namespace hallmhd
