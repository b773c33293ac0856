#include "hallmhd/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

namespace hallmhd {

namespace {

inline Vec3 node_vec(const GridField& f, size_t off, size_t comp_stride) {
  return Vec3{f.v[off], f.v[off + comp_stride], f.v[off + 2 * comp_stride]};
}

}  // namespace

std::pair<double, double> total_energy(const GridField& rho, const GridField& u,
                                       const GridField& B) {
  if (rho.ncomp != 1 || u.ncomp != 3 || B.ncomp != 3)
    throw ConfigError("total_energy: expected scalar density and vector fields");
  if (!(rho.domain == u.domain) || !(rho.domain == B.domain))
    throw ConfigError("total_energy: fields live on different domains");
  const size_t nn = rho.v.size();
  const double w = rho.domain.cell_volume();
  KahanSum ek, em;
  for (size_t p = 0; p < nn; ++p) {
    Vec3 uv = node_vec(u, p, nn);
    Vec3 bv = node_vec(B, p, nn);
    ek.add(0.5 * rho.v[p] * dot(uv, uv) * w);
    em.add(0.5 * dot(bv, bv) * w);
  }
  return {ek.value(), em.value()};
}

CancellationReport check_cancellations(const GridField& u, const GridField& B) {
  if (u.ncomp != 3 || B.ncomp != 3 || !(u.domain == B.domain))
    throw ConfigError("check_cancellations: expected two vector fields on one domain");
  GridField j = spectral_curl(B);
  const size_t nn = (size_t)B.domain.M * B.domain.M * B.domain.M;
  const double w = B.domain.cell_volume();

  CancellationReport rep;
  double worst = 0.0;
  KahanSum pair_sum, pair_scale;
  for (size_t p = 0; p < nn; ++p) {
    Vec3 jv = node_vec(j, p, nn);
    Vec3 bv = node_vec(B, p, nn);
    Vec3 uv = node_vec(u, p, nn);
    Vec3 f = cross(jv, bv);  // curl B x B
    double self = std::abs(dot(f, jv));
    double scale = dot(jv, jv) * norm(bv);
    if (scale > 0.0) worst = std::max(worst, self / scale);
    // (B x u) . curl B = (curl B x B) . u by cyclicity of the triple product;
    // the accumulated difference is the energy-cancellation defect, scaled by
    // the magnitude of what cancels rather than by the (possibly vanishing)
    // pairings themselves.
    double t1 = dot(f, uv);
    double t2 = dot(cross(bv, uv), jv);
    pair_sum.add((t2 - t1) * w);
    pair_scale.add(norm(jv) * norm(bv) * norm(uv) * w);
  }
  rep.lorentz_selfdot = worst;
  double den = pair_scale.value();
  rep.duality_pairing = den > 0.0 ? std::abs(pair_sum.value()) / den : 0.0;
  return rep;
}

double divergence_residual(const GridField& field) {
  if (field.ncomp != 3) throw ConfigError("divergence_residual: expected a vector field");
  double num = l2_norm(spectral_divergence(field));
  double den = l2_norm(field);
  return den > 0.0 ? num / den : 0.0;
}

double integrate_knots(const std::vector<double>& t, const std::vector<double>& f) {
  if (t.size() != f.size()) throw ConfigError("integrate_knots: size mismatch");
  if (t.size() < 2) return 0.0;
  const double span = t.back() - t.front();
  const double tol = 1e-12 * (std::abs(span) + 1.0);
  KahanSum acc;
  size_t k = 0;
  while (k + 1 < t.size()) {
    double h1 = t[k + 1] - t[k];
    if (k + 2 < t.size()) {
      double h2 = t[k + 2] - t[k + 1];
      if (std::abs(h2 - h1) <= tol) {  // uniform triple: Simpson
        acc.add(h1 / 3.0 * (f[k] + 4.0 * f[k + 1] + f[k + 2]));
        k += 2;
        continue;
      }
    }
    acc.add(0.5 * h1 * (f[k] + f[k + 1]));
    ++k;
  }
  return acc.value();
}

TrajectoryRecorder::TrajectoryRecorder(const Basis& basis, const SimulationInput& input) {
  traj_.basis = &basis;
  TrajectorySample s0;
  s0.t = 0.0;
  s0.alpha = input.alpha0;
  s0.beta = input.beta0;
  s0.rho = input.rho0;
  s0.rho.t = 0.0;
  rho_cursor_ = s0.rho;
  traj_.samples.push_back(std::move(s0));
}

WindowCallback TrajectoryRecorder::callback() {
  return [this](const WindowResult& wr) {
    VelocityTrajectory vt;
    vt.basis = traj_.basis;
    vt.knots = wr.knots;
    vt.alpha = wr.alpha;
    vt.mean_drift = Vec3{0.0, 0.0, 0.0};
    const double t0 = wr.knots.front();
    const double cap = wr.knots.back() - t0;
    DensitySnapshot start = rho_cursor_;
    start.t = t0;
    for (size_t k = 1; k < wr.knots.size(); ++k) {
      TrajectorySample s;
      s.t = wr.knots[k];
      s.alpha = wr.alpha[k];
      s.beta = wr.beta[k];
      s.rho = advect_density(start, vt, wr.knots[k], cap);
      if (k + 1 == wr.knots.size()) rho_cursor_ = s.rho;
      traj_.samples.push_back(std::move(s));
    }
  };
}

namespace {

// Per-mode static grids of one vector test function Phi = Gamma_m.
struct VectorTestData {
  GridField phi;        // the mode itself
  GridField curl_phi;   // its exact curl
  SymTensorField dphi;  // symmetric gradient
  GridField grad[3];    // grad of each component: grad[c] = spectral d/dx_c Phi
};

// Scalar test function with its gradient (analytic single-frequency trig).
struct ScalarTestData {
  GridField phi;
  GridField grad;  // vector
};

double poly_g(int degree, double t, double T) {
  double s = 1.0 - t / T;
  return degree == 2 ? s * s : s;
}

double poly_gprime(int degree, double t, double T) {
  double s = 1.0 - t / T;
  return degree == 2 ? -2.0 * s / T : -1.0 / T;
}

}  // namespace

std::vector<WeakResidualRow> weak_residuals(const SolutionTrajectory& traj,
                                            const TransportCoefficients& coeffs,
                                            int n_test_modes) {
  if (!traj.basis) throw ConfigError("weak_residuals: trajectory has no basis");
  const Basis& basis = *traj.basis;
  const TorusDomain& dom = basis.domain;
  const size_t ns = traj.samples.size();
  if (ns < 2) throw ConfigError("weak_residuals: need at least two samples");
  const double T = traj.samples.back().t;
  if (!(T > traj.samples.front().t))
    throw ConfigError("weak_residuals: samples must advance in time");
  const int nm = std::min<int>(n_test_modes, basis.n());
  const size_t nn = (size_t)dom.M * dom.M * dom.M;
  const double w = dom.cell_volume();
  const double two_pi_over_L = 2.0 * M_PI / dom.L;

  // ---- static test-function grids ----
  std::vector<VectorTestData> vmodes(nm);
  for (int m = 0; m < nm; ++m) {
    Eigen::VectorXd unit = Eigen::VectorXd::Zero(basis.n());
    unit[m] = 1.0;
    vmodes[m].phi = synthesize(basis, unit);
    vmodes[m].curl_phi = spectral_curl(vmodes[m].phi);
    vmodes[m].dphi = deformation_tensor(vmodes[m].phi);
    for (int c = 0; c < 3; ++c) vmodes[m].grad[c] = spectral_derivative(vmodes[m].phi, c);
  }
  // Scalar bank: constant plus single-axis cos/sin.
  const int n_scalar = 7;
  std::vector<ScalarTestData> smodes(n_scalar);
  for (int m = 0; m < n_scalar; ++m) {
    smodes[m].phi = GridField(dom, 1);
    smodes[m].grad = GridField(dom, 3);
    if (m == 0) {
      for (double& v : smodes[m].phi.v) v = 1.0;
      continue;  // gradient stays zero
    }
    int axis = (m - 1) / 2;
    bool is_sin = ((m - 1) % 2) == 1;
    const double dx = dom.dx();
    for (int i = 0; i < dom.M; ++i)
      for (int j = 0; j < dom.M; ++j)
        for (int l = 0; l < dom.M; ++l) {
          double xs[3] = {i * dx, j * dx, l * dx};
          double th = two_pi_over_L * xs[axis];
          smodes[m].phi.at(0, i, j, l) = is_sin ? std::sin(th) : std::cos(th);
          smodes[m].grad.at(axis, i, j, l) =
              two_pi_over_L * (is_sin ? std::cos(th) : -std::sin(th));
        }
  }

  // ---- per-sample spatial integrals ----
  // momentum: A = int rho u.Phi, Badv = int rho u.((u.grad)Phi),
  //           C = int 2 mu(rho) d(u):d(Phi), Lf = int (curl B x B).Phi
  // magnetic: P = int B.Psi, Q = int (B x u).curl Psi,
  //           H = int h ((curl B x B)/rho).curl Psi, R = int (curl B/sigma).curl Psi
  // density:  U = int rho phi, W = int rho u.grad phi
  std::vector<std::vector<double>> A(nm), Badv(nm), C(nm), Lf(nm), P(nm), Q(nm), H(nm),
      R(nm);
  std::vector<std::vector<double>> U(n_scalar), W(n_scalar);
  for (int m = 0; m < nm; ++m)
    for (auto* vptr : {&A[m], &Badv[m], &C[m], &Lf[m], &P[m], &Q[m], &H[m], &R[m]})
      vptr->resize(ns);
  for (int m = 0; m < n_scalar; ++m) {
    U[m].resize(ns);
    W[m].resize(ns);
  }
  std::vector<double> times(ns);

  for (size_t s = 0; s < ns; ++s) {
    const TrajectorySample& smp = traj.samples[s];
    times[s] = smp.t;
    GridField u = synthesize(basis, smp.alpha);
    GridField B = synthesize(basis, smp.beta);
    GridField j = spectral_curl(B);
    SymTensorField du = deformation_tensor(u);
    GridField mu = eval_law(coeffs.mu, smp.rho.rho);
    GridField inv_sigma = eval_law(coeffs.sigma, smp.rho.rho);
    for (double& v : inv_sigma.v) v = 1.0 / v;

    for (int m = 0; m < nm; ++m) {
      const VectorTestData& td = vmodes[m];
      KahanSum a, badv, c, lf, p, q, h, r;
      for (size_t pnode = 0; pnode < nn; ++pnode) {
        double rho = smp.rho.rho.v[pnode];
        Vec3 uv = node_vec(u, pnode, nn);
        Vec3 bv = node_vec(B, pnode, nn);
        Vec3 jv = node_vec(j, pnode, nn);
        Vec3 phv = node_vec(td.phi, pnode, nn);
        Vec3 cph = node_vec(td.curl_phi, pnode, nn);
        a.add(rho * dot(uv, phv));
        // (u.grad)Phi at the node: component i is sum_c u_c dPhi_i/dx_c.
        Vec3 ugp{0.0, 0.0, 0.0};
        for (int cax = 0; cax < 3; ++cax) {
          Vec3 g = node_vec(td.grad[cax], pnode, nn);
          ugp[0] += uv[cax] * g[0];
          ugp[1] += uv[cax] * g[1];
          ugp[2] += uv[cax] * g[2];
        }
        badv.add(rho * dot(uv, ugp));
        // d(u):d(Phi) with doubled off-diagonal weights.
        double dd = du.comp[0][pnode] * td.dphi.comp[0][pnode] +
                    du.comp[1][pnode] * td.dphi.comp[1][pnode] +
                    du.comp[2][pnode] * td.dphi.comp[2][pnode] +
                    2.0 * (du.comp[3][pnode] * td.dphi.comp[3][pnode] +
                           du.comp[4][pnode] * td.dphi.comp[4][pnode] +
                           du.comp[5][pnode] * td.dphi.comp[5][pnode]);
        c.add(2.0 * mu.v[pnode] * dd);
        Vec3 lor = cross(jv, bv);
        lf.add(dot(lor, phv));
        p.add(dot(bv, phv));
        q.add(dot(cross(bv, uv), cph));
        h.add(coeffs.hall * dot(lor, cph) / rho);
        r.add(inv_sigma.v[pnode] * dot(jv, cph));
      }
      A[m][s] = a.value() * w;
      Badv[m][s] = badv.value() * w;
      C[m][s] = c.value() * w;
      Lf[m][s] = lf.value() * w;
      P[m][s] = p.value() * w;
      Q[m][s] = q.value() * w;
      H[m][s] = h.value() * w;
      R[m][s] = r.value() * w;
    }
    for (int m = 0; m < n_scalar; ++m) {
      KahanSum uacc, wacc;
      for (size_t pnode = 0; pnode < nn; ++pnode) {
        double rho = smp.rho.rho.v[pnode];
        uacc.add(rho * smodes[m].phi.v[pnode]);
        Vec3 uv = node_vec(u, pnode, nn);
        Vec3 gp = node_vec(smodes[m].grad, pnode, nn);
        wacc.add(rho * dot(uv, gp));
      }
      U[m][s] = uacc.value() * w;
      W[m][s] = wacc.value() * w;
    }
  }

  // ---- weak-form defects per test function and time polynomial ----
  std::vector<WeakResidualRow> rows;
  auto emit = [&](char eq, int mode, int degree, const std::vector<double>& gprime_part,
                  const std::vector<double>& g_part, double data_term) {
    std::vector<double> f(ns), fabsv(ns);
    for (size_t s = 0; s < ns; ++s) {
      double g = poly_g(degree, times[s], T);
      double gp = poly_gprime(degree, times[s], T);
      f[s] = gprime_part[s] * gp + g_part[s] * g;
      fabsv[s] = std::abs(gprime_part[s] * gp) + std::abs(g_part[s] * g);
    }
    WeakResidualRow row;
    row.equation = eq;
    row.mode = mode;
    row.degree = degree;
    row.residual = std::abs(integrate_knots(times, f) - data_term);
    row.scale = integrate_knots(times, fabsv) + std::abs(data_term);
    rows.push_back(row);
  };

  for (int m = 0; m < n_scalar; ++m)
    for (int degree : {1, 2}) {
      // residual = -int (U g' + W g) dt - U(0)
      std::vector<double> gp_part(ns), g_part(ns);
      for (size_t s = 0; s < ns; ++s) {
        gp_part[s] = -U[m][s];
        g_part[s] = -W[m][s];
      }
      emit('r', m, degree, gp_part, g_part, U[m][0]);
    }
  for (int m = 0; m < nm; ++m)
    for (int degree : {1, 2}) {
      // residual = int (-A g' + (-Badv + C - Lf) g) dt - A(0)
      std::vector<double> gp_part(ns), g_part(ns);
      for (size_t s = 0; s < ns; ++s) {
        gp_part[s] = -A[m][s];
        g_part[s] = -Badv[m][s] + C[m][s] - Lf[m][s];
      }
      emit('u', m, degree, gp_part, g_part, A[m][0]);
    }
  for (int m = 0; m < nm; ++m)
    for (int degree : {1, 2}) {
      // residual = int (-P g' + (Q + H + R) g) dt - P(0)
      std::vector<double> gp_part(ns), g_part(ns);
      for (size_t s = 0; s < ns; ++s) {
        gp_part[s] = -P[m][s];
        g_part[s] = Q[m][s] + H[m][s] + R[m][s];
      }
      emit('b', m, degree, gp_part, g_part, P[m][0]);
    }
  return rows;
}

}  // namespace hallmhd
