#include "hallmhd/galerkin.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <vector>

namespace hallmhd {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Partial discrete Fourier transform of a scalar weight field: bins for all
// integer wavevectors m in [-ext, ext]^3, which is exactly what the pair
// quadratures need (sum and difference wavevectors of two modes).  Separable:
// three passes of cost M^3 (2 ext + 1) each instead of M^3 (2 ext + 1)^3.
struct WeightTable {
  int ext = 0, stride = 0;
  std::vector<double> re, im;

  std::size_t idx(int m1, int m2, int m3) const {
    return (static_cast<std::size_t>(m1 + ext) * stride + (m2 + ext)) * stride + (m3 + ext);
  }
};

WeightTable partial_dft(const std::vector<double>& w, const TorusDomain& dom, int ext) {
  const int M = dom.M, S = 2 * ext + 1;
  // Trig tables with exact reflection symmetry: cos(2 pi (M-t)/M) is stored
  // bit-equal to cos(2 pi t/M) and sin picks up an exact sign flip, so the
  // transform of a real field is conjugate-symmetric bit for bit.
  std::vector<double> ct(M), st(M);
  for (int t = 0; t <= M / 2; ++t) {
    ct[t] = std::cos(kTwoPi * t / M);
    st[t] = std::sin(kTwoPi * t / M);
  }
  ct[0] = 1.0;
  st[0] = 0.0;
  if (M % 2 == 0) {
    ct[M / 2] = -1.0;
    st[M / 2] = 0.0;
  }
  for (int t = M / 2 + 1; t < M; ++t) {
    ct[t] = ct[M - t];
    st[t] = -st[M - t];
  }
  auto pidx = [M](int m, int i) {
    int t = (m * i) % M;
    return t < 0 ? t + M : t;
  };

  // Pass 1: transform the x3 (fastest) axis.
  std::vector<double> a1re(static_cast<std::size_t>(M) * M * S),
      a1im(static_cast<std::size_t>(M) * M * S);
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j) {
      const double* row = w.data() + (static_cast<std::size_t>(i) * M + j) * M;
      for (int m3 = -ext; m3 <= ext; ++m3) {
        double sre = 0.0, sim = 0.0;
        for (int l = 0; l < M; ++l) {
          int p = pidx(m3, l);
          sre += row[l] * ct[p];
          sim -= row[l] * st[p];
        }
        std::size_t q = (static_cast<std::size_t>(i) * M + j) * S + (m3 + ext);
        a1re[q] = sre;
        a1im[q] = sim;
      }
    }

  // Pass 2: transform the x2 axis.
  std::vector<double> a2re(static_cast<std::size_t>(M) * S * S),
      a2im(static_cast<std::size_t>(M) * S * S);
  for (int i = 0; i < M; ++i)
    for (int s3 = 0; s3 < S; ++s3)
      for (int m2 = -ext; m2 <= ext; ++m2) {
        double sre = 0.0, sim = 0.0;
        for (int j = 0; j < M; ++j) {
          int p = pidx(m2, j);
          std::size_t q = (static_cast<std::size_t>(i) * M + j) * S + s3;
          sre += a1re[q] * ct[p] + a1im[q] * st[p];
          sim += a1im[q] * ct[p] - a1re[q] * st[p];
        }
        std::size_t q2 = (static_cast<std::size_t>(i) * S + (m2 + ext)) * S + s3;
        a2re[q2] = sre;
        a2im[q2] = sim;
      }

  // Pass 3: transform the x1 axis and scale by the cell volume.
  WeightTable T;
  T.ext = ext;
  T.stride = S;
  T.re.assign(static_cast<std::size_t>(S) * S * S, 0.0);
  T.im.assign(static_cast<std::size_t>(S) * S * S, 0.0);
  const double cv = dom.cell_volume();
  for (int m1 = -ext; m1 <= ext; ++m1)
    for (int s2 = 0; s2 < S; ++s2)
      for (int s3 = 0; s3 < S; ++s3) {
        double sre = 0.0, sim = 0.0;
        for (int i = 0; i < M; ++i) {
          int p = pidx(m1, i);
          std::size_t q = (static_cast<std::size_t>(i) * S + s2) * S + s3;
          sre += a2re[q] * ct[p] + a2im[q] * st[p];
          sim += a2im[q] * ct[p] - a2re[q] * st[p];
        }
        std::size_t qo = (static_cast<std::size_t>(m1 + ext) * S + s2) * S + s3;
        T.re[qo] = sre * cv;
        T.im[qo] = sim * cv;
      }
  return T;
}

// Quadrature of weight * trig(k_i.x) * trig(k_j.x) from the transform bins at
// the difference and sum wavevectors (product-to-sum identities; for a real
// weight, integral of w cos = Re, integral of w sin = -Im).
double pair_quad(const WeightTable& T, const std::array<int, 3>& ki, Phase ti,
                 const std::array<int, 3>& kj, Phase tj) {
  const std::size_t qd = T.idx(ki[0] - kj[0], ki[1] - kj[1], ki[2] - kj[2]);
  const std::size_t qs = T.idx(ki[0] + kj[0], ki[1] + kj[1], ki[2] + kj[2]);
  if (ti == Phase::cosine) {
    if (tj == Phase::cosine) return 0.5 * (T.re[qd] + T.re[qs]);
    return 0.5 * (T.im[qd] - T.im[qs]);  // cos * sin
  }
  if (tj == Phase::cosine) return 0.5 * (-T.im[qd] - T.im[qs]);  // sin * cos
  return 0.5 * (T.re[qd] - T.re[qs]);                            // sin * sin
}

}  // namespace

AssembledSystem assemble_system(const Basis& basis, const GridField& rho,
                                const GridField& u_bar, const GridField& B_bar,
                                const TransportCoefficients& coeffs) {
  const TorusDomain& dom = basis.domain;
  if (rho.ncomp != 1 || !(rho.domain == dom))
    throw ConfigError("assembly: density must be a scalar field on the basis grid");
  if (u_bar.ncomp != 3 || !(u_bar.domain == dom))
    throw ConfigError("assembly: advecting velocity must be a vector field on the basis grid");
  if (B_bar.ncomp != 3 || !(B_bar.domain == dom))
    throw ConfigError("assembly: background magnetic field must be a vector field on the basis grid");

  const double rho_min = rho.min_value();
  if (!(rho_min > 0.0))
    throw NumericalError("assembly: background density lost positivity");

  const std::size_t NS = dom.samples();
  const int ext = 2 * basis.K;

  // Twelve scalar weight fields -> transform tables.
  GridField mu_f = eval_law(coeffs.mu, rho);       // certified-range checks apply
  GridField sigma_f = eval_law(coeffs.sigma, rho);
  std::vector<double> scratch(NS);

  WeightTable T_rho = partial_dft(rho.v, dom, ext);
  WeightTable T_mu = partial_dft(mu_f.v, dom, ext);
  for (std::size_t q = 0; q < NS; ++q) scratch[q] = 1.0 / sigma_f.v[q];
  WeightTable T_isig = partial_dft(scratch, dom, ext);
  WeightTable T_rhou[3], T_B[3], T_hall[3];
  for (int c = 0; c < 3; ++c) {
    for (std::size_t q = 0; q < NS; ++q) scratch[q] = rho.v[q] * u_bar.v[c * NS + q];
    T_rhou[c] = partial_dft(scratch, dom, ext);
    std::vector<double> bc(B_bar.v.begin() + c * NS, B_bar.v.begin() + (c + 1) * NS);
    T_B[c] = partial_dft(bc, dom, ext);
    for (std::size_t q = 0; q < NS; ++q) scratch[q] = coeffs.hall * bc[q] / rho.v[q];
    T_hall[c] = partial_dft(scratch, dom, ext);
  }

  const int n = basis.n();
  AssembledSystem sys;
  sys.basis = &basis;
  sys.rho_min = rho_min;
  sys.mass.setZero(n, n);
  sys.advect.setZero(n, n);
  sys.lorentz.setZero(n, n);
  sys.hall_ohm.setZero(n, n);
  sys.emf.setZero(n, n);
  sys.viscous_sym.setZero(n, n);
  sys.resistive_sym.setZero(n, n);

  const double twopi_L = kTwoPi / dom.L;
  for (int i = 0; i < n; ++i) {
    const BasisElement& mi = basis.modes[i];
    const Wave& ci = basis.curl_waves[i];
    const double da_i = basis.deform_amp[i];
    const auto& si = basis.deform_sym[i];
    // Sign of the trig derivative: d/dtheta cos = -sin, d/dtheta sin = +cos.
    const double dsign_i = (mi.phase == Phase::cosine) ? -1.0 : 1.0;

    for (int j = i; j < n; ++j) {
      const BasisElement& mj = basis.modes[j];
      const Wave& cj = basis.curl_waves[j];
      const double da_j = basis.deform_amp[j];
      const auto& sj = basis.deform_sym[j];
      const double dsign_j = (mj.phase == Phase::cosine) ? -1.0 : 1.0;

      const double ee = dot(mi.pol, mj.pol);

      // Mass (symmetric): N_i N_j (e_i.e_j) <rho trig_i trig_j>.
      if (ee != 0.0) {
        double m = mi.norm_factor * mj.norm_factor * ee *
                   pair_quad(T_rho, mi.k, mi.phase, mj.k, mj.phase);
        sys.mass(i, j) = m;
        sys.mass(j, i) = m;
      }

      // Viscous (symmetric): 2 A_i A_j (S_i : S_j) <mu trig'_i trig'_j>.
      double frob = si[0] * sj[0] + si[1] * sj[1] + si[2] * sj[2] +
                    2.0 * (si[3] * sj[3] + si[4] * sj[4] + si[5] * sj[5]);
      if (frob != 0.0) {
        double v = 2.0 * da_i * da_j * frob * pair_quad(T_mu, mi.k, ci.trig, mj.k, cj.trig);
        sys.viscous_sym(i, j) = v;
        sys.viscous_sym(j, i) = v;
      }

      // Resistive (symmetric): a_i a_j (p_i.p_j) <sigma^-1 trig'_i trig'_j>.
      double pp = dot(ci.pol, cj.pol);
      if (pp != 0.0) {
        double r = ci.amp * cj.amp * pp * pair_quad(T_isig, mi.k, ci.trig, mj.k, cj.trig);
        sys.resistive_sym(i, j) = r;
        sys.resistive_sym(j, i) = r;
      }

      // Hall (exactly skew, zero diagonal): a_i a_j sum_c (p_j x p_i)_c
      // <hall B_c / rho trig'_i trig'_j>.
      if (i != j) {
        Vec3 pxp = cross(cj.pol, ci.pol);
        double hl = 0.0;
        for (int c = 0; c < 3; ++c) {
          if (pxp[c] == 0.0) continue;
          hl += ci.amp * cj.amp * pxp[c] * pair_quad(T_hall[c], mi.k, ci.trig, mj.k, cj.trig);
        }
        sys.hall_ohm(i, j) = hl;
        sys.hall_ohm(j, i) = -hl;
      }

      // Advection: P_ij = N_i N_j (2 pi / L) sgn_i (e_i.e_j)
      //                   sum_c k_i,c <rho u_c trig'_i trig_j>; only the skew
      // part enters the system, mirrored exactly.
      if (ee != 0.0) {
        double pij = 0.0, pji = 0.0;
        for (int c = 0; c < 3; ++c) {
          if (mi.k[c] != 0)
            pij += mi.k[c] * pair_quad(T_rhou[c], mi.k, ci.trig, mj.k, mj.phase);
          if (mj.k[c] != 0)
            pji += mj.k[c] * pair_quad(T_rhou[c], mj.k, cj.trig, mi.k, mi.phase);
        }
        pij *= mi.norm_factor * mj.norm_factor * twopi_L * dsign_i * ee;
        pji *= mi.norm_factor * mj.norm_factor * twopi_L * dsign_j * ee;
        double sk = 0.5 * (pij - pji);
        sys.advect(i, j) = sk;
        sys.advect(j, i) = -sk;
      }

      // Lorentz C and emf E have no symmetry: both orientations here.
      // C_ij = a_i N_j sum_c (e_j x p_i)_c <B_c trig'_i trig_j>.
      {
        Vec3 exp_ij = cross(mj.pol, ci.pol);
        Vec3 exp_ji = cross(mi.pol, cj.pol);
        double cij = 0.0, cji = 0.0;
        for (int c = 0; c < 3; ++c) {
          if (exp_ij[c] != 0.0)
            cij += exp_ij[c] * pair_quad(T_B[c], mi.k, ci.trig, mj.k, mj.phase);
          if (exp_ji[c] != 0.0)
            cji += exp_ji[c] * pair_quad(T_B[c], mj.k, cj.trig, mi.k, mi.phase);
        }
        sys.lorentz(i, j) = ci.amp * mj.norm_factor * cij;
        sys.lorentz(j, i) = cj.amp * mi.norm_factor * cji;
      }
      // E_ij = -N_i a_j sum_c (e_i x p_j)_c <B_c trig_i trig'_j>.
      {
        Vec3 exp_ij = cross(mi.pol, cj.pol);
        Vec3 exp_ji = cross(mj.pol, ci.pol);
        double eij = 0.0, eji = 0.0;
        for (int c = 0; c < 3; ++c) {
          if (exp_ij[c] != 0.0)
            eij += exp_ij[c] * pair_quad(T_B[c], mi.k, mi.phase, mj.k, cj.trig);
          if (exp_ji[c] != 0.0)
            eji += exp_ji[c] * pair_quad(T_B[c], mj.k, mj.phase, mi.k, ci.trig);
        }
        sys.emf(i, j) = -mi.norm_factor * cj.amp * eij;
        sys.emf(j, i) = -mj.norm_factor * ci.amp * eji;
      }
    }
  }
  // Fold the symmetric dissipation forms into the evolution matrices:
  // A = skew(advection) + viscous, D = Hall + resistive.
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      sys.advect(i, j) += sys.viscous_sym(i, j);
      sys.hall_ohm(i, j) += sys.resistive_sym(i, j);
    }

  sys.mass_llt.compute(sys.mass);
  if (sys.mass_llt.info() != Eigen::Success)
    throw NumericalError("assembly: mass matrix is not positive definite");
  return sys;
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double kC[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
constexpr double kB5[7] = {35.0 / 384,      0.0,        500.0 / 1113, 125.0 / 192,
                           -2187.0 / 6784, 11.0 / 84,  0.0};
constexpr double kB4[7] = {5179.0 / 57600,    0.0,          7571.0 / 16695, 393.0 / 640,
                           -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};

}  // namespace

OdeState step_linear(const AssembledSystem& sys, const OdeState& y0, double t0, double t1,
                     double tol, StepStats* stats) {
  if (sys.basis == nullptr) throw ConfigError("stepper: system is not assembled");
  const int n = sys.basis->n();
  if (y0.alpha.size() != n || y0.beta.size() != n)
    throw ConfigError("stepper: state size does not match the basis");
  if (!(tol > 0.0)) throw ConfigError("stepper: tolerance must be positive");
  if (t1 < t0) throw ConfigError("stepper: integration must run forward in time");

  const int dim = 2 * n + 2;
  Eigen::VectorXd y(dim);
  y.head(n) = y0.alpha;
  y.segment(n, n) = y0.beta;
  y[2 * n] = y0.d_visc;
  y[2 * n + 1] = y0.d_resist;
  if (t1 == t0) return y0;

  auto rhs = [&](const Eigen::VectorXd& v, Eigen::VectorXd& dv) {
    auto a = v.head(n);
    auto b = v.segment(n, n);
    dv.head(n) =
        sys.mass_llt.solve(sys.lorentz.transpose() * b - sys.advect.transpose() * a);
    dv.segment(n, n) = sys.emf.transpose() * a - sys.hall_ohm.transpose() * b;
    dv[2 * n] = a.dot(sys.viscous_sym * a);
    dv[2 * n + 1] = b.dot(sys.resistive_sym * b);
  };

  const double span = t1 - t0;
  std::array<Eigen::VectorXd, 7> k;
  for (auto& kk : k) kk.resize(dim);
  Eigen::VectorXd ytmp(dim), y5(dim), errv(dim);
  rhs(y, k[0]);

  // Initial step from the scaled magnitudes of state and slope.
  double d0 = 0.0, d1 = 0.0;
  for (int q = 0; q < dim; ++q) {
    double sc = tol + tol * std::abs(y[q]);
    d0 += (y[q] / sc) * (y[q] / sc);
    d1 += (k[0][q] / sc) * (k[0][q] / sc);
  }
  double h = (d1 > 0.0 && d0 > 0.0) ? 0.01 * std::sqrt(d0 / d1) : span / 100.0;
  h = std::min(h, span);

  double t = t0;
  long guard = 0;
  while (t < t1) {
    if (++guard > 10'000'000)
      throw NumericalError("stepper: step budget exhausted");
    h = std::min(h, t1 - t);
    if (!(h > 16.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(t), span)))
      throw NumericalError("stepper: step size underflow");

    for (int s = 1; s < 7; ++s) {
      ytmp = y;
      for (int m = 0; m < s; ++m)
        if (kA[s][m] != 0.0) ytmp += (h * kA[s][m]) * k[m];
      rhs(ytmp, k[s]);
    }
    y5 = y;
    for (int s = 0; s < 7; ++s)
      if (kB5[s] != 0.0) y5 += (h * kB5[s]) * k[s];
    errv.setZero();
    for (int s = 0; s < 7; ++s)
      if (kB5[s] != kB4[s]) errv += (h * (kB5[s] - kB4[s])) * k[s];

    double err = 0.0;
    for (int q = 0; q < dim; ++q) {
      double sc = tol + tol * std::max(std::abs(y[q]), std::abs(y5[q]));
      err += (errv[q] / sc) * (errv[q] / sc);
    }
    err = std::sqrt(err / dim);

    if (err <= 1.0) {
      t = (t1 - t <= h) ? t1 : t + h;
      y = y5;
      k[0] = k[6];  // first-same-as-last
      if (stats) ++stats->accepted;
    } else {
      if (stats) ++stats->rejected;  // y unchanged, so k[0] stays valid
    }
    double factor = (err == 0.0) ? 5.0 : 0.9 * std::pow(err, -0.2);
    h *= std::clamp(factor, 0.2, 5.0);
  }

  OdeState out;
  out.alpha = y.head(n);
  out.beta = y.segment(n, n);
  out.d_visc = y[2 * n];
  out.d_resist = y[2 * n + 1];
  return out;
}

double kinetic_energy(const AssembledSystem& sys, const Eigen::VectorXd& alpha) {
  return 0.5 * alpha.dot(sys.mass * alpha);
}

double magnetic_energy(const Eigen::VectorXd& beta) { return 0.5 * beta.squaredNorm(); }

double system_energy(const AssembledSystem& sys, const OdeState& y) {
  return kinetic_energy(sys, y.alpha) + magnetic_energy(y.beta);
}

}  // namespace hallmhd
