#include "hallmhd/verification.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>

#include "hallmhd/transport.hpp"

namespace hallmhd {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

// Nodal quadrature L^p norm of the pointwise Euclidean magnitude.
double lp_norm_mag(const GridField& f, double p) {
  const std::size_t nn = f.domain.samples();
  KahanSum s;
  for (std::size_t q = 0; q < nn; ++q) {
    double m2 = 0.0;
    for (int c = 0; c < f.ncomp; ++c) m2 += f.v[c * nn + q] * f.v[c * nn + q];
    s.add(std::pow(std::sqrt(m2), p) * f.domain.cell_volume());
  }
  return std::pow(s.value(), 1.0 / p);
}

double linf_norm_mag(const GridField& f) {
  const std::size_t nn = f.domain.samples();
  double m = 0.0;
  for (std::size_t q = 0; q < nn; ++q) {
    double m2 = 0.0;
    for (int c = 0; c < f.ncomp; ++c) m2 += f.v[c * nn + q] * f.v[c * nn + q];
    m = std::max(m, m2);
  }
  return std::sqrt(m);
}

struct GradientNorms {
  double l2_sq = 0.0;   // integral of the squared Frobenius norm
  double linf = 0.0;    // max nodal Frobenius norm
};

GradientNorms gradient_norms(const GridField& u) {
  const std::size_t nn = u.domain.samples();
  std::array<GridField, 3> d{spectral_derivative(u, 0), spectral_derivative(u, 1),
                             spectral_derivative(u, 2)};
  GradientNorms g;
  KahanSum s;
  for (std::size_t q = 0; q < nn; ++q) {
    double fro2 = 0.0;
    for (int axis = 0; axis < 3; ++axis)
      for (int c = 0; c < u.ncomp; ++c) {
        double e = d[axis].v[c * nn + q];
        fro2 += e * e;
      }
    s.add(fro2 * u.domain.cell_volume());
    g.linf = std::max(g.linf, fro2);
  }
  g.l2_sq = s.value();
  g.linf = std::sqrt(g.linf);
  return g;
}

// Derivative weights of the quadratic through (t0,t1,t2), evaluated at `at`.
std::array<double, 3> lagrange_deriv_weights(double t0, double t1, double t2, double at) {
  return {(2.0 * at - t1 - t2) / ((t0 - t1) * (t0 - t2)),
          (2.0 * at - t0 - t2) / ((t1 - t0) * (t1 - t2)),
          (2.0 * at - t0 - t1) / ((t2 - t0) * (t2 - t1))};
}

bool times_match(double a, double b) { return std::abs(a - b) <= 1e-9 * (1.0 + std::abs(a)); }

double cumulative_trapezoid(const std::vector<double>& t, const std::vector<double>& f,
                            std::vector<double>& out) {
  out.assign(t.size(), 0.0);
  KahanSum acc;
  for (std::size_t i = 1; i < t.size(); ++i) {
    acc.add(0.5 * (f[i - 1] + f[i]) * (t[i] - t[i - 1]));
    out[i] = acc.value();
  }
  return acc.value();
}

// Least-squares slope of y against x; 0 when degenerate.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() < 2) return 0.0;
  double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  double var = sxx - sx * sx / n;
  if (var <= 1e-24) return 0.0;
  return (sxy - sx * sy / n) / var;
}

}  // namespace

GridField beltrami_reference(double amplitude, double sigma_const, double L, double t, int M) {
  if (!(sigma_const > 0.0))
    throw ConfigError("beltrami_reference: conductivity must be positive");
  if (!(L > 0.0)) throw ConfigError("beltrami_reference: box size must be positive");
  if (M < 1) throw ConfigError("beltrami_reference: grid size must be positive");
  TorusDomain dom{L, M};
  GridField f(dom, 3);
  const double k = 2.0 * kPi / L;
  const double amp = amplitude * std::exp(-k * k * t / sigma_const);
  const double h = dom.dx();
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j)
      for (int l = 0; l < M; ++l) {
        double x = i * h, y = j * h, z = l * h;
        f.at(0, i, j, l) = amp * (std::sin(k * z) + std::cos(k * y));
        f.at(1, i, j, l) = amp * (std::sin(k * x) + std::cos(k * z));
        f.at(2, i, j, l) = amp * (std::sin(k * y) + std::cos(k * x));
      }
  return f;
}

Eigen::VectorXd embed_coefficients(const Basis& coarse, const Basis& fine,
                                   const Eigen::VectorXd& c) {
  if (coarse.domain.L != fine.domain.L)
    throw ConfigError("embed_coefficients: box sizes differ");
  if (coarse.K > fine.K)
    throw ConfigError("embed_coefficients: target cutoff below source cutoff");
  if (c.size() != coarse.n())
    throw ConfigError("embed_coefficients: coefficient size does not match the source basis");
  for (int i = 0; i < coarse.n(); ++i) {
    const BasisElement& a = coarse.modes[i];
    const BasisElement& b = fine.modes[i];
    if (a.k != b.k || a.pol_int != b.pol_int || a.phase != b.phase)
      throw ConfigError("embed_coefficients: mode lists do not nest");
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(fine.n());
  out.head(c.size()) = c;
  return out;
}

RelativeEnergySeries relative_energy(const SolutionTrajectory& weak,
                                     const SolutionTrajectory& ref,
                                     const TransportCoefficients& coeffs) {
  if (weak.basis == nullptr || ref.basis == nullptr)
    throw ConfigError("relative_energy: trajectory without a basis");
  if (weak.samples.empty() || ref.samples.empty())
    throw ConfigError("relative_energy: empty trajectory");
  if (ref.basis->K < 2 * weak.basis->K)
    throw ConfigError(
        "relative_energy: reference cutoff must be at least twice the trajectory cutoff");
  const Basis& fb = *ref.basis;

  // Common sample times (first match wins).
  struct Pair {
    const TrajectorySample* w;
    const TrajectorySample* r;
  };
  std::vector<Pair> pairs;
  for (const auto& sw : weak.samples)
    for (const auto& sr : ref.samples)
      if (times_match(sw.t, sr.t)) {
        pairs.push_back({&sw, &sr});
        break;
      }
  if (pairs.size() < 2)
    throw ConfigError("relative_energy: fewer than two common sample times");

  const std::size_t n = pairs.size();
  std::vector<double> t(n), du2(n), db2(n), dj2(n), dr2(n), grad_diff_sq(n), integrand(n);

  RelativeEnergySeries out;
  out.mu_lower = coeffs.mu.value_lo;
  out.sigma_upper = coeffs.sigma.value_hi;
  if (!(out.mu_lower > 0.0) || !(out.sigma_upper > 0.0))
    throw ConfigError("relative_energy: material laws lack positive certified bounds");
  double rho_lower = std::numeric_limits<double>::infinity();

  const std::size_t nn = fb.domain.samples();
  for (std::size_t i = 0; i < n; ++i) {
    const TrajectorySample& w = *pairs[i].w;
    const TrajectorySample& r = *pairs[i].r;
    t[i] = w.t;
    if (!(r.rho.rho.domain == fb.domain))
      throw ConfigError("relative_energy: reference density grid does not match its basis");
    if (!(r.rho.lo > 0.0))
      throw ConfigError("relative_energy: reference density bound not positive");

    // Differences represented exactly on the reference basis.
    Eigen::VectorXd dalpha = embed_coefficients(*weak.basis, fb, w.alpha) - r.alpha;
    Eigen::VectorXd dbeta = embed_coefficients(*weak.basis, fb, w.beta) - r.beta;
    GridField u_diff = synthesize(fb, dalpha);
    GridField b_diff = synthesize(fb, dbeta);
    GridField j_diff = spectral_curl(b_diff);
    du2[i] = l2_norm(u_diff);
    db2[i] = l2_norm(b_diff);
    dj2[i] = l2_norm(j_diff);
    GradientNorms gd = gradient_norms(u_diff);
    grad_diff_sq[i] = gd.l2_sq;
    double du6 = lp_norm_mag(u_diff, 6.0);

    // Density difference on the reference grid (resampled if the weak run
    // used a coarser grid).
    KahanSum drs;
    if (w.rho.rho.domain == fb.domain) {
      for (std::size_t q = 0; q < nn; ++q) {
        double d = w.rho.rho.v[q] - r.rho.rho.v[q];
        drs.add(d * d * fb.domain.cell_volume());
      }
    } else {
      double h = fb.domain.dx();
      for (int ii = 0; ii < fb.domain.M; ++ii)
        for (int jj = 0; jj < fb.domain.M; ++jj)
          for (int ll = 0; ll < fb.domain.M; ++ll) {
            Vec3 x{ii * h, jj * h, ll * h};
            double d = monotone_tricubic(w.rho.rho, x) - r.rho.rho.at(0, ii, jj, ll);
            drs.add(d * d * fb.domain.cell_volume());
          }
    }
    dr2[i] = std::sqrt(drs.value());

    // Reference fields and their measured norms.
    GridField u_hat = synthesize(fb, r.alpha);
    GridField b_hat = synthesize(fb, r.beta);
    GridField j_hat = spectral_curl(b_hat);
    double u_inf = linf_norm_mag(u_hat);
    double u_l3 = lp_norm_mag(u_hat, 3.0);
    double j_inf = linf_norm_mag(j_hat);
    double b_inf = linf_norm_mag(b_hat);
    GradientNorms gu = gradient_norms(u_hat);
    GradientNorms gb = gradient_norms(b_hat);

    GridField grad_rho(fb.domain, 3);
    {
      GridField gx = spectral_derivative(r.rho.rho, 0);
      GridField gy = spectral_derivative(r.rho.rho, 1);
      GridField gz = spectral_derivative(r.rho.rho, 2);
      for (std::size_t q = 0; q < nn; ++q) {
        grad_rho.v[q] = gx.v[q];
        grad_rho.v[nn + q] = gy.v[q];
        grad_rho.v[2 * nn + q] = gz.v[q];
      }
    }
    double grad_rho_l3 = lp_norm_mag(grad_rho, 3.0);

    // Time derivative of the reference by quadratic finite differences on
    // the common time grid.
    Eigen::VectorXd da_dt, db_dt;
    if (n == 2) {
      double dt = pairs[1].w->t - pairs[0].w->t;
      if (!(dt > 0.0)) throw ConfigError("relative_energy: sample times not increasing");
      da_dt = (pairs[1].r->alpha - pairs[0].r->alpha) / dt;
      db_dt = (pairs[1].r->beta - pairs[0].r->beta) / dt;
    } else {
      std::size_t c = std::min(std::max<std::size_t>(i, 1), n - 2);
      auto wts = lagrange_deriv_weights(pairs[c - 1].w->t, pairs[c].w->t, pairs[c + 1].w->t,
                                        t[i]);
      da_dt = wts[0] * pairs[c - 1].r->alpha + wts[1] * pairs[c].r->alpha +
              wts[2] * pairs[c + 1].r->alpha;
      db_dt = wts[0] * pairs[c - 1].r->beta + wts[1] * pairs[c].r->beta +
              wts[2] * pairs[c + 1].r->beta;
    }
    double dudt_l3 = da_dt.isZero(0.0) ? 0.0 : lp_norm_mag(synthesize(fb, da_dt), 3.0);
    double dbdt_l3 = db_dt.isZero(0.0) ? 0.0 : lp_norm_mag(synthesize(fb, db_dt), 3.0);

    out.grad_rho_l3 = std::max(out.grad_rho_l3, grad_rho_l3);
    out.dudt_l3 = std::max(out.dudt_l3, dudt_l3);
    out.dbdt_l3 = std::max(out.dbdt_l3, dbdt_l3);
    out.grad_u_inf = std::max(out.grad_u_inf, gu.linf);
    out.grad_b_inf = std::max(out.grad_b_inf, gb.linf);
    rho_lower = std::min({rho_lower, w.rho.lo, r.rho.lo});

    // Constant-one Hoelder products pairing the differences with measured
    // reference norms (Lipschitz factors of the material laws and the Hall
    // coefficient folded into the unit constant).
    double inv_rho = 1.0 / r.rho.lo;
    double rho_sup = w.rho.hi, rho_hat_sup = r.rho.hi;
    double lines = 0.0;
    lines += db2[i] * dj2[i] * j_inf * inv_rho * (1.0 + rho_sup + rho_hat_sup);
    lines += db2[i] * dj2[i] * u_inf;
    lines += db2[i] * du2[i] * j_inf;
    lines += dr2[i] * du6 * (dudt_l3 + u_l3 * gu.linf);
    lines += rho_sup * du2[i] * du2[i] * gu.linf;
    lines += dr2[i] * dj2[i] * j_inf;
    lines += dr2[i] * du2[i] * u_inf;
    lines += dr2[i] * dj2[i] * inv_rho * (1.0 + b_inf * j_inf);
    lines += du6 * grad_rho_l3 * dr2[i];
    lines += dr2[i] * gu.linf * std::sqrt(grad_diff_sq[i]);
    integrand[i] = lines;
  }
  out.rho_lower = rho_lower;

  std::vector<double> diss_integrand(n), resist_integrand(n);
  for (std::size_t i = 0; i < n; ++i) {
    diss_integrand[i] = out.mu_lower * grad_diff_sq[i];
    resist_integrand[i] = dj2[i] * dj2[i] / out.sigma_upper;
  }
  std::vector<double> diss_cum, resist_cum, rhs_cum;
  cumulative_trapezoid(t, diss_integrand, diss_cum);
  cumulative_trapezoid(t, resist_integrand, resist_cum);
  cumulative_trapezoid(t, integrand, rhs_cum);

  out.rows.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    RelativeEnergyRow& row = out.rows[i];
    row.t = t[i];
    row.term_u = 0.5 * rho_lower * du2[i] * du2[i];
    row.term_b = 0.5 * db2[i] * db2[i];
    row.term_rho = 0.5 * dr2[i] * dr2[i];
    row.diss_u = diss_cum[i];
    row.diss_b = resist_cum[i];
    row.rhs_cum = rhs_cum[i];
  }
  return out;
}

GronwallVerdict gronwall_check(const RelativeEnergySeries& s, double slack, double floor_abs) {
  if (s.rows.empty()) throw ConfigError("gronwall_check: empty series");
  if (!(slack >= 0.0) || !(floor_abs >= 0.0))
    throw ConfigError("gronwall_check: slack and floor must be nonnegative");
  const double lhs0 = s.rows.front().lhs();
  GronwallVerdict v;
  v.worst_margin = -std::numeric_limits<double>::infinity();
  for (const auto& r : s.rows)
    v.worst_margin = std::max(v.worst_margin, r.lhs() - (1.0 + slack) * (lhs0 + r.rhs_cum));
  KahanSum exp_arg;
  for (std::size_t i = 0; i + 1 < s.rows.size(); ++i) {
    const auto& a = s.rows[i];
    const auto& b = s.rows[i + 1];
    double d_rhs = b.rhs_cum - a.rhs_cum;
    double diff2_a = 2.0 * (a.term_u + a.term_b + a.term_rho);
    double diff2_b = 2.0 * (b.term_u + b.term_b + b.term_rho);
    exp_arg.add(d_rhs / std::max(0.5 * (diff2_a + diff2_b), 1e-30));
  }
  v.exp_c_integral = std::exp(std::min(exp_arg.value(), 700.0));
  v.ok = v.worst_margin <= floor_abs;
  return v;
}

RefinementReport refinement_study(const LevelFactory& make_level, RefinementAxis axis,
                                  int levels) {
  if (!make_level) throw ConfigError("refinement_study: missing level factory");
  if (levels < 3) throw ConfigError("refinement_study: at least three levels required");

  RefinementReport rep;
  rep.axis = axis;

  struct Held {
    std::shared_ptr<Basis> basis;
    SolutionTrajectory traj;
    bool ok = false;
  };
  std::vector<Held> held(levels);

  for (int lvl = 0; lvl < levels; ++lvl) {
    RefinementLevel row;
    try {
      LevelSetup ls = make_level(lvl);
      if (!ls.basis) throw ConfigError("refinement_study: level factory returned no basis");
      if (ls.input.basis != ls.basis.get())
        throw ConfigError("refinement_study: level input does not point at the level basis");
      row.parameter = ls.parameter;

      TrajectoryRecorder rec(*ls.basis, ls.input);
      run_simulation(ls.input, ls.config, rec.callback());
      held[lvl].basis = ls.basis;
      held[lvl].traj = rec.trajectory();
      held[lvl].ok = true;

      const DensitySnapshot& s0 = held[lvl].traj.samples.front().rho;
      if (s0.hi > s0.lo) {
        auto h0 = level_set_histogram(s0.rho, s0.lo, s0.hi, 32);
        double drift = 0.0;
        for (const auto& sample : held[lvl].traj.samples) {
          auto h = level_set_histogram(sample.rho.rho, s0.lo, s0.hi, 32);
          for (std::size_t b = 0; b < h.size(); ++b)
            drift = std::max(drift, std::abs(h[b] - h0[b]));
        }
        row.level_set_drift = drift;
      }
      row.ok = true;
    } catch (const std::exception& e) {
      row.ok = false;
      row.note = e.what();
      held[lvl].ok = false;
    }

    if (row.ok && lvl > 0) {
      if (!held[lvl - 1].ok) {
        row.note = "no comparison: previous level unavailable";
      } else {
        const Held& prev = held[lvl - 1];
        const Held& cur = held[lvl];
        const Basis& big =
            (prev.basis->K <= cur.basis->K) ? *cur.basis : *prev.basis;
        std::vector<double> times, fa, fb2, fr;
        bool rho_comparable = true;
        for (const auto& sp : prev.traj.samples)
          for (const auto& sc : cur.traj.samples)
            if (times_match(sp.t, sc.t)) {
              Eigen::VectorXd da, db;
              if (prev.basis->K <= cur.basis->K) {
                da = embed_coefficients(*prev.basis, big, sp.alpha) - sc.alpha;
                db = embed_coefficients(*prev.basis, big, sp.beta) - sc.beta;
              } else {
                da = sp.alpha - embed_coefficients(*cur.basis, big, sc.alpha);
                db = sp.beta - embed_coefficients(*cur.basis, big, sc.beta);
              }
              times.push_back(sp.t);
              fa.push_back(da.squaredNorm());
              fb2.push_back(db.squaredNorm());
              if (sp.rho.rho.domain == sc.rho.rho.domain) {
                KahanSum d2;
                for (std::size_t q = 0; q < sp.rho.rho.v.size(); ++q) {
                  double d = sp.rho.rho.v[q] - sc.rho.rho.v[q];
                  d2.add(d * d * sp.rho.rho.domain.cell_volume());
                }
                fr.push_back(d2.value());
              } else {
                rho_comparable = false;
                fr.push_back(0.0);
              }
              break;
            }
        if (times.size() < 2) {
          row.note = "no comparison: fewer than two common sample times";
        } else {
          row.cauchy_alpha = std::sqrt(integrate_knots(times, fa));
          row.cauchy_beta = std::sqrt(integrate_knots(times, fb2));
          row.cauchy_rho = rho_comparable ? std::sqrt(integrate_knots(times, fr)) : 0.0;
          if (!rho_comparable) row.note = "density grids differ; density difference skipped";
          row.times = times;
          row.diff_alpha.resize(times.size());
          row.diff_beta.resize(times.size());
          row.diff_rho.resize(times.size());
          for (std::size_t q = 0; q < times.size(); ++q) {
            row.diff_alpha[q] = std::sqrt(fa[q]);
            row.diff_beta[q] = std::sqrt(fb2[q]);
            row.diff_rho[q] = rho_comparable ? std::sqrt(fr[q]) : 0.0;
          }
        }
      }
    }
    rep.levels.push_back(std::move(row));
  }

  auto fit_rate = [&](double RefinementLevel::*member) {
    std::vector<double> x, y;
    for (int lvl = 1; lvl < levels; ++lvl) {
      const RefinementLevel& r = rep.levels[lvl];
      if (!r.ok || !rep.levels[lvl - 1].ok) continue;
      double c = r.*member;
      if (!(c > 0.0) || !(r.parameter > 0.0)) continue;
      x.push_back(std::log(r.parameter));
      y.push_back(std::log(c));
    }
    return fit_slope(x, y);
  };
  rep.rate_alpha = fit_rate(&RefinementLevel::cauchy_alpha);
  rep.rate_beta = fit_rate(&RefinementLevel::cauchy_beta);
  rep.rate_rho = fit_rate(&RefinementLevel::cauchy_rho);
  return rep;
}

}  // namespace hallmhd
