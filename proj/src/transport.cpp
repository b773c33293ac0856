#include "hallmhd/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hallmhd {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double wrap_coord(double x, double L) {
  double r = x - L * std::floor(x / L);
  if (r >= L) r -= L;
  if (r < 0.0) r = 0.0;
  return r;
}

// Cubic Hermite on [0,1] with slope limiting: slopes with the wrong sign
// relative to the bracketing secant are zeroed, and their magnitude is capped
// at three times the secant's, which keeps the piece monotone and therefore
// inside [f1, f2].  Centered-difference slopes give third-order accuracy away
// from extrema.
double monotone_cubic(double f0, double f1, double f2, double f3, double t) {
  double delta = f2 - f1;
  double d1 = 0.5 * (f2 - f0);
  double d2 = 0.5 * (f3 - f1);
  if (delta == 0.0) {
    d1 = 0.0;
    d2 = 0.0;
  } else {
    if (d1 * delta <= 0.0)
      d1 = 0.0;
    else if (std::abs(d1) > 3.0 * std::abs(delta))
      d1 = 3.0 * delta;
    if (d2 * delta <= 0.0)
      d2 = 0.0;
    else if (std::abs(d2) > 3.0 * std::abs(delta))
      d2 = 3.0 * delta;
  }
  double t2 = t * t, t3 = t2 * t;
  return f1 * (2.0 * t3 - 3.0 * t2 + 1.0) + d1 * (t3 - 2.0 * t2 + t) +
         f2 * (-2.0 * t3 + 3.0 * t2) + d2 * (t3 - t2);
}

struct AxisBracket {
  int idx[4];  // wrapped stencil indices
  double frac; // in [0,1); exactly 0 after node snapping
};

// Locate point coordinate x along one periodic axis: bracketing cell, wrapped
// 4-point stencil and fractional offset.  Offsets within one part in 1e12 of
// a node snap onto it so that exact-translation feet reproduce samples
// bitwise.
AxisBracket bracket_axis(double x, double L, int M) {
  const double dx = L / M;
  double s = wrap_coord(x, L) / dx;
  int i0 = static_cast<int>(std::floor(s));
  double f = s - i0;
  constexpr double kSnap = 1e-12;
  if (f < kSnap) {
    f = 0.0;
  } else if (f > 1.0 - kSnap) {
    ++i0;
    f = 0.0;
  }
  i0 = ((i0 % M) + M) % M;
  AxisBracket b;
  b.frac = f;
  for (int d = 0; d < 4; ++d) b.idx[d] = (i0 - 1 + d + M) % M;
  return b;
}

}  // namespace

Vec3 VelocityTrajectory::eval(double t, const Vec3& x) const {
  if (basis == nullptr || knots.empty() || alpha.size() != knots.size())
    throw ConfigError("velocity trajectory: missing basis or knot/coefficient mismatch");
  const int n = basis->n();
  for (const Eigen::VectorXd& a : alpha)
    if (a.size() != n)
      throw ConfigError("velocity trajectory: coefficient vector size does not match basis");
  for (size_t s = 1; s < knots.size(); ++s)
    if (!(knots[s] > knots[s - 1]))
      throw ConfigError("velocity trajectory: knots must be strictly increasing");

  const double t0 = knots.front(), t1 = knots.back();
  const double slack = 1e-9 * (std::abs(t1 - t0) + 1.0);
  if (t < t0 - slack || t > t1 + slack)
    throw NumericalError("velocity trajectory evaluated outside its time range");

  // Segment and linear blend (clamped to the end knots within the slack).
  size_t seg = 0;
  double w = 0.0;
  if (knots.size() > 1 && t > t0) {
    seg = static_cast<size_t>(
              std::upper_bound(knots.begin(), knots.end(), std::min(t, t1)) - knots.begin());
    if (seg >= knots.size()) seg = knots.size() - 1;
    if (seg == 0) seg = 1;
    --seg;  // segment [knots[seg], knots[seg+1]]
    double span = knots[seg + 1] - knots[seg];
    w = std::clamp((t - knots[seg]) / span, 0.0, 1.0);
  }
  const Eigen::VectorXd& a0 = alpha[seg];
  const Eigen::VectorXd& a1 = alpha[knots.size() > 1 ? seg + 1 : seg];

  const double L = basis->domain.L;
  Vec3 u = mean_drift;
  for (int i = 0; i < n; ++i) {
    double c = (1.0 - w) * a0[i] + w * a1[i];
    if (c == 0.0) continue;
    const BasisElement& m = basis->modes[i];
    double theta = (kTwoPi / L) * (m.k[0] * x.x + m.k[1] * x.y + m.k[2] * x.z);
    double trig = (m.phase == Phase::cosine) ? std::cos(theta) : std::sin(theta);
    double amp = c * m.norm_factor * trig;
    u.x += amp * m.pol.x;
    u.y += amp * m.pol.y;
    u.z += amp * m.pol.z;
  }
  return u;
}

double VelocityTrajectory::max_speed() const {
  if (basis == nullptr || knots.empty() || alpha.size() != knots.size())
    throw ConfigError("velocity trajectory: missing basis or knot/coefficient mismatch");
  double worst = 0.0;
  for (const Eigen::VectorXd& a : alpha) {
    KahanSum s;
    for (int i = 0; i < a.size(); ++i)
      s.add(std::abs(a[i]) * basis->modes[i].norm_factor);
    worst = std::max(worst, s.value());
  }
  return worst + norm(mean_drift);
}

Vec3 trace_characteristic(const VelocityTrajectory& traj, const Vec3& x, double t_from,
                          double t_to, double dt_cap) {
  if (!(dt_cap > 0.0)) throw ConfigError("characteristic substep cap must be positive");
  if (traj.basis == nullptr) throw ConfigError("characteristic tracing requires a basis");
  const double L = traj.basis->domain.L;
  const double dt = t_to - t_from;
  if (dt == 0.0) return Vec3{wrap_coord(x.x, L), wrap_coord(x.y, L), wrap_coord(x.z, L)};

  // Range check up front (eval would also catch it, mid-integration).
  if (!traj.knots.empty()) {
    const double t0 = traj.knots.front(), t1 = traj.knots.back();
    const double slack = 1e-9 * (std::abs(t1 - t0) + 1.0);
    const double lo = std::min(t_from, t_to), hi = std::max(t_from, t_to);
    if (lo < t0 - slack || hi > t1 + slack)
      throw NumericalError("characteristic tracing outside the trajectory time range");
  }

  const double umax = traj.max_speed();
  double cap = dt_cap;
  if (umax > 0.0) cap = std::min(cap, 0.25 * traj.basis->domain.dx() / umax);
  const int nsub = std::max(1, static_cast<int>(std::ceil(std::abs(dt) / cap)));
  const double h = dt / nsub;

  Vec3 p = x;
  double t = t_from;
  for (int s = 0; s < nsub; ++s) {
    Vec3 k1 = traj.eval(t, p);
    Vec3 k2 = traj.eval(t + 0.5 * h, p + (0.5 * h) * k1);
    Vec3 k3 = traj.eval(t + 0.5 * h, p + (0.5 * h) * k2);
    Vec3 k4 = traj.eval(t + h, p + h * k3);
    p = p + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    t = (s + 1 == nsub) ? t_to : t_from + (s + 1) * h;
  }
  return Vec3{wrap_coord(p.x, L), wrap_coord(p.y, L), wrap_coord(p.z, L)};
}

double monotone_tricubic(const GridField& f, const Vec3& x) {
  if (f.ncomp != 1) throw ConfigError("monotone interpolation expects a scalar field");
  const int M = f.domain.M;
  const double L = f.domain.L;
  AxisBracket bx = bracket_axis(x.x, L, M);
  AxisBracket by = bracket_axis(x.y, L, M);
  AxisBracket bz = bracket_axis(x.z, L, M);

  // Interpolate along x3 for the 16 stencil columns, then x2, then x1.  Each
  // 1-D pass stays between its bracketing pair, so the composition stays in
  // the hull of the 2x2x2 bracketing corners; the final clamp makes that
  // bit-exact against rounding.
  double plane[4][4];
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      double col[4];
      for (int c = 0; c < 4; ++c) col[c] = f.at(0, bx.idx[a], by.idx[b], bz.idx[c]);
      plane[a][b] = (bz.frac == 0.0)
                        ? col[1]
                        : monotone_cubic(col[0], col[1], col[2], col[3], bz.frac);
    }
  double row[4];
  for (int a = 0; a < 4; ++a)
    row[a] = (by.frac == 0.0)
                 ? plane[a][1]
                 : monotone_cubic(plane[a][0], plane[a][1], plane[a][2], plane[a][3], by.frac);
  double val = (bx.frac == 0.0) ? row[1] : monotone_cubic(row[0], row[1], row[2], row[3], bx.frac);

  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (int a = 1; a <= 2; ++a)
    for (int b = 1; b <= 2; ++b)
      for (int c = 1; c <= 2; ++c) {
        double v = f.at(0, bx.idx[a], by.idx[b], bz.idx[c]);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
  return std::clamp(val, lo, hi);
}

DensitySnapshot advect_density(const DensitySnapshot& from, const VelocityTrajectory& traj,
                               double t_to, double dt_cap) {
  if (from.rho.ncomp != 1) throw ConfigError("density advection expects a scalar field");
  DensitySnapshot out;
  out.rho = GridField(from.rho.domain, 1);
  out.t = t_to;
  out.lo = from.lo;
  out.hi = from.hi;

  // Uniform densities are invariant under any incompressible transport.
  if (t_to == from.t || from.rho.is_constant(0)) {
    out.rho.v = from.rho.v;
    return out;
  }

  const TorusDomain& dom = from.rho.domain;
  const double dx = dom.dx();
  for (int i = 0; i < dom.M; ++i)
    for (int j = 0; j < dom.M; ++j)
      for (int l = 0; l < dom.M; ++l) {
        Vec3 node{i * dx, j * dx, l * dx};
        Vec3 foot = trace_characteristic(traj, node, t_to, from.t, dt_cap);
        out.rho.at(0, i, j, l) = monotone_tricubic(from.rho, foot);
      }
  return out;
}

double level_set_measure(const GridField& rho, double alpha, double beta) {
  if (rho.ncomp != 1) throw ConfigError("level-set measure expects a scalar field");
  long count = 0;
  for (double v : rho.v)
    if (v >= alpha && v < beta) ++count;
  return static_cast<double>(count) * rho.domain.cell_volume();
}

std::vector<double> level_set_histogram(const GridField& rho, double lo, double hi, int nbins) {
  if (rho.ncomp != 1) throw ConfigError("level-set histogram expects a scalar field");
  if (nbins < 1) throw ConfigError("level-set histogram needs at least one bin");
  if (!(hi > lo)) throw ConfigError("level-set histogram needs an increasing value range");
  std::vector<long> counts(static_cast<size_t>(nbins), 0);
  const double w = (hi - lo) / nbins;
  for (double v : rho.v) {
    int b = static_cast<int>(std::floor((v - lo) / w));
    // Half-open bins [lo + b w, lo + (b+1) w), except the last bin closes at
    // hi so the maximum value is counted.
    b = std::clamp(b, 0, nbins - 1);
    ++counts[static_cast<size_t>(b)];
  }
  std::vector<double> vols(counts.size());
  const double cellvol = rho.domain.cell_volume();
  for (size_t b = 0; b < counts.size(); ++b) vols[b] = counts[b] * cellvol;
  return vols;
}

}  // namespace hallmhd
