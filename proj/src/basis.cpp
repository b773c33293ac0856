// Divergence-free trigonometric basis: enumeration, synthesis, projection,
// exact curls, spectral differentiation and quadrature.

#include "hallmhd/basis.hpp"

#include <algorithm>
#include <cmath>

namespace hallmhd {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

std::array<long, 3> icross(const std::array<int, 3>& a, const std::array<int, 3>& b) {
  return {static_cast<long>(a[1]) * b[2] - static_cast<long>(a[2]) * b[1],
          static_cast<long>(a[2]) * b[0] - static_cast<long>(a[0]) * b[2],
          static_cast<long>(a[0]) * b[1] - static_cast<long>(a[1]) * b[0]};
}

Vec3 normalized(const std::array<long, 3>& a) {
  double n = std::sqrt(double(a[0]) * a[0] + double(a[1]) * a[1] + double(a[2]) * a[2]);
  return {a[0] / n, a[1] / n, a[2] / n};
}

std::array<int, 3> narrow(const std::array<long, 3>& a) {
  return {static_cast<int>(a[0]), static_cast<int>(a[1]), static_cast<int>(a[2])};
}

}  // namespace

Basis enumerate_modes(const TorusDomain& domain, int K) {
  if (K < 1) throw ConfigError("enumerate_modes: cutoff K must be >= 1");
  if (4 * K > domain.M)
    throw ConfigError("enumerate_modes: anti-aliasing margin violated, need M >= 4K (M=" +
                      std::to_string(domain.M) + ", K=" + std::to_string(K) + ")");
  if (domain.M % 2 != 0)
    throw ConfigError("enumerate_modes: grid size M must be even");

  // Half-space wavevectors (first nonzero component positive), sorted by
  // (|k|^2, lexicographic k).
  std::vector<std::array<int, 3>> ks;
  for (int a = -K; a <= K; ++a)
    for (int b = -K; b <= K; ++b)
      for (int c = -K; c <= K; ++c) {
        int k2 = a * a + b * b + c * c;
        if (k2 == 0 || k2 > K * K) continue;
        if (a > 0 || (a == 0 && b > 0) || (a == 0 && b == 0 && c > 0))
          ks.push_back({a, b, c});
      }
  std::sort(ks.begin(), ks.end(), [](const auto& p, const auto& q) {
    int p2 = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
    int q2 = q[0] * q[0] + q[1] * q[1] + q[2] * q[2];
    if (p2 != q2) return p2 < q2;
    return p < q;
  });

  Basis basis;
  basis.domain = domain;
  basis.K = K;
  const double N = std::sqrt(2.0 / (domain.L * domain.L * domain.L));

  for (const auto& k : ks) {
    // Deterministic exact-integer polarization pair: cross k with the unit
    // axis of its smallest-magnitude component, then cross again.
    int axis = 0;
    for (int c = 1; c < 3; ++c)
      if (std::abs(k[c]) < std::abs(k[axis])) axis = c;
    std::array<int, 3> e_axis{0, 0, 0};
    e_axis[axis] = 1;
    std::array<long, 3> a1 = icross(k, e_axis);
    std::array<long, 3> a2 = icross(k, narrow(a1));
    for (const auto& a : {a1, a2})
      for (Phase ph : {Phase::cosine, Phase::sine}) {
        BasisElement m;
        m.k = k;
        m.pol_int = narrow(a);
        m.pol = normalized(a);
        m.phase = ph;
        m.norm_factor = N;
        basis.modes.push_back(m);
      }
  }

  // Trig tables for grid evaluation: cos/sin(2 pi m / M).
  basis.cos_tab.resize(domain.M);
  basis.sin_tab.resize(domain.M);
  for (int m = 0; m < domain.M; ++m) {
    basis.cos_tab[m] = std::cos(kTwoPi * m / domain.M);
    basis.sin_tab[m] = std::sin(kTwoPi * m / domain.M);
  }

  // Per-mode companions: curl waves and deformation data.
  const double lam = kTwoPi / domain.L;
  for (const auto& m : basis.modes) {
    double kk = std::sqrt(double(m.k[0]) * m.k[0] + double(m.k[1]) * m.k[1] +
                          double(m.k[2]) * m.k[2]);
    std::array<long, 3> kxe = icross(m.k, m.pol_int);
    Wave cw;
    cw.k = m.k;
    cw.pol = normalized(kxe);
    if (m.phase == Phase::cosine) {
      // curl(N e cos) = N lam (k x e) (-sin)
      cw.trig = Phase::sine;
      cw.amp = -m.norm_factor * lam * kk;
    } else {
      cw.trig = Phase::cosine;
      cw.amp = m.norm_factor * lam * kk;
    }
    basis.curl_waves.push_back(cw);

    // d(mode) = amp * Sym(e (x) k) * trig', with Sym = (e k^T + k e^T)/2.
    basis.deform_amp.push_back(m.phase == Phase::cosine ? -m.norm_factor * lam
                                                        : m.norm_factor * lam);
    Vec3 e = m.pol;
    Vec3 kv{double(m.k[0]), double(m.k[1]), double(m.k[2])};
    basis.deform_sym.push_back({e.x * kv.x, e.y * kv.y, e.z * kv.z,
                                0.5 * (e.x * kv.y + e.y * kv.x),
                                0.5 * (e.x * kv.z + e.z * kv.x),
                                0.5 * (e.y * kv.z + e.z * kv.y)});
  }
  return basis;
}

GridField synthesize(const Basis& basis, const Eigen::VectorXd& coeff) {
  if (coeff.size() != basis.n())
    throw ConfigError("synthesize: coefficient vector size " + std::to_string(coeff.size()) +
                      " does not match basis size " + std::to_string(basis.n()));
  const int M = basis.domain.M;
  GridField out(basis.domain, 3);
  const std::size_t plane = basis.domain.samples();
  for (int mi = 0; mi < basis.n(); ++mi) {
    const BasisElement& m = basis.modes[mi];
    const double c = coeff[mi] * m.norm_factor;
    const double px = c * m.pol.x, py = c * m.pol.y, pz = c * m.pol.z;
    const std::vector<double>& tab = (m.phase == Phase::cosine) ? basis.cos_tab : basis.sin_tab;
    const int k0 = ((m.k[0] % M) + M) % M, k1 = ((m.k[1] % M) + M) % M,
              k2 = ((m.k[2] % M) + M) % M;
    std::size_t q = 0;
    for (int i = 0; i < M; ++i) {
      int ti = (k0 * i) % M;
      for (int j = 0; j < M; ++j) {
        int tij = (ti + k1 * j) % M;
        int t = tij;
        for (int l = 0; l < M; ++l, ++q) {
          double val = tab[t];
          out.v[q] += px * val;
          out.v[plane + q] += py * val;
          out.v[2 * plane + q] += pz * val;
          t += k2;
          if (t >= M) t -= M;
        }
      }
    }
  }
  return out;
}

Eigen::VectorXd project_L2(const Basis& basis, const GridField& field) {
  if (field.ncomp != 3 || !(field.domain == basis.domain))
    throw ConfigError("project_L2: field must be vector-valued on the basis domain");
  const int M = basis.domain.M;
  const double w = basis.domain.cell_volume();
  const std::size_t plane = basis.domain.samples();
  Eigen::VectorXd out(basis.n());
  for (int mi = 0; mi < basis.n(); ++mi) {
    const BasisElement& m = basis.modes[mi];
    const std::vector<double>& tab = (m.phase == Phase::cosine) ? basis.cos_tab : basis.sin_tab;
    const int k0 = ((m.k[0] % M) + M) % M, k1 = ((m.k[1] % M) + M) % M,
              k2 = ((m.k[2] % M) + M) % M;
    KahanSum acc;
    std::size_t q = 0;
    for (int i = 0; i < M; ++i) {
      int ti = (k0 * i) % M;
      for (int j = 0; j < M; ++j) {
        int t = (ti + k1 * j) % M;
        for (int l = 0; l < M; ++l, ++q) {
          double proj = m.pol.x * field.v[q] + m.pol.y * field.v[plane + q] +
                        m.pol.z * field.v[2 * plane + q];
          acc.add(proj * tab[t]);
          t += k2;
          if (t >= M) t -= M;
        }
      }
    }
    out[mi] = acc.value() * m.norm_factor * w;
  }
  return out;
}

BasisElement curl_of(const TorusDomain& domain, const BasisElement& elem) {
  const double lam = kTwoPi / domain.L;
  double kk = std::sqrt(double(elem.k[0]) * elem.k[0] + double(elem.k[1]) * elem.k[1] +
                        double(elem.k[2]) * elem.k[2]);
  BasisElement out;
  out.k = elem.k;
  out.norm_factor = elem.norm_factor * lam * kk;
  std::array<long, 3> kxe = icross(elem.k, elem.pol_int);
  if (elem.phase == Phase::cosine) {
    // curl(e cos) = lam (k x e)(-sin): fold the sign into the polarization.
    out.phase = Phase::sine;
    out.pol_int = {-narrow(kxe)[0], -narrow(kxe)[1], -narrow(kxe)[2]};
    out.pol = normalized({-kxe[0], -kxe[1], -kxe[2]});
  } else {
    out.phase = Phase::cosine;
    out.pol_int = narrow(kxe);
    out.pol = normalized(kxe);
  }
  return out;
}

Vec3 eval_element(const TorusDomain& domain, const BasisElement& elem, const Vec3& x) {
  double theta = kTwoPi * (elem.k[0] * x.x + elem.k[1] * x.y + elem.k[2] * x.z) / domain.L;
  double val = (elem.phase == Phase::cosine) ? std::cos(theta) : std::sin(theta);
  return elem.pol * (elem.norm_factor * val);
}

Vec3 eval_wave(const TorusDomain& domain, const Wave& w, const Vec3& x) {
  double theta = kTwoPi * (w.k[0] * x.x + w.k[1] * x.y + w.k[2] * x.z) / domain.L;
  double val = (w.trig == Phase::cosine) ? std::cos(theta) : std::sin(theta);
  return w.pol * (w.amp * val);
}

Vec3 eval_field(const Basis& basis, const Eigen::VectorXd& coeff, const Vec3& x) {
  Vec3 out;
  for (int i = 0; i < basis.n(); ++i) {
    const BasisElement& m = basis.modes[i];
    double theta = kTwoPi * (m.k[0] * x.x + m.k[1] * x.y + m.k[2] * x.z) / basis.domain.L;
    double val = (m.phase == Phase::cosine) ? std::cos(theta) : std::sin(theta);
    out += m.pol * (coeff[i] * m.norm_factor * val);
  }
  return out;
}

GridField spectral_derivative(const GridField& f, int axis) {
  const int M = f.domain.M;
  // Cardinal trigonometric differentiation stencil on the periodic grid.
  std::vector<double> s(M, 0.0);
  for (int d = 1; d < M; ++d) {
    double arg = 3.14159265358979323846264338327950288 * d / M;
    double core = (M % 2 == 0) ? 1.0 / std::tan(arg) : 1.0 / std::sin(arg);
    s[d] = 0.5 * ((d % 2 == 0) ? 1.0 : -1.0) * core * (kTwoPi / f.domain.L);
  }
  GridField out(f.domain, f.ncomp);
  const std::size_t plane = f.domain.samples();
  for (int c = 0; c < f.ncomp; ++c) {
    const double* in = f.v.data() + c * plane;
    double* ov = out.v.data() + c * plane;
    for (int i = 0; i < M; ++i)
      for (int j = 0; j < M; ++j)
        for (int l = 0; l < M; ++l) {
          double acc = 0;
          for (int d = 1; d < M; ++d) {
            int ii = i, jj = j, ll = l;
            if (axis == 0) ii = (i - d + M) % M;
            if (axis == 1) jj = (j - d + M) % M;
            if (axis == 2) ll = (l - d + M) % M;
            acc += s[d] * in[(static_cast<std::size_t>(ii) * M + jj) * M + ll];
          }
          ov[(static_cast<std::size_t>(i) * M + j) * M + l] = acc;
        }
  }
  return out;
}

GridField spectral_divergence(const GridField& f) {
  if (f.ncomp != 3) throw ConfigError("spectral_divergence: vector field required");
  const std::size_t plane = f.domain.samples();
  GridField out(f.domain, 1);
  for (int axis = 0; axis < 3; ++axis) {
    GridField comp(f.domain, 1);
    std::copy(f.v.begin() + axis * plane, f.v.begin() + (axis + 1) * plane, comp.v.begin());
    GridField d = spectral_derivative(comp, axis);
    for (std::size_t q = 0; q < plane; ++q) out.v[q] += d.v[q];
  }
  return out;
}

GridField spectral_curl(const GridField& f) {
  if (f.ncomp != 3) throw ConfigError("spectral_curl: vector field required");
  const std::size_t plane = f.domain.samples();
  auto comp = [&](int c) {
    GridField g(f.domain, 1);
    std::copy(f.v.begin() + c * plane, f.v.begin() + (c + 1) * plane, g.v.begin());
    return g;
  };
  GridField d2_1 = spectral_derivative(comp(2), 1);  // d f3 / d x2
  GridField d1_2 = spectral_derivative(comp(1), 2);
  GridField d0_2 = spectral_derivative(comp(0), 2);
  GridField d2_0 = spectral_derivative(comp(2), 0);
  GridField d1_0 = spectral_derivative(comp(1), 0);
  GridField d0_1 = spectral_derivative(comp(0), 1);
  GridField out(f.domain, 3);
  for (std::size_t q = 0; q < plane; ++q) {
    out.v[q] = d2_1.v[q] - d1_2.v[q];
    out.v[plane + q] = d0_2.v[q] - d2_0.v[q];
    out.v[2 * plane + q] = d1_0.v[q] - d0_1.v[q];
  }
  return out;
}

SymTensorField deformation_tensor(const GridField& u) {
  if (u.ncomp != 3) throw ConfigError("deformation_tensor: vector field required");
  const std::size_t plane = u.domain.samples();
  auto comp = [&](int c) {
    GridField g(u.domain, 1);
    std::copy(u.v.begin() + c * plane, u.v.begin() + (c + 1) * plane, g.v.begin());
    return g;
  };
  // grad[c][axis]
  std::array<std::array<std::vector<double>, 3>, 3> grad;
  for (int c = 0; c < 3; ++c) {
    GridField gc = comp(c);
    for (int a = 0; a < 3; ++a) grad[c][a] = spectral_derivative(gc, a).v;
  }
  SymTensorField out;
  out.domain = u.domain;
  for (auto& cv : out.comp) cv.assign(plane, 0.0);
  for (std::size_t q = 0; q < plane; ++q) {
    out.comp[0][q] = grad[0][0][q];
    out.comp[1][q] = grad[1][1][q];
    out.comp[2][q] = grad[2][2][q];
    out.comp[3][q] = 0.5 * (grad[0][1][q] + grad[1][0][q]);
    out.comp[4][q] = 0.5 * (grad[0][2][q] + grad[2][0][q]);
    out.comp[5][q] = 0.5 * (grad[1][2][q] + grad[2][1][q]);
  }
  return out;
}

double inner_product(const GridField& a, const GridField& b, const GridField* weight) {
  if (!(a.domain == b.domain) || a.ncomp != b.ncomp)
    throw ConfigError("inner_product: mismatched fields");
  if (weight && (!(weight->domain == a.domain) || weight->ncomp != 1))
    throw ConfigError("inner_product: weight must be a scalar field on the same domain");
  const std::size_t plane = a.domain.samples();
  KahanSum acc;
  for (std::size_t q = 0; q < plane; ++q) {
    double s = 0;
    for (int c = 0; c < a.ncomp; ++c) s += a.v[c * plane + q] * b.v[c * plane + q];
    if (weight) s *= weight->v[q];
    acc.add(s);
  }
  return acc.value() * a.domain.cell_volume();
}

double l2_norm(const GridField& f) { return std::sqrt(std::max(0.0, inner_product(f, f))); }

}  // namespace hallmhd
