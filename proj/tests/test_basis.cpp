// Spectral basis unit tests.
//
// Oracles used here are independent of the library implementation: mode
// counting by brute-force lattice enumeration, projections checked against
// direct high-resolution quadrature with std::cos/std::sin, curls checked
// against a centered finite-difference oracle with measured convergence
// order, and frozen closed-form constants.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "hallmhd/basis.hpp"

using namespace hallmhd;

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

// Brute-force half-space wavevector count: first nonzero component positive,
// 0 < |k|^2 <= K^2.  Four modes (2 polarizations x 2 phases) per wavevector.
int oracle_mode_count(int K) {
  int n = 0;
  for (int a = -K; a <= K; ++a)
    for (int b = -K; b <= K; ++b)
      for (int c = -K; c <= K; ++c) {
        int k2 = a * a + b * b + c * c;
        if (k2 == 0 || k2 > K * K) continue;
        if (a > 0 || (a == 0 && b > 0) || (a == 0 && b == 0 && c > 0)) ++n;
      }
  return 4 * n;
}

// Direct quadrature of f.g over the box at resolution Mq with plain
// std::cos/std::sin evaluation (no phase tables, no compensation).
double oracle_mode_inner(const TorusDomain& dom, int Mq, const BasisElement& ea,
                         const BasisElement& eb) {
  double w = (dom.L / Mq) * (dom.L / Mq) * (dom.L / Mq);
  long double acc = 0.0L;
  for (int i = 0; i < Mq; ++i)
    for (int j = 0; j < Mq; ++j)
      for (int l = 0; l < Mq; ++l) {
        Vec3 x{dom.L * i / Mq, dom.L * j / Mq, dom.L * l / Mq};
        Vec3 fa = eval_element(dom, ea, x);
        Vec3 fb = eval_element(dom, eb, x);
        acc += static_cast<long double>(dot(fa, fb));
      }
  return static_cast<double>(acc) * w;
}

// Centered finite-difference curl of a sampled vector field.
GridField fd_curl(const GridField& f) {
  const int M = f.domain.M;
  const double h = f.domain.dx();
  GridField out(f.domain, 3);
  auto wrap = [M](int i) { return (i % M + M) % M; };
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j)
      for (int l = 0; l < M; ++l) {
        auto d = [&](int c, int axis) {
          int ip = i, jp = j, lp = l, im = i, jm = j, lm = l;
          if (axis == 0) { ip = wrap(i + 1); im = wrap(i - 1); }
          if (axis == 1) { jp = wrap(j + 1); jm = wrap(j - 1); }
          if (axis == 2) { lp = wrap(l + 1); lm = wrap(l - 1); }
          return (f.at(c, ip, jp, lp) - f.at(c, im, jm, lm)) / (2 * h);
        };
        out.at(0, i, j, l) = d(2, 1) - d(1, 2);
        out.at(1, i, j, l) = d(0, 2) - d(2, 0);
        out.at(2, i, j, l) = d(1, 0) - d(0, 1);
      }
  return out;
}

double max_abs_diff(const GridField& a, const GridField& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.v.size(); ++i) m = std::max(m, std::abs(a.v[i] - b.v[i]));
  return m;
}

}  // namespace

TEST_CASE("mode enumeration: counts, ordering, exact polarizations") {
  TorusDomain dom;  // L = 2*pi, M = 16
  for (int K : {1, 2, 3}) {
    Basis b = enumerate_modes(dom, K);
    CHECK(b.n() == oracle_mode_count(K));
  }
  // Frozen counts (independent lattice oracle, cross-checked analytically).
  CHECK(oracle_mode_count(1) == 12);
  CHECK(oracle_mode_count(2) == 64);
  CHECK(oracle_mode_count(3) == 244);

  Basis b1 = enumerate_modes(dom, 1);
  REQUIRE(b1.n() == 12);
  // K=1 wavevector set and deterministic ordering: (|k|^2, lex k, pol, phase).
  std::set<std::array<int, 3>> ks;
  for (const auto& m : b1.modes) ks.insert(m.k);
  CHECK(ks == std::set<std::array<int, 3>>{{{0, 0, 1}}, {{0, 1, 0}}, {{1, 0, 0}}});
  CHECK(b1.modes[0].k == std::array<int, 3>{0, 0, 1});
  CHECK(b1.modes[0].phase == Phase::cosine);
  CHECK(b1.modes[1].phase == Phase::sine);
  CHECK(b1.modes[4].k == std::array<int, 3>{0, 1, 0});
  CHECK(b1.modes[8].k == std::array<int, 3>{1, 0, 0});

  Basis b2 = enumerate_modes(dom, 2);
  for (int i = 0; i + 1 < b2.n(); ++i) {
    auto k2 = [](const std::array<int, 3>& k) { return k[0] * k[0] + k[1] * k[1] + k[2] * k[2]; };
    CHECK(k2(b2.modes[i].k) <= k2(b2.modes[i + 1].k));
  }
  for (const auto& m : b2.modes) {
    // Exact integer orthogonality and unit float polarization.
    long pk = static_cast<long>(m.pol_int[0]) * m.k[0] + static_cast<long>(m.pol_int[1]) * m.k[1] +
              static_cast<long>(m.pol_int[2]) * m.k[2];
    CHECK(pk == 0);
    CHECK(std::abs(dot(m.pol, Vec3{double(m.k[0]), double(m.k[1]), double(m.k[2])})) <= 1e-15);
    CHECK(std::abs(norm(m.pol) - 1.0) <= 1e-15);
    CHECK(m.norm_factor == doctest::Approx(std::sqrt(2.0 / (dom.L * dom.L * dom.L))).epsilon(1e-15));
  }

  // Determinism: two enumerations are bitwise identical.
  Basis b2b = enumerate_modes(dom, 2);
  REQUIRE(b2.n() == b2b.n());
  for (int i = 0; i < b2.n(); ++i) {
    CHECK(b2.modes[i].k == b2b.modes[i].k);
    CHECK(b2.modes[i].pol.x == b2b.modes[i].pol.x);
    CHECK(b2.modes[i].pol.y == b2b.modes[i].pol.y);
    CHECK(b2.modes[i].pol.z == b2b.modes[i].pol.z);
  }

  // Anti-aliasing margin: 4K > M must be rejected.
  TorusDomain small;
  small.M = 7;
  CHECK_THROWS_AS(enumerate_modes(small, 2), ConfigError);
  CHECK_THROWS_AS(enumerate_modes(dom, 0), ConfigError);
}

TEST_CASE("orthonormality under trapezoidal quadrature") {
  TorusDomain dom;
  Basis b = enumerate_modes(dom, 2);
  const int n = b.n();
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd ei = Eigen::VectorXd::Zero(n);
    ei[i] = 1.0;
    GridField fi = synthesize(b, ei);
    for (int j = i; j < n; ++j) {
      Eigen::VectorXd ej = Eigen::VectorXd::Zero(n);
      ej[j] = 1.0;
      GridField fj = synthesize(b, ej);
      double ip = inner_product(fi, fj);
      double expect = (i == j) ? 1.0 : 0.0;
      CHECK(std::abs(ip - expect) <= 1e-12);
    }
  }
}

TEST_CASE("synthesize/project round trip and independent projection oracle") {
  TorusDomain dom;
  Basis b = enumerate_modes(dom, 2);
  std::mt19937_64 rng(20260823);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::VectorXd c(b.n());
  for (int i = 0; i < b.n(); ++i) c[i] = g(rng);

  GridField u = synthesize(b, c);
  Eigen::VectorXd c2 = project_L2(b, u);
  CHECK((c2 - c).cwiseAbs().maxCoeff() <= 1e-12);

  // Determinism: resynthesis is bitwise identical.
  GridField u2 = synthesize(b, c);
  CHECK(u.v == u2.v);

  // Projection of a manufactured off-library field: u = (sin x2, 0, 0).
  // The only nonzero coefficient belongs to the k=(0,1,0) sine mode whose
  // polarization has a nonzero first component; magnitude sqrt(L^3/2).
  GridField man(dom, 3);
  for (int i = 0; i < dom.M; ++i)
    for (int j = 0; j < dom.M; ++j)
      for (int l = 0; l < dom.M; ++l)
        man.at(0, i, j, l) = std::sin(2 * kPi * j / dom.M);
  Eigen::VectorXd cm = project_L2(b, man);
  double target = std::sqrt(dom.L * dom.L * dom.L / 2.0);
  int hits = 0;
  for (int i = 0; i < b.n(); ++i) {
    if (std::abs(cm[i]) < 1e-12) continue;
    ++hits;
    CHECK(b.modes[i].k == std::array<int, 3>{0, 1, 0});
    CHECK(b.modes[i].phase == Phase::sine);
    CHECK(std::abs(std::abs(cm[i]) - target) <= 1e-10);
    // Cross-check against direct quadrature at 2x resolution.
    double ip = 0;
    {
      int Mq = 2 * dom.M;
      double w = std::pow(dom.L / Mq, 3);
      long double acc = 0.0L;
      for (int ii = 0; ii < Mq; ++ii)
        for (int jj = 0; jj < Mq; ++jj)
          for (int ll = 0; ll < Mq; ++ll) {
            Vec3 x{dom.L * ii / Mq, dom.L * jj / Mq, dom.L * ll / Mq};
            Vec3 fb = eval_element(dom, b.modes[i], x);
            acc += std::sin(2 * kPi * x.y / dom.L) * fb.x;
          }
      ip = static_cast<double>(acc) * w;
    }
    CHECK(std::abs(cm[i] - ip) <= 1e-9);
  }
  CHECK(hits == 1);
}

TEST_CASE("curl: exactness, double curl scaling, finite-difference oracle") {
  TorusDomain dom;
  Basis b = enumerate_modes(dom, 2);

  // Worked example: element (0, sin x1, 0) has curl (0, 0, cos x1).
  BasisElement e;
  e.k = {1, 0, 0};
  e.pol = {0, 1, 0};
  e.pol_int = {0, 1, 0};
  e.phase = Phase::sine;
  e.norm_factor = 1.0;
  BasisElement ce = curl_of(dom, e);
  for (double x1 : {0.1, 1.7, 4.4}) {
    Vec3 v = eval_element(dom, ce, Vec3{x1, 0.3, 2.2});
    CHECK(std::abs(v.x) <= 1e-15);
    CHECK(std::abs(v.y) <= 1e-15);
    CHECK(v.z == doctest::Approx(std::cos(2 * kPi * x1 / dom.L)).epsilon(1e-14));
  }

  for (int i : {0, 5, 17, 40, 63}) {
    const BasisElement& m = b.modes[i];
    // curl^2 = (2 pi |k| / L)^2 * identity on the span.
    BasisElement c1 = curl_of(dom, m);
    BasisElement c2 = curl_of(dom, c1);
    double k2 = m.k[0] * m.k[0] + m.k[1] * m.k[1] + m.k[2] * m.k[2];
    double lam2 = std::pow(2 * kPi / dom.L, 2) * k2;
    for (const Vec3& x : {Vec3{0.2, 0.8, 5.1}, Vec3{3.3, 0.0, 1.0}}) {
      Vec3 a = eval_element(dom, c2, x);
      Vec3 expect = lam2 * eval_element(dom, m, x);
      CHECK(std::abs(a.x - expect.x) <= 1e-12 * lam2);
      CHECK(std::abs(a.y - expect.y) <= 1e-12 * lam2);
      CHECK(std::abs(a.z - expect.z) <= 1e-12 * lam2);
    }
    // Curl of a mode is orthogonal to k and the phase is swapped.
    CHECK(std::abs(dot(c1.pol, Vec3{double(m.k[0]), double(m.k[1]), double(m.k[2])})) <= 1e-15);
    CHECK(c1.phase != m.phase);
    CHECK(c1.norm_factor ==
          doctest::Approx(m.norm_factor * 2 * kPi * std::sqrt(k2) / dom.L).epsilon(1e-14));
  }

  // Finite-difference oracle with measured convergence order >= 1.9.
  int idx = -1;
  for (int i = 0; i < b.n(); ++i)
    if (b.modes[i].k == std::array<int, 3>{1, 1, 0} && b.modes[i].phase == Phase::cosine) {
      idx = i;
      break;
    }
  REQUIRE(idx >= 0);
  auto sample_elem = [&](const BasisElement& el, int M) {
    TorusDomain d2 = dom;
    d2.M = M;
    GridField f(d2, 3);
    for (int i = 0; i < M; ++i)
      for (int j = 0; j < M; ++j)
        for (int l = 0; l < M; ++l) {
          Vec3 v = eval_element(dom, el, Vec3{dom.L * i / M, dom.L * j / M, dom.L * l / M});
          f.at(0, i, j, l) = v.x;
          f.at(1, i, j, l) = v.y;
          f.at(2, i, j, l) = v.z;
        }
    return f;
  };
  BasisElement cm = curl_of(dom, b.modes[idx]);
  double err16 = max_abs_diff(fd_curl(sample_elem(b.modes[idx], 16)), sample_elem(cm, 16));
  double err32 = max_abs_diff(fd_curl(sample_elem(b.modes[idx], 32)), sample_elem(cm, 32));
  double order = std::log2(err16 / err32);
  CHECK(order >= 1.9);

  // Spectral curl agrees with the analytic curl to near machine precision.
  Eigen::VectorXd ei = Eigen::VectorXd::Zero(b.n());
  ei[idx] = 1.0;
  GridField grid_mode = synthesize(b, ei);
  GridField sc = spectral_curl(grid_mode);
  GridField analytic = sample_elem(cm, dom.M);
  CHECK(max_abs_diff(sc, analytic) <= 1e-12);
}

TEST_CASE("deformation tensor: worked example and trace-free property") {
  TorusDomain dom;
  // u = (sin x2, 0, 0): d12 = d21 = cos(x2)/2, all other entries 0.
  GridField u(dom, 3);
  for (int i = 0; i < dom.M; ++i)
    for (int j = 0; j < dom.M; ++j)
      for (int l = 0; l < dom.M; ++l)
        u.at(0, i, j, l) = std::sin(2 * kPi * j / dom.M);
  SymTensorField d = deformation_tensor(u);
  for (int i = 0; i < dom.M; ++i)
    for (int j = 0; j < dom.M; ++j)
      for (int l = 0; l < dom.M; ++l) {
        std::size_t q = u.idx(i, j, l);
        double c = 0.5 * std::cos(2 * kPi * j / dom.M);
        CHECK(std::abs(d.comp[3][q] - c) <= 1e-12);  // xy
        CHECK(std::abs(d.comp[0][q]) <= 1e-12);
        CHECK(std::abs(d.comp[1][q]) <= 1e-12);
        CHECK(std::abs(d.comp[2][q]) <= 1e-12);
        CHECK(std::abs(d.comp[4][q]) <= 1e-12);
        CHECK(std::abs(d.comp[5][q]) <= 1e-12);
      }

  // trace d(u) = div u <= 1e-10 for synthesized (divergence-free) fields.
  Basis b = enumerate_modes(dom, 2);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::VectorXd cvec(b.n());
  for (int i = 0; i < b.n(); ++i) cvec[i] = g(rng);
  GridField f = synthesize(b, cvec);
  SymTensorField df = deformation_tensor(f);
  double mtr = 0;
  for (std::size_t q = 0; q < dom.samples(); ++q)
    mtr = std::max(mtr, std::abs(df.comp[0][q] + df.comp[1][q] + df.comp[2][q]));
  CHECK(mtr <= 1e-10);

  // Discrete divergence residual of every synthesized mode.
  GridField dv = spectral_divergence(f);
  CHECK(l2_norm(dv) / l2_norm(f) <= 1e-12);
}

TEST_CASE("inner products: frozen constants and weighted-quadrature oracle") {
  TorusDomain dom;
  GridField u(dom, 3);
  for (int i = 0; i < dom.M; ++i)
    for (int j = 0; j < dom.M; ++j)
      for (int l = 0; l < dom.M; ++l)
        u.at(0, i, j, l) = std::sin(2 * kPi * j / dom.M);
  // <u,u> = integral of sin^2(x2) over the 2pi box = 4 pi^3.
  CHECK(inner_product(u, u) == doctest::Approx(124.02510672119926).epsilon(1e-12));

  // Weighted inner product with w = 2 + cos x1: analytic value 8 pi^3.
  GridField w(dom, 1);
  for (int i = 0; i < dom.M; ++i)
    for (int j = 0; j < dom.M; ++j)
      for (int l = 0; l < dom.M; ++l)
        w.at(0, i, j, l) = 2.0 + std::cos(2 * kPi * i / dom.M);
  double wip = inner_product(u, u, &w);
  CHECK(wip == doctest::Approx(248.05021344239853).epsilon(1e-12));
  // Independent oracle: direct evaluation at 2x resolution.
  {
    int Mq = 32;
    long double acc = 0.0L;
    for (int i = 0; i < Mq; ++i)
      for (int j = 0; j < Mq; ++j)
        for (int l = 0; l < Mq; ++l) {
          double s = std::sin(2 * kPi * j / Mq);
          acc += (2.0 + std::cos(2 * kPi * i / Mq)) * s * s;
        }
    double oracle = static_cast<double>(acc) * std::pow(dom.L / Mq, 3);
    CHECK(std::abs(wip - oracle) <= 1e-9);
  }

  // Spectral derivative exactness: d/dx1 cos x1 = -sin x1.
  GridField cgrid(dom, 1);
  for (int i = 0; i < dom.M; ++i)
    for (int j = 0; j < dom.M; ++j)
      for (int l = 0; l < dom.M; ++l)
        cgrid.at(0, i, j, l) = std::cos(2 * kPi * i / dom.M);
  GridField dgrid = spectral_derivative(cgrid, 0);
  double emax = 0;
  for (int i = 0; i < dom.M; ++i)
    emax = std::max(emax, std::abs(dgrid.at(0, i, 0, 0) + std::sin(2 * kPi * i / dom.M)));
  CHECK(emax <= 1e-12);

  // Size mismatches are rejected.
  Basis b = enumerate_modes(dom, 1);
  Eigen::VectorXd bad(5);
  bad.setZero();
  CHECK_THROWS_AS(synthesize(b, bad), ConfigError);
}
