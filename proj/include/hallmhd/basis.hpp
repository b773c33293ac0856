// Divergence-free trigonometric basis on the periodic box.
//
// Each basis element is N * e * trig(2*pi k.x / L) with integer wavevector k,
// unit polarization e perpendicular to k (built from exact integer cross
// products, so e.k = 0 holds in integer arithmetic before normalization),
// trig in {cos, sin} and N = sqrt(2/L^3) making the family L2-orthonormal.
// Wavevectors run over the half space (first nonzero component positive) with
// 0 < |k|^2 <= K^2; the k = 0 mean modes are excluded.  Curls are exact:
// curl maps a mode to the same wavevector with rotated polarization, swapped
// phase and amplitude scale 2*pi*|k|/L, so curl^2 = (2*pi*|k|/L)^2 * id on
// the span.

#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <cstdint>
#include <vector>

#include "hallmhd/geometry.hpp"

namespace hallmhd {

enum class Phase { cosine, sine };

struct BasisElement {
  std::array<int, 3> k{};        // integer wavevector, units 2*pi/L
  Vec3 pol;                      // unit polarization, pol.k = 0
  std::array<int, 3> pol_int{};  // exact integer polarization before normalization
  Phase phase = Phase::cosine;
  double norm_factor = 0.0;      // L2 normalizer sqrt(2/L^3)
};

// A "wave": amp * pol * trig(2*pi k.x / L).  Modes, their curls and their
// gradients/deformations all reduce to this shape; signs live in amp.
struct Wave {
  std::array<int, 3> k{};
  Vec3 pol;
  Phase trig = Phase::cosine;
  double amp = 0.0;
};

struct Basis {
  TorusDomain domain;
  int K = 0;
  std::vector<BasisElement> modes;

  // Precomputed per-mode companions (same index as modes).
  std::vector<Wave> curl_waves;          // curl of each mode
  std::vector<double> deform_amp;        // signed deformation amplitude
  std::vector<std::array<double, 6>> deform_sym;  // Sym(e (x) k): xx,yy,zz,xy,xz,yz
  std::vector<double> cos_tab, sin_tab;  // cos/sin(2*pi m / M), m = 0..M-1

  int n() const { return static_cast<int>(modes.size()); }
  // Phase table index of wavevector k at grid node (i,j,l).
  int phase_index(const std::array<int, 3>& k, int i, int j, int l) const {
    int M = domain.M;
    long t = (static_cast<long>(k[0]) * i + static_cast<long>(k[1]) * j +
              static_cast<long>(k[2]) * l) % M;
    return static_cast<int>(t < 0 ? t + M : t);
  }
  double trig_at(Phase p, int tab_idx) const {
    return p == Phase::cosine ? cos_tab[tab_idx] : sin_tab[tab_idx];
  }
};

// All modes with 0 < |k|^2 <= K^2, ordered by (|k|^2, lexicographic k over the
// half space, polarization index, cosine before sine).  Errors if K < 1 or the
// anti-aliasing margin 4K <= M is violated.
Basis enumerate_modes(const TorusDomain& domain, int K);

// u(x) = sum_i coeff_i * mode_i(x) sampled on the grid (exact trigonometric
// synthesis through integer phase tables).
GridField synthesize(const Basis& basis, const Eigen::VectorXd& coeff);

// L2 projection coefficients <field, mode_i> by trapezoidal quadrature
// (spectrally exact for band-limited fields).
Eigen::VectorXd project_L2(const Basis& basis, const GridField& field);

// Exact curl of a basis element as a new element (norm_factor carries the
// 2*pi*|k|/L scale; sign is folded into the polarization).
BasisElement curl_of(const TorusDomain& domain, const BasisElement& elem);

// Evaluate one element / wave at an arbitrary (off-grid) point.
Vec3 eval_element(const TorusDomain& domain, const BasisElement& elem, const Vec3& x);
Vec3 eval_wave(const TorusDomain& domain, const Wave& w, const Vec3& x);

// Evaluate the synthesized field sum_i coeff_i mode_i at an off-grid point.
Vec3 eval_field(const Basis& basis, const Eigen::VectorXd& coeff, const Vec3& x);

// Symmetric gradient d(u) = (grad u + grad u^T)/2 sampled on the grid,
// computed by exact spectral differentiation.  Components xx,yy,zz,xy,xz,yz.
struct SymTensorField {
  TorusDomain domain;
  std::array<std::vector<double>, 6> comp;
};
SymTensorField deformation_tensor(const GridField& u);

// Weighted L2 inner product <a, b>_w = sum w(x) a(x).b(x) dx (weight optional).
double inner_product(const GridField& a, const GridField& b,
                     const GridField* weight = nullptr);

// Spectral derivative along one axis (0,1,2) of every component: exact for
// trigonometric interpolants with |freq| < M/2.
GridField spectral_derivative(const GridField& f, int axis);

// Pointwise divergence via spectral derivatives (vector input -> scalar).
GridField spectral_divergence(const GridField& f);

// Pointwise curl via spectral derivatives (vector -> vector).
GridField spectral_curl(const GridField& f);

// L2 norm sqrt(<f,f>).
double l2_norm(const GridField& f);

}  // namespace hallmhd
