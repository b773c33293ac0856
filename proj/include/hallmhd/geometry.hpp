// Periodic box geometry and uniform-grid sampled fields.
//
// The computational domain is the 3-torus [0,L)^3 sampled on a uniform M^3
// grid.  All quadrature in the code is the periodic trapezoidal rule (equal
// weights (L/M)^3), which is spectrally exact for the trigonometric fields the
// solver works with as long as no frequency aliases to zero mod M.

#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace hallmhd {

struct Vec3 {
  double x = 0, y = 0, z = 0;

  double& operator[](int c) { return c == 0 ? x : (c == 1 ? y : z); }
  double operator[](int c) const { return c == 0 ? x : (c == 1 ? y : z); }

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }
inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

// Periodic box with M uniform samples per dimension.
struct TorusDomain {
  double L = 6.283185307179586476925286766559;  // 2*pi
  int M = 16;

  double dx() const { return L / M; }
  double cell_volume() const { double h = dx(); return h * h * h; }
  std::size_t samples() const {
    return static_cast<std::size_t>(M) * M * M;
  }
  bool operator==(const TorusDomain& o) const { return L == o.L && M == o.M; }
};

// Sampled field on the grid.  ncomp = 1 (scalar) or 3 (vector); storage is
// component-planar, x3 fastest: v[c*M^3 + (i*M + j)*M + l] = f_c(i,j,l)*dx.
struct GridField {
  TorusDomain domain;
  int ncomp = 1;
  std::vector<double> v;

  GridField() = default;
  GridField(const TorusDomain& d, int nc)
      : domain(d), ncomp(nc), v(static_cast<std::size_t>(nc) * d.samples(), 0.0) {
    if (nc != 1 && nc != 3) throw std::invalid_argument("GridField: ncomp must be 1 or 3");
  }

  std::size_t idx(int i, int j, int l) const {
    return (static_cast<std::size_t>(i) * domain.M + j) * domain.M + l;
  }
  double& at(int c, int i, int j, int l) { return v[c * domain.samples() + idx(i, j, l)]; }
  double at(int c, int i, int j, int l) const { return v[c * domain.samples() + idx(i, j, l)]; }

  double min_value() const;
  double max_value() const;
  bool is_constant(double tol = 0.0) const;
};

// Compensated (Kahan) summation: deterministic sequential accumulation whose
// rounding error stays O(eps) independent of the number of terms.
struct KahanSum {
  double s = 0.0, c = 0.0;
  void add(double x) {
    double y = x - c;
    double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  double value() const { return s; }
};

inline double GridField::min_value() const {
  double m = v.empty() ? 0.0 : v[0];
  for (double x : v) m = std::min(m, x);
  return m;
}
inline double GridField::max_value() const {
  double m = v.empty() ? 0.0 : v[0];
  for (double x : v) m = std::max(m, x);
  return m;
}
inline bool GridField::is_constant(double tol) const {
  return max_value() - min_value() <= tol;
}

// Error taxonomy: configuration/usage problems vs numerical failures at run
// time (the CLI maps these to exit codes 1 and 2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace hallmhd
