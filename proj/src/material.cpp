// Density-dependent material laws and their clamp regularization.

#include "hallmhd/material.hpp"

#include <algorithm>
#include <cmath>

namespace hallmhd {

namespace {
// Relative slack for range checks: rounding in transport/mollification may
// graze the certified endpoints but never cross them materially.
double slack(const MaterialLaw& law) {
  return 1e-12 * std::max(1.0, std::max(std::abs(law.domain_lo), std::abs(law.domain_hi)));
}
}  // namespace

double MaterialLaw::eval(double xi) const {
  if (xi < domain_lo - 1e-12 * std::max(1.0, std::abs(domain_lo)))
    throw NumericalError("material law: density " + std::to_string(xi) +
                         " below certified range [" + std::to_string(domain_lo) + ", " +
                         std::to_string(domain_hi) + "]");
  double x = xi;
  if (x >= clamp_at) {
    x = clamp_at;  // regularized: constant above the clamp point
  } else if (x > domain_hi + 1e-12 * std::max(1.0, std::abs(domain_hi))) {
    throw NumericalError("material law: density " + std::to_string(xi) +
                         " above certified range [" + std::to_string(domain_lo) + ", " +
                         std::to_string(domain_hi) + "] and law is not regularized");
  }
  return c0 + x * (c1 + x * c2);
}

MaterialLaw make_law(LawKind kind, const std::string& shape, double c0, double c1, double c2,
                     double rho_lo, double rho_hi) {
  if (!(rho_lo <= rho_hi))
    throw ConfigError("make_law: empty certified density range");
  MaterialLaw law;
  law.kind = kind;
  if (shape == "constant") {
    law.c0 = c0;
  } else if (shape == "affine") {
    law.c0 = c0;
    law.c1 = c1;
  } else if (shape == "quadratic") {
    law.c0 = c0;
    law.c1 = c1;
    law.c2 = c2;
  } else {
    throw ConfigError("make_law: unknown law shape '" + shape +
                      "' (expected constant | affine | quadratic)");
  }
  law.domain_lo = rho_lo;
  law.domain_hi = rho_hi;

  // Exact polynomial range on [rho_lo, rho_hi]: endpoints plus interior vertex.
  auto val = [&](double x) { return law.c0 + x * (law.c1 + x * law.c2); };
  double lo = std::min(val(rho_lo), val(rho_hi));
  double hi = std::max(val(rho_lo), val(rho_hi));
  if (law.c2 != 0.0) {
    double xv = -law.c1 / (2.0 * law.c2);
    if (xv > rho_lo && xv < rho_hi) {
      lo = std::min(lo, val(xv));
      hi = std::max(hi, val(xv));
    }
  }
  law.value_lo = lo;
  law.value_hi = hi;
  if (!(lo > 0.0))
    throw ConfigError("make_law: law is not positive on the certified density range (min value " +
                      std::to_string(lo) + ")");
  return law;
}

MaterialLaw regularize_law(const MaterialLaw& law, double eps) {
  if (!(eps > 0.0)) throw ConfigError("regularize_law: eps must be positive");
  MaterialLaw out = law;
  // Clamp at the top of the certified range: the law is untouched on
  // [domain_lo, domain_hi] (deviation 0 < eps) and constant above.
  out.clamp_at = law.domain_hi;
  return out;
}

GridField eval_law(const MaterialLaw& law, const GridField& rho) {
  if (rho.ncomp != 1) throw ConfigError("eval_law: density must be a scalar field");
  (void)slack(law);
  GridField out(rho.domain, 1);
  for (std::size_t q = 0; q < rho.v.size(); ++q) out.v[q] = law.eval(rho.v[q]);
  return out;
}

}  // namespace hallmhd
