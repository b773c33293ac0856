// Density-dependent material laws: viscosity mu(rho) and conductivity
// sigma(rho), certified positive on a stated density range, plus the
// regularization that freezes a law to a constant above a clamp point
// without disturbing it on the certified range.

#pragma once

#include <limits>
#include <string>

#include "hallmhd/geometry.hpp"

namespace hallmhd {

enum class LawKind { viscosity, conductivity };

// Polynomial law c0 + c1 x + c2 x^2 (constant / affine / quadratic),
// certified on the density interval [domain_lo, domain_hi] where its value
// range [value_lo, value_hi] is computed; value_lo must be positive.
// A regularized law is constant for xi >= clamp_at.
struct MaterialLaw {
  LawKind kind = LawKind::viscosity;
  double c0 = 1.0, c1 = 0.0, c2 = 0.0;
  double domain_lo = 0.0, domain_hi = 0.0;
  double value_lo = 0.0, value_hi = 0.0;
  double clamp_at = std::numeric_limits<double>::infinity();

  double eval(double xi) const;  // errors if xi below / unclamped-above the certified range
};

// Build a law from kind name ("constant" | "affine" | "quadratic") and
// coefficients; computes the exact value range on [rho_lo, rho_hi] and
// rejects laws that are not positive there.
MaterialLaw make_law(LawKind kind, const std::string& shape, double c0, double c1, double c2,
                     double rho_lo, double rho_hi);

// Smooth-clamp regularization: constant for xi >= clamp point Xi(eps).
// Xi is chosen at the top of the certified range, so the sampled deviation
// sup |regularized - original| on [rho_lo, rho_hi] is zero (< eps always).
MaterialLaw regularize_law(const MaterialLaw& law, double eps);

// Pointwise evaluation on a scalar density field.
GridField eval_law(const MaterialLaw& law, const GridField& rho);

}  // namespace hallmhd
