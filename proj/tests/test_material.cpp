// Material-law unit tests: pointwise oracle evaluation, exact range
// computation on the certified interval, positivity rejection, and the
// regularized clamp (constant above the clamp point, zero deviation on the
// certified range, sampled at 10^4 points).

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hallmhd/material.hpp"

using namespace hallmhd;

TEST_CASE("pointwise evaluation against a direct polynomial oracle") {
  MaterialLaw mu = make_law(LawKind::viscosity, "affine", 0.3, 0.2, 0.0, 0.5, 2.0);
  // Worked example: mu(xi) = 0.3 + 0.2 xi at xi = 1.5 -> 0.6.
  CHECK(mu.eval(1.5) == doctest::Approx(0.6).epsilon(1e-15));
  for (double xi : {0.5, 0.75, 1.0, 1.9, 2.0})
    CHECK(mu.eval(xi) == doctest::Approx(0.3 + 0.2 * xi).epsilon(1e-15));

  MaterialLaw q = make_law(LawKind::conductivity, "quadratic", 1.0, -0.5, 0.25, 0.5, 2.0);
  for (double xi : {0.5, 1.0, 1.5, 2.0})
    CHECK(q.eval(xi) == doctest::Approx(1.0 - 0.5 * xi + 0.25 * xi * xi).epsilon(1e-15));

  // Out-of-certified-range densities are rejected.
  CHECK_THROWS_AS(mu.eval(0.4), NumericalError);
  CHECK_THROWS_AS(mu.eval(2.5), NumericalError);
}

TEST_CASE("value range on the certified interval (endpoint and vertex cases)") {
  // Affine increasing: range is [law(lo), law(hi)].
  MaterialLaw mu = make_law(LawKind::viscosity, "affine", 0.3, 0.2, 0.0, 0.5, 2.0);
  CHECK(mu.value_lo == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(mu.value_hi == doctest::Approx(0.7).epsilon(1e-15));

  // Quadratic with interior vertex: 1 - x + 0.5 x^2 has minimum at x=1,
  // value 0.5; on [0.5, 2.0] the maximum is at x=2 (value 1).
  MaterialLaw q = make_law(LawKind::conductivity, "quadratic", 1.0, -1.0, 0.5, 0.5, 2.0);
  CHECK(q.value_lo == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(q.value_hi == doctest::Approx(1.0).epsilon(1e-14));

  // Laws that lose positivity on the certified range are rejected.
  CHECK_THROWS_AS(make_law(LawKind::viscosity, "affine", 0.1, -0.2, 0.0, 0.5, 2.0), ConfigError);
  CHECK_THROWS_AS(make_law(LawKind::viscosity, "constant", -1.0, 0.0, 0.0, 0.5, 2.0), ConfigError);
  CHECK_THROWS_AS(make_law(LawKind::viscosity, "cubic", 1.0, 0.0, 0.0, 0.5, 2.0), ConfigError);
}

TEST_CASE("regularization: constant beyond the clamp, zero deviation inside") {
  MaterialLaw mu = make_law(LawKind::viscosity, "affine", 0.3, 0.2, 0.0, 0.5, 2.0);
  MaterialLaw reg = regularize_law(mu, 1e-3);

  // Constant for xi >= clamp point; still positive; lower bound preserved.
  CHECK(std::isfinite(reg.clamp_at));
  CHECK(reg.eval(reg.clamp_at + 1.0) == doctest::Approx(reg.eval(reg.clamp_at)).epsilon(1e-15));
  CHECK(reg.eval(reg.clamp_at + 100.0) == doctest::Approx(reg.eval(reg.clamp_at)).epsilon(1e-15));
  CHECK(reg.value_lo > 0.0);

  // Sampled sup-deviation on [rho_lo, C0] with 1e4 samples: exactly zero here
  // because the clamp sits at the top of the certified range.
  double dev = 0.0;
  for (int s = 0; s <= 10000; ++s) {
    double xi = 0.5 + (2.0 - 0.5) * s / 10000.0;
    dev = std::max(dev, std::abs(reg.eval(xi) - mu.eval(xi)));
  }
  CHECK(dev < 1e-3);
  CHECK(dev == 0.0);

  // A constant law regularizes to itself.
  MaterialLaw c = make_law(LawKind::conductivity, "constant", 2.0, 0.0, 0.0, 0.5, 2.0);
  MaterialLaw creg = regularize_law(c, 1e-6);
  for (double xi : {0.5, 1.0, 2.0}) CHECK(creg.eval(xi) == c.eval(xi));
}

TEST_CASE("grid evaluation matches the scalar path sample by sample") {
  TorusDomain dom;
  dom.M = 8;
  MaterialLaw mu = make_law(LawKind::viscosity, "quadratic", 0.5, 0.1, 0.05, 0.8, 3.0);
  GridField rho(dom, 1);
  for (std::size_t q = 0; q < rho.v.size(); ++q)
    rho.v[q] = 0.8 + 2.2 * double(q % 97) / 96.0;
  GridField mug = eval_law(mu, rho);
  for (std::size_t q = 0; q < rho.v.size(); ++q)
    CHECK(mug.v[q] == mu.eval(rho.v[q]));

  GridField bad(dom, 1);
  bad.v.assign(bad.v.size(), 0.1);  // below certified range
  CHECK_THROWS_AS(eval_law(mu, bad), NumericalError);
}
