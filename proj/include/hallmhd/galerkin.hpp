// Linearized Galerkin system over the divergence-free basis, and the adaptive
// embedded Runge-Kutta stepper that integrates it.
//
// Given a frozen background (density rho, advecting velocity u_bar, magnetic
// field B_bar) and material laws, the momentum and induction equations reduce
// to the linear ODE system
//
//   M(rho) alpha' = -A^T alpha + C^T beta
//          beta'  = -D^T beta  + E^T alpha
//
// with  M_ij = <rho Theta_i, Theta_j>                    (mass, SPD),
//       A    = skew(advection) + viscous                 (viscous part sym.),
//       C_ij = <(curl Gamma_i) x B_bar, Theta_j>         (Lorentz force),
//       D    = Hall (exactly skew, zero diagonal) + resistive (symmetric),
//       E_ij = -<(B_bar x Theta_i), curl Gamma_j>        (induced emf),
//
// where Theta/Gamma are the velocity/magnetic basis modes.  By the cyclic
// triple-product identity E = -C^T holds entry for entry, so the coupling
// terms cancel in the energy balance; the advection skew-symmetrization and
// the Hall skewness make the energy identity
//
//   d/dt (kinetic + magnetic) = -(viscous + resistive dissipation)
//
// exact for the semi-discrete system.  Dissipation accumulators are carried
// in the integrated state so the ledger shares the stepper's error control.
//
// Assembly cost is O(n^2) after a separable partial Fourier transform of the
// twelve scalar weight fields: every matrix entry is a short combination of
// transform bins at the sum and difference wavevectors of the mode pair.

#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "hallmhd/basis.hpp"
#include "hallmhd/geometry.hpp"
#include "hallmhd/material.hpp"

namespace hallmhd {

// Physical coefficients entering the linear system.
struct TransportCoefficients {
  MaterialLaw mu;      // viscosity law mu(rho)
  MaterialLaw sigma;   // conductivity law sigma(rho)
  double hall = 0.0;   // Hall coefficient h
};

struct AssembledSystem {
  const Basis* basis = nullptr;

  Eigen::MatrixXd mass;           // M_ij, symmetric positive definite
  Eigen::MatrixXd advect;         // A = skew advection + symmetric viscous
  Eigen::MatrixXd lorentz;        // C
  Eigen::MatrixXd hall_ohm;       // D = exactly-skew Hall + symmetric resistive
  Eigen::MatrixXd emf;            // E (= -C^T up to rounding)
  Eigen::MatrixXd viscous_sym;    // symmetric part of A (dissipation form)
  Eigen::MatrixXd resistive_sym;  // symmetric part of D (dissipation form)

  Eigen::LLT<Eigen::MatrixXd> mass_llt;  // Cholesky factor of M
  double rho_min = 0.0;                  // grid minimum of the background density
};

// Assemble all matrices for a frozen background.  Fields must share the
// basis domain; rho must be scalar and strictly positive, u_bar and B_bar
// vector-valued.  Material laws are evaluated pointwise on rho (their
// certified-range checks apply).
AssembledSystem assemble_system(const Basis& basis, const GridField& rho,
                                const GridField& u_bar, const GridField& B_bar,
                                const TransportCoefficients& coeffs);

// Integrated state: velocity and magnetic coefficients plus cumulative
// viscous / resistive dissipation.
struct OdeState {
  Eigen::VectorXd alpha, beta;
  double d_visc = 0.0, d_resist = 0.0;
};

struct StepStats {
  long accepted = 0, rejected = 0;
};

// Integrate the linear system from t0 to t1 with the embedded 5(4) pair;
// tol is used as both absolute and relative tolerance per component.  The
// dissipation accumulators ride in the integrated state under the same error
// control.  Throws NumericalError if the step size underflows.
OdeState step_linear(const AssembledSystem& sys, const OdeState& y0, double t0, double t1,
                     double tol, StepStats* stats = nullptr);

double kinetic_energy(const AssembledSystem& sys, const Eigen::VectorXd& alpha);
double magnetic_energy(const Eigen::VectorXd& beta);
double system_energy(const AssembledSystem& sys, const OdeState& y);

}  // namespace hallmhd
