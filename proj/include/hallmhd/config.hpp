// Plain-text run configuration: one `key = value` per line, dotted
// namespaces, `#` comments.  Parsing validates every constraint and reports
// all violations together (each with its key path and the expected range);
// render_config emits a canonical echo that reparses to the identical
// configuration bit for bit.

#pragma once

#include <memory>
#include <string>

#include "hallmhd/basis.hpp"
#include "hallmhd/driver.hpp"
#include "hallmhd/material.hpp"

namespace hallmhd {

struct LawSpec {
  std::string shape = "constant";  // constant | affine | quadratic
  double c0 = 1.0, c1 = 0.0, c2 = 0.0;
};

struct SimConfig {
  // domain.*
  double domain_L = 6.283185307179586476925286766559;
  int domain_M = 16;
  // modes.*
  int modes_K = 2;
  // hall.*
  double hall_h = 0.0;
  // law.mu.*, law.sigma.*
  LawSpec law_mu{"constant", 0.05, 0.0, 0.0};
  LawSpec law_sigma{"constant", 1.0, 0.0, 0.0};
  // init.*
  std::string init_preset = "zero";  // zero | beltrami | random_smooth | two_level | file
  double init_amplitude = 0.1;
  double init_rho_lo = 1.0, init_rho_hi = 1.0;
  long init_seed = 0;
  std::string init_rho_file, init_u_file, init_b_file;
  // mollify.*  (0 disables smoothing: analytic presets are already smooth)
  double mollify_eps = 0.0;
  // time.*
  double time_T = 1.0, time_dt_window = 0.1;
  // tol.*
  double tol_ode = 1e-10;
  double tol_picard = 1e-9;
  int tol_picard_max_iter = 25;
  double tol_relaxation = 1.0;
  int tol_max_halvings = 6;
  double tol_energy_monitor = 1e-6;
  // output.*
  int output_snapshot_interval = 0;  // windows between snapshots; 0 = final only
  std::string output_csv = "ledger.csv";
  std::string output_snapshot_dir = "snapshots";
};

// Throws ConfigError whose message lists every violation (one per line).
SimConfig parse_config(const std::string& text);

// Canonical echo of every key; parse_config(render_config(c)) == c exactly.
std::string render_config(const SimConfig& c);

// Materialize a law spec on the density band [rho_lo, rho_hi].
MaterialLaw law_from_spec(LawKind kind, const LawSpec& spec, double rho_lo, double rho_hi);

// Everything needed to run: basis, initial state, driver settings.
struct RunSetup {
  std::shared_ptr<Basis> basis;
  SimulationInput input;
  DriverConfig driver;
};
RunSetup build_setup(const SimConfig& c);

}  // namespace hallmhd
