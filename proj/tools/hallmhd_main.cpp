// Command-line front end: `hallmhd simulate|study|verify --config <path>`.
//
// Artifacts land under the output root (env HALLMHD_OUTPUT_ROOT, default the
// working directory): a run manifest (manifest.json) is written for every
// invocation that reaches a config file, successful or not; simulate adds the
// energy-ledger CSV, a level-set histogram CSV, and field snapshots; verify
// adds a verdicts JSON; study adds a study report JSON/CSV plus per-level
// time-vs-difference data files.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 numerical failure,
// 3 verification verdict failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "hallmhd/basis.hpp"
#include "hallmhd/config.hpp"
#include "hallmhd/diagnostics.hpp"
#include "hallmhd/driver.hpp"
#include "hallmhd/io.hpp"
#include "hallmhd/transport.hpp"
#include "hallmhd/verification.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace hallmhd;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitVerdict = 3;
constexpr int kHistogramBins = 32;

fs::path output_root() {
  const char* env = std::getenv("HALLMHD_OUTPUT_ROOT");
  return fs::path((env && *env) ? env : ".");
}

fs::path resolve(const fs::path& root, const std::string& p) {
  fs::path q(p);
  return q.is_absolute() ? q : root / q;
}

// Level-set CSV path derived from the ledger path: same stem + "_levelsets".
std::string levelset_path(const std::string& csv_path) {
  fs::path p(csv_path);
  fs::path q = p.parent_path() / (p.stem().string() + "_levelsets.csv");
  return q.string();
}

std::string slurp_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_json(const fs::path& path, const json& j) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::trunc);
  out << j.dump(2) << "\n";
}

// Histogram rows over the run-global density band.  A constant density has a
// degenerate band; it is reported as one full-volume bin.
void append_histogram(std::vector<LevelSetRow>& rows, double t, const GridField& rho,
                      double lo, double hi) {
  double vol = rho.domain.L * rho.domain.L * rho.domain.L;
  if (hi > lo) {
    std::vector<double> h = level_set_histogram(rho, lo, hi, kHistogramBins);
    double w = (hi - lo) / kHistogramBins;
    for (int b = 0; b < kHistogramBins; ++b)
      rows.push_back(LevelSetRow{t, lo + b * w, lo + (b + 1) * w, h[b]});
  } else {
    rows.push_back(LevelSetRow{t, lo, hi, vol});
  }
}

struct ArtifactList {
  std::vector<std::string> names;
  void add(const std::string& n) { names.push_back(n); }
  json to_json() const { return json(names); }
};

// ---------------------------------------------------------------------------
// simulate

int run_simulate(const SimConfig& c, const fs::path& root, json& manifest,
                 ArtifactList& artifacts) {
  RunSetup s = build_setup(c);
  const double band_lo = s.input.rho0.lo, band_hi = s.input.rho0.hi;

  std::vector<LevelSetRow> ls_rows;
  append_histogram(ls_rows, 0.0, s.input.rho0.rho, band_lo, band_hi);

  json windows = json::array();
  fs::path snap_dir = resolve(root, c.output_snapshot_dir);
  long window_count = 0;

  auto write_state = [&](const std::string& tag, const DensitySnapshot& rho,
                         const Eigen::VectorXd& alpha, const Eigen::VectorXd& beta) {
    GridField u = synthesize(*s.basis, alpha);
    GridField b = synthesize(*s.basis, beta);
    for (const char* kind : {"rho", "u", "b"}) {
      std::string name = std::string(kind) + "_" + tag + ".bin";
      const GridField& f = (std::string(kind) == "rho") ? rho.rho
                           : (std::string(kind) == "u") ? u
                                                        : b;
      write_snapshot((snap_dir / name).string(), f);
      artifacts.add((fs::path(c.output_snapshot_dir) / name).string());
    }
  };

  WindowCallback cb = [&](const WindowResult& wr) {
    ++window_count;
    windows.push_back(json{{"t0", wr.knots.front()},
                           {"t1", wr.knots.back()},
                           {"iterations", wr.iterations},
                           {"final_residual", wr.final_residual}});
    append_histogram(ls_rows, wr.knots.back(), wr.rho_end.rho, band_lo, band_hi);
    if (c.output_snapshot_interval > 0 && window_count % c.output_snapshot_interval == 0) {
      char tag[16];
      std::snprintf(tag, sizeof(tag), "w%04ld", window_count);
      write_state(tag, wr.rho_end, wr.alpha.back(), wr.beta.back());
    }
  };

  RunResult rr;
  try {
    rr = run_simulation(s.input, s.driver, cb);
  } catch (const NumericalError& e) {
    manifest["windows"] = windows;
    manifest["status"] = "numerical_failure";
    manifest["error"] = e.what();
    return kExitNumerical;
  }

  std::string csv = resolve(root, c.output_csv).string();
  write_ledger_csv(csv, rr.ledger);
  artifacts.add(c.output_csv);
  write_levelset_csv(resolve(root, levelset_path(c.output_csv)).string(), ls_rows);
  artifacts.add(levelset_path(c.output_csv));
  write_state("final", rr.rho, rr.alpha, rr.beta);

  manifest["windows"] = windows;
  manifest["energy"] = json{{"initial", rr.initial_energy},
                            {"final_kinetic", rr.ledger.back().e_kin},
                            {"final_magnetic", rr.ledger.back().e_mag}};
  manifest["fixed_point"] = json{{"total_iterations", rr.fixed_point.total_iterations},
                                 {"deepest_halving", rr.fixed_point.deepest_halving}};
  manifest["windows_completed"] = rr.windows_completed;
  manifest["status"] = "completed";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// verify

struct Verdict {
  std::string criterion;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

json verdicts_to_json(const std::vector<Verdict>& vs) {
  json arr = json::array();
  for (const auto& v : vs)
    arr.push_back(json{{"criterion", v.criterion},
                       {"value", v.value},
                       {"threshold", v.threshold},
                       {"verdict", v.pass ? "pass" : "fail"}});
  return arr;
}

int run_verify(const SimConfig& c, const fs::path& root, json& manifest,
               ArtifactList& artifacts) {
  RunSetup s = build_setup(c);
  const double band_lo = s.input.rho0.lo, band_hi = s.input.rho0.hi;

  std::vector<LevelSetRow> ls_rows;
  append_histogram(ls_rows, 0.0, s.input.rho0.rho, band_lo, band_hi);

  TrajectoryRecorder rec(*s.basis, s.input);
  auto rec_cb = rec.callback();
  json windows = json::array();
  WindowCallback cb = [&](const WindowResult& wr) {
    rec_cb(wr);
    windows.push_back(json{{"t0", wr.knots.front()},
                           {"t1", wr.knots.back()},
                           {"iterations", wr.iterations},
                           {"final_residual", wr.final_residual}});
    append_histogram(ls_rows, wr.knots.back(), wr.rho_end.rho, band_lo, band_hi);
  };

  RunResult rr;
  try {
    rr = run_simulation(s.input, s.driver, cb);
  } catch (const NumericalError& e) {
    manifest["windows"] = windows;
    manifest["status"] = "numerical_failure";
    manifest["error"] = e.what();
    return kExitNumerical;
  }
  manifest["windows"] = windows;

  std::string csv = resolve(root, c.output_csv).string();
  write_ledger_csv(csv, rr.ledger);
  artifacts.add(c.output_csv);
  write_levelset_csv(resolve(root, levelset_path(c.output_csv)).string(), ls_rows);
  artifacts.add(levelset_path(c.output_csv));

  const SolutionTrajectory& traj = rec.trajectory();
  std::vector<Verdict> verdicts;

  // Energy ledger: |E(t) + D(t) - E(0)| within the tolerance-proportional
  // band, and the one-sided inequality within the monitor slack.
  {
    double e0 = rr.initial_energy;
    double scale = (e0 > 0.0) ? e0 : 1.0;
    double worst_abs = 0.0, worst_signed = 0.0;
    for (const auto& row : rr.ledger) {
      double resid = row.e_kin + row.e_mag + row.d_visc + row.d_resist - e0;
      worst_abs = std::max(worst_abs, std::abs(resid) / scale);
      worst_signed = std::max(worst_signed, resid / scale);
    }
    verdicts.push_back(Verdict{"energy_balance", worst_abs,
                               std::max(1e-6, 10.0 * (c.tol_picard + c.tol_ode)), false});
    verdicts.push_back(Verdict{"energy_inequality", worst_signed, c.tol_energy_monitor, false});
  }

  // Density bounds: zero violation of the certified band, bit for bit.
  {
    double worst = 0.0;
    for (const auto& sample : traj.samples) {
      worst = std::max(worst, band_lo - sample.rho.rho.min_value());
      worst = std::max(worst, sample.rho.rho.max_value() - band_hi);
    }
    verdicts.push_back(Verdict{"density_bounds", worst, 0.0, false});
  }

  // Pointwise/integral cancellation diagnostics and solenoidality on every
  // recorded snapshot.
  {
    double lorentz = 0.0, duality = 0.0, div_u = 0.0, div_b = 0.0;
    for (const auto& sample : traj.samples) {
      GridField u = synthesize(*s.basis, sample.alpha);
      GridField b = synthesize(*s.basis, sample.beta);
      CancellationReport cr = check_cancellations(u, b);
      lorentz = std::max(lorentz, cr.lorentz_selfdot);
      duality = std::max(duality, cr.duality_pairing);
      div_u = std::max(div_u, divergence_residual(u));
      div_b = std::max(div_b, divergence_residual(b));
    }
    verdicts.push_back(Verdict{"cancellation_lorentz", lorentz, 1e-14, false});
    verdicts.push_back(Verdict{"cancellation_duality", duality, 1e-12, false});
    verdicts.push_back(Verdict{"divergence_u", div_u, 1e-10, false});
    verdicts.push_back(Verdict{"divergence_b", div_b, 1e-10, false});
  }

  // Analytic decay for the eigenfield preset under a constant conductivity:
  // coefficient norms are exact L2 norms, so the ratio needs no quadrature.
  if (c.init_preset == "beltrami" && c.law_sigma.shape == "constant") {
    double k = 2.0 * M_PI / c.domain_L;
    double expected = std::exp(-k * k * c.time_T / c.law_sigma.c0);
    double n0 = s.input.beta0.norm();
    double ratio = (n0 > 0.0) ? rr.beta.norm() / n0 : 0.0;
    verdicts.push_back(
        Verdict{"beltrami_decay", std::abs(ratio / expected - 1.0), 1e-6, false});
    verdicts.push_back(Verdict{"velocity_zero", rr.alpha.norm(), 1e-8, false});
  }

  bool all_pass = true;
  for (auto& v : verdicts) {
    v.pass = v.value <= v.threshold;
    all_pass = all_pass && v.pass;
  }

  json jv = verdicts_to_json(verdicts);
  write_json(root / "verdicts.json", jv);
  artifacts.add("verdicts.json");
  manifest["verdicts"] = jv;
  manifest["status"] = all_pass ? "completed" : "verdict_failure";
  return all_pass ? kExitOk : kExitVerdict;
}

// ---------------------------------------------------------------------------
// study

RefinementAxis parse_axis(const std::string& name) {
  if (name == "modes_n") return RefinementAxis::modes_n;
  if (name == "mollify_eps") return RefinementAxis::mollify_eps;
  return RefinementAxis::tolerance;
}

int run_study(const SimConfig& c, const std::string& axis_name, int levels,
              const fs::path& root, json& manifest, ArtifactList& artifacts) {
  RefinementAxis axis = parse_axis(axis_name);
  if (axis == RefinementAxis::mollify_eps && !(c.mollify_eps > 0.0))
    throw ConfigError("study along mollify_eps requires mollify.eps > 0 in the base config");

  LevelFactory factory = [&c, axis](int level) {
    SimConfig lc = c;
    double parameter = 0.0;
    double shrink = std::ldexp(1.0, -level);  // 2^-level
    switch (axis) {
      case RefinementAxis::modes_n:
        lc.modes_K = c.modes_K + level;
        parameter = lc.modes_K;
        break;
      case RefinementAxis::mollify_eps:
        lc.mollify_eps = c.mollify_eps * shrink;
        parameter = lc.mollify_eps;
        break;
      case RefinementAxis::tolerance:
        lc.tol_ode = c.tol_ode * shrink;
        lc.tol_picard = c.tol_picard * shrink;
        parameter = lc.tol_ode;
        break;
    }
    RunSetup rs = build_setup(lc);
    LevelSetup ls;
    ls.basis = rs.basis;
    ls.input = rs.input;
    ls.input.basis = ls.basis.get();
    ls.config = rs.driver;
    ls.parameter = parameter;
    return ls;
  };

  RefinementReport rep = refinement_study(factory, axis, levels);

  json jlevels = json::array();
  std::ostringstream csv;
  csv << "level,parameter,ok,cauchy_alpha,cauchy_beta,cauchy_rho,level_set_drift\n";
  for (std::size_t i = 0; i < rep.levels.size(); ++i) {
    const RefinementLevel& lv = rep.levels[i];
    json jl{{"level", i},
            {"parameter", lv.parameter},
            {"ok", lv.ok},
            {"note", lv.note},
            {"cauchy_alpha", lv.cauchy_alpha},
            {"cauchy_beta", lv.cauchy_beta},
            {"cauchy_rho", lv.cauchy_rho},
            {"level_set_drift", lv.level_set_drift}};
    if (!lv.times.empty()) {
      std::string name = "study_level_" + std::to_string(i) + ".csv";
      std::ofstream out(root / name, std::ios::trunc);
      out << "t,diff_alpha,diff_beta,diff_rho\n";
      for (std::size_t q = 0; q < lv.times.size(); ++q)
        out << format_double(lv.times[q]) << ',' << format_double(lv.diff_alpha[q]) << ','
            << format_double(lv.diff_beta[q]) << ',' << format_double(lv.diff_rho[q]) << '\n';
      jl["data_file"] = name;
      artifacts.add(name);
    }
    jlevels.push_back(std::move(jl));
    csv << i << ',' << format_double(lv.parameter) << ',' << (lv.ok ? 1 : 0) << ','
        << format_double(lv.cauchy_alpha) << ',' << format_double(lv.cauchy_beta) << ','
        << format_double(lv.cauchy_rho) << ',' << format_double(lv.level_set_drift) << '\n';
  }

  json report{{"axis", axis_name},
              {"levels", jlevels},
              {"rate_alpha", rep.rate_alpha},
              {"rate_beta", rep.rate_beta},
              {"rate_rho", rep.rate_rho}};
  write_json(root / "study.json", report);
  artifacts.add("study.json");
  {
    std::ofstream out(root / "study_levels.csv", std::ios::trunc);
    out << csv.str();
  }
  artifacts.add("study_levels.csv");
  manifest["study"] = report;

  bool all_ok = true;
  for (const auto& lv : rep.levels) all_ok = all_ok && lv.ok;
  manifest["status"] = all_ok ? "completed" : "numerical_failure";
  if (!all_ok) manifest["error"] = "one or more study levels failed; see the level notes";
  return all_ok ? kExitOk : kExitNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral simulator for density-dependent incompressible Hall-MHD"};
  app.require_subcommand(1);

  std::string config_path, axis_name;
  int levels = 3;

  CLI::App* sim = app.add_subcommand("simulate", "Run one simulation and write its artifacts");
  sim->add_option("--config", config_path, "Run configuration file")->required();

  CLI::App* study = app.add_subcommand("study", "Run a refinement study along one axis");
  study->add_option("--config", config_path, "Base configuration file")->required();
  study->add_option("--axis", axis_name, "Refinement axis")
      ->required()
      ->check(CLI::IsMember({"modes_n", "mollify_eps", "tolerance"}));
  study->add_option("--levels", levels, "Number of refinement levels (>= 3)")
      ->required()
      ->check(CLI::Range(3, 16));

  CLI::App* verify = app.add_subcommand("verify", "Run and evaluate the built-in verdicts");
  verify->add_option("--config", config_path, "Run configuration file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  const std::string command = sim->parsed() ? "simulate" : study->parsed() ? "study" : "verify";
  const fs::path root = output_root();
  {
    std::error_code ec;
    fs::create_directories(root, ec);
  }

  json manifest;
  manifest["command"] = command;
  manifest["version"] = version_string();
  manifest["config_path"] = config_path;
  ArtifactList artifacts;
  auto t_begin = std::chrono::steady_clock::now();

  int code = kExitUsage;
  try {
    std::string text = slurp_file(config_path);
    try {
      SimConfig c = parse_config(text);
      manifest["config"] = render_config(c);
      if (command == "simulate")
        code = run_simulate(c, root, manifest, artifacts);
      else if (command == "verify")
        code = run_verify(c, root, manifest, artifacts);
      else
        code = run_study(c, axis_name, levels, root, manifest, artifacts);
    } catch (const ConfigError&) {
      manifest["config_text"] = text;
      throw;
    }
  } catch (const ConfigError& e) {
    manifest["status"] = "config_error";
    manifest["error"] = e.what();
    std::cerr << e.what() << "\n";
    code = kExitUsage;
  } catch (const NumericalError& e) {
    manifest["status"] = "numerical_failure";
    manifest["error"] = e.what();
    std::cerr << e.what() << "\n";
    code = kExitNumerical;
  } catch (const std::exception& e) {
    manifest["status"] = "internal_error";
    manifest["error"] = e.what();
    std::cerr << e.what() << "\n";
    code = kExitNumerical;
  }

  auto t_end = std::chrono::steady_clock::now();
  manifest["wall_clock_seconds"] = std::chrono::duration<double>(t_end - t_begin).count();
  manifest["exit_code"] = code;
  manifest["artifacts"] = artifacts.to_json();
  write_json(root / "manifest.json", manifest);

  if (code == kExitOk)
    std::cout << command << ": ok\n";
  else
    std::cout << command << ": failed (exit " << code << ")\n";
  return code;
}
