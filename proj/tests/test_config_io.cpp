// Config parsing/rendering, preset construction, and artifact formats:
// byte-level snapshot layout, CSV determinism, and the all-violations
// contract of the parser.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hallmhd/basis.hpp"
#include "hallmhd/config.hpp"
#include "hallmhd/geometry.hpp"
#include "hallmhd/io.hpp"
#include "hallmhd/verification.hpp"

using namespace hallmhd;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <typename T>
T read_le(const std::string& bytes, std::size_t off) {
  T v{};
  REQUIRE(bytes.size() >= off + sizeof(T));
  std::memcpy(&v, bytes.data() + off, sizeof(T));
  return v;
}

}  // namespace

TEST_CASE("empty document yields the documented defaults") {
  SimConfig c = parse_config("");
  CHECK(c.domain_L == 6.283185307179586476925286766559);
  CHECK(c.domain_M == 16);
  CHECK(c.modes_K == 2);
  CHECK(c.hall_h == 0.0);
  CHECK(c.law_mu.shape == "constant");
  CHECK(c.law_mu.c0 == 0.05);
  CHECK(c.law_sigma.shape == "constant");
  CHECK(c.law_sigma.c0 == 1.0);
  CHECK(c.init_preset == "zero");
  CHECK(c.init_amplitude == 0.1);
  CHECK(c.init_rho_lo == 1.0);
  CHECK(c.init_rho_hi == 1.0);
  CHECK(c.init_seed == 0);
  CHECK(c.mollify_eps == 0.0);
  CHECK(c.time_T == 1.0);
  CHECK(c.time_dt_window == 0.1);
  CHECK(c.tol_ode == 1e-10);
  CHECK(c.tol_picard == 1e-9);
  CHECK(c.tol_picard_max_iter == 25);
  CHECK(c.tol_relaxation == 1.0);
  CHECK(c.tol_max_halvings == 6);
  CHECK(c.tol_energy_monitor == 1e-6);
  CHECK(c.output_snapshot_interval == 0);
  CHECK(c.output_csv == "ledger.csv");
  CHECK(c.output_snapshot_dir == "snapshots");

  // Comments and blank lines are ignored; values are trimmed.
  SimConfig c2 = parse_config("  # leading comment\n\n hall.h = 0.25  # trailing\n");
  CHECK(c2.hall_h == 0.25);
}

TEST_CASE("parser reports every violation with its key path") {
  // Aliasing rule is named.
  try {
    parse_config("domain.M = 7\nmodes.K = 2\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    std::string msg = e.what();
    CHECK(msg.find("anti-alias") != std::string::npos);
    CHECK(msg.find("domain.M") != std::string::npos);
  }

  // Negative Hall coefficient.
  CHECK_THROWS_AS(parse_config("hall.h = -0.5\n"), ConfigError);

  // All violations in one report, each naming its key.
  try {
    parse_config("hall.h = -1\ntime.dt_window = 0\ntol.relaxation = 1.5\nfoo.bar = 1\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    std::string msg = e.what();
    CHECK(msg.find("hall.h") != std::string::npos);
    CHECK(msg.find("time.dt_window") != std::string::npos);
    CHECK(msg.find("tol.relaxation") != std::string::npos);
    CHECK(msg.find("foo.bar") != std::string::npos);
    CHECK(msg.find("unknown key") != std::string::npos);
  }

  // Type mismatch and duplicates.
  try {
    parse_config("domain.M = abc\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("domain.M") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config("hall.h = 1\nhall.h = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("just a line without equals\n"), ConfigError);

  // Downstream range constraints checked at parse time.
  CHECK_THROWS_AS(parse_config("init.rho_lo = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("init.rho_lo = 1.5\ninit.rho_hi = 1.2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("tol.picard_max_iter = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("init.preset = nosuch\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("init.preset = file\n"), ConfigError);  // missing paths
  CHECK_THROWS_AS(parse_config("law.mu.shape = cubic\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("law.mu.c0 = -0.1\n"), ConfigError);  // not positive on band
  // Smoothing radius must fit the grid when enabled.
  CHECK_THROWS_AS(parse_config("mollify.eps = 0.1\n"), ConfigError);  // below 3 dx
  CHECK_THROWS_AS(parse_config("mollify.eps = 4.0\n"), ConfigError);  // beyond half box
}

TEST_CASE("rendered configuration reparses to the identical value") {
  SimConfig c;
  c.domain_L = 2.0 * M_PI;
  c.domain_M = 24;
  c.modes_K = 3;
  c.hall_h = 1.0 / 3.0;
  c.law_mu = LawSpec{"affine", 0.07, 0.013, 0.0};
  c.law_sigma = LawSpec{"quadratic", 2.0, -0.1, 0.04};
  c.init_preset = "random_smooth";
  c.init_amplitude = 0.123456789012345678;
  c.init_rho_lo = 0.9;
  c.init_rho_hi = 1.7;
  c.init_seed = 424242;
  c.mollify_eps = 1.3;
  c.time_T = 0.75;
  c.time_dt_window = 0.05;
  c.tol_ode = 3.3e-11;
  c.tol_picard = 7e-10;
  c.tol_picard_max_iter = 40;
  c.tol_relaxation = 0.65;
  c.tol_max_halvings = 4;
  c.tol_energy_monitor = 2e-6;
  c.output_snapshot_interval = 3;
  c.output_csv = "out/run.csv";
  c.output_snapshot_dir = "out/fields";

  std::string text = render_config(c);
  SimConfig r = parse_config(text);
  CHECK(r.domain_L == c.domain_L);
  CHECK(r.domain_M == c.domain_M);
  CHECK(r.modes_K == c.modes_K);
  CHECK(r.hall_h == c.hall_h);
  CHECK(r.law_mu.shape == c.law_mu.shape);
  CHECK(r.law_mu.c0 == c.law_mu.c0);
  CHECK(r.law_mu.c1 == c.law_mu.c1);
  CHECK(r.law_sigma.c2 == c.law_sigma.c2);
  CHECK(r.init_preset == c.init_preset);
  CHECK(r.init_amplitude == c.init_amplitude);
  CHECK(r.init_rho_lo == c.init_rho_lo);
  CHECK(r.init_rho_hi == c.init_rho_hi);
  CHECK(r.init_seed == c.init_seed);
  CHECK(r.mollify_eps == c.mollify_eps);
  CHECK(r.time_T == c.time_T);
  CHECK(r.time_dt_window == c.time_dt_window);
  CHECK(r.tol_ode == c.tol_ode);
  CHECK(r.tol_picard == c.tol_picard);
  CHECK(r.tol_picard_max_iter == c.tol_picard_max_iter);
  CHECK(r.tol_relaxation == c.tol_relaxation);
  CHECK(r.tol_max_halvings == c.tol_max_halvings);
  CHECK(r.tol_energy_monitor == c.tol_energy_monitor);
  CHECK(r.output_snapshot_interval == c.output_snapshot_interval);
  CHECK(r.output_csv == c.output_csv);
  CHECK(r.output_snapshot_dir == c.output_snapshot_dir);

  // Rendering is stable: render(parse(render(c))) == render(c).
  CHECK(render_config(r) == text);
}

TEST_CASE("law specs materialize with exact certified ranges") {
  MaterialLaw mu = law_from_spec(LawKind::viscosity, LawSpec{"affine", 1.0, 0.5, 0.0}, 1.0, 2.0);
  CHECK(mu.value_lo == 1.5);
  CHECK(mu.value_hi == 2.0);
  CHECK(mu.eval(1.2) == doctest::Approx(1.6).epsilon(1e-15));
  CHECK_THROWS_AS(
      law_from_spec(LawKind::conductivity, LawSpec{"affine", 0.1, -0.2, 0.0}, 1.0, 2.0),
      ConfigError);
}

TEST_CASE("snapshot files follow the documented byte layout and round-trip") {
  TorusDomain dom{2.5, 4};
  GridField f(dom, 1);
  for (std::size_t q = 0; q < f.v.size(); ++q) f.v[q] = 0.25 * static_cast<double>(q) - 3.0;

  const std::string path = "tmp_snapshot_scalar.bin";
  write_snapshot(path, f);
  std::string bytes = slurp(path);
  REQUIRE(bytes.size() == 32 + 64 * 8);
  CHECK(bytes.compare(0, 4, "HMHD") == 0);
  CHECK(read_le<std::uint32_t>(bytes, 4) == kSnapshotVersion);
  CHECK(read_le<std::uint32_t>(bytes, 8) == 4u);
  CHECK(read_le<std::uint32_t>(bytes, 12) == 1u);
  CHECK(read_le<std::uint64_t>(bytes, 16) == 0u);
  CHECK(read_le<double>(bytes, 24) == 2.5);
  CHECK(read_le<double>(bytes, 32) == f.v[0]);
  CHECK(read_le<double>(bytes, 32 + 5 * 8) == f.v[5]);
  CHECK(read_le<double>(bytes, 32 + 63 * 8) == f.v[63]);

  GridField g = read_snapshot(path);
  CHECK(g.domain.L == dom.L);
  CHECK(g.domain.M == dom.M);
  CHECK(g.ncomp == 1);
  REQUIRE(g.v.size() == f.v.size());
  for (std::size_t q = 0; q < f.v.size(); ++q) CHECK(g.v[q] == f.v[q]);

  // Vector rank round-trips too.
  GridField vec(dom, 3);
  for (std::size_t q = 0; q < vec.v.size(); ++q) vec.v[q] = std::sin(0.1 * q);
  write_snapshot("tmp_snapshot_vector.bin", vec);
  GridField vr = read_snapshot("tmp_snapshot_vector.bin");
  CHECK(vr.ncomp == 3);
  for (std::size_t q = 0; q < vec.v.size(); ++q) CHECK(vr.v[q] == vec.v[q]);

  // Corruption is rejected.
  {
    std::string bad = bytes;
    bad[0] = 'X';
    std::ofstream out("tmp_snapshot_bad.bin", std::ios::binary);
    out.write(bad.data(), static_cast<std::streamsize>(bad.size()));
  }
  CHECK_THROWS_AS(read_snapshot("tmp_snapshot_bad.bin"), ConfigError);
  {
    std::ofstream out("tmp_snapshot_trunc.bin", std::ios::binary);
    out.write(bytes.data(), 100);
  }
  CHECK_THROWS_AS(read_snapshot("tmp_snapshot_trunc.bin"), ConfigError);
  CHECK_THROWS_AS(read_snapshot("tmp_snapshot_missing.bin"), ConfigError);
}

TEST_CASE("csv writers are deterministic and round-trip exact doubles") {
  std::vector<LedgerRow> rows;
  rows.push_back(LedgerRow{0.0, 1.5, 2.25, 0.0, 0.0, 0.0});
  rows.push_back(LedgerRow{0.1, 1.0 / 3.0, 2.0 / 7.0, 1e-9, 2.5e-4, 3.3e-11});
  write_ledger_csv("tmp_ledger.csv", rows);
  std::string text = slurp("tmp_ledger.csv");
  CHECK(text.rfind("t,E_kin,E_mag,D_visc_cum,D_resist_cum,residual\n", 0) == 0);

  write_ledger_csv("tmp_ledger2.csv", rows);
  CHECK(slurp("tmp_ledger2.csv") == text);

  // Parse the data lines back: every double recovers exactly.
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);  // header
  for (const auto& r : rows) {
    REQUIRE(std::getline(in, line));
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    double t, ek, em, dv, dr, res;
    ls >> t >> ek >> em >> dv >> dr >> res;
    CHECK(t == r.t);
    CHECK(ek == r.e_kin);
    CHECK(em == r.e_mag);
    CHECK(dv == r.d_visc);
    CHECK(dr == r.d_resist);
    CHECK(res == r.residual);
  }

  std::vector<LevelSetRow> ls_rows{{0.0, 0.8, 0.9, 12.5}, {0.5, 0.9, 1.0, 1.0 / 3.0}};
  write_levelset_csv("tmp_levelsets.csv", ls_rows);
  std::string ls_text = slurp("tmp_levelsets.csv");
  CHECK(ls_text.rfind("t,bin_lo,bin_hi,volume\n", 0) == 0);
  CHECK(ls_text.find("12.5") != std::string::npos);

  CHECK(!version_string().empty());
}

TEST_CASE("presets build the documented initial states") {
  SUBCASE("zero") {
    SimConfig c = parse_config("init.preset = zero\ninit.rho_lo = 1.2\ninit.rho_hi = 1.2\n");
    RunSetup s = build_setup(c);
    CHECK(s.basis->K == c.modes_K);
    CHECK(s.input.alpha0.isZero(0.0));
    CHECK(s.input.beta0.isZero(0.0));
    CHECK(s.input.rho0.lo == 1.2);
    CHECK(s.input.rho0.hi == 1.2);
    CHECK(s.input.rho0.rho.is_constant());
    CHECK(s.driver.t_final == c.time_T);
    CHECK(s.driver.dt_window == c.time_dt_window);
    CHECK(s.driver.ode_tol == c.tol_ode);
    CHECK(s.driver.picard.tol == c.tol_picard);
    CHECK(s.driver.picard.max_iter == c.tol_picard_max_iter);
    CHECK(s.driver.picard.relaxation == c.tol_relaxation);
    CHECK(s.driver.picard.max_halvings == c.tol_max_halvings);
    CHECK(s.driver.energy_monitor_tol == c.tol_energy_monitor);
    CHECK(s.input.coeffs.hall == c.hall_h);
  }

  SUBCASE("beltrami matches the analytic reference field") {
    SimConfig c = parse_config(
        "init.preset = beltrami\ninit.amplitude = 0.3\nmodes.K = 1\nlaw.sigma.c0 = 1\n");
    RunSetup s = build_setup(c);
    CHECK(s.input.alpha0.isZero(0.0));
    double L = c.domain_L;
    double e2 = s.input.beta0.squaredNorm();
    CHECK(e2 == doctest::Approx(3.0 * 0.09 * L * L * L).epsilon(1e-12));
    GridField b = synthesize(*s.basis, s.input.beta0);
    GridField ref = beltrami_reference(0.3, 1.0, L, 0.0, c.domain_M);
    double worst = 0.0;
    for (std::size_t q = 0; q < b.v.size(); ++q)
      worst = std::max(worst, std::abs(b.v[q] - ref.v[q]));
    CHECK(worst <= 1e-12);
  }

  SUBCASE("random_smooth is seeded, bounded, and reproducible") {
    std::string doc =
        "init.preset = random_smooth\ninit.seed = 7\ninit.amplitude = 0.4\n"
        "init.rho_lo = 0.9\ninit.rho_hi = 1.6\n";
    RunSetup a = build_setup(parse_config(doc));
    RunSetup b = build_setup(parse_config(doc));
    CHECK(a.input.alpha0 == b.input.alpha0);
    CHECK(a.input.beta0 == b.input.beta0);
    CHECK(a.input.rho0.rho.v == b.input.rho0.rho.v);
    CHECK(a.input.alpha0.lpNorm<Eigen::Infinity>() <= 0.4);
    CHECK(a.input.alpha0.lpNorm<Eigen::Infinity>() > 0.0);
    CHECK(a.input.rho0.rho.min_value() >= 0.9);
    CHECK(a.input.rho0.rho.max_value() <= 1.6);
    CHECK(a.input.rho0.lo == a.input.rho0.rho.min_value());
    CHECK(!a.input.rho0.rho.is_constant(1e-6));

    RunSetup other = build_setup(parse_config(
        "init.preset = random_smooth\ninit.seed = 8\ninit.amplitude = 0.4\n"
        "init.rho_lo = 0.9\ninit.rho_hi = 1.6\n"));
    CHECK(a.input.alpha0 != other.input.alpha0);
  }

  SUBCASE("two_level is a sharp two-valued density") {
    SimConfig c = parse_config(
        "init.preset = two_level\ninit.rho_lo = 0.8\ninit.rho_hi = 1.3\n");
    RunSetup s = build_setup(c);
    std::set<double> values(s.input.rho0.rho.v.begin(), s.input.rho0.rho.v.end());
    CHECK(values == std::set<double>{0.8, 1.3});
    CHECK(s.input.alpha0.isZero(0.0));
    CHECK(s.input.beta0.isZero(0.0));
  }

  SUBCASE("smoothing keeps the two-level band and narrows the extremes") {
    SimConfig c = parse_config(
        "init.preset = two_level\ninit.rho_lo = 0.8\ninit.rho_hi = 1.3\n"
        "mollify.eps = 1.2\n");
    RunSetup s = build_setup(c);
    CHECK(s.input.rho0.lo >= 0.8);
    CHECK(s.input.rho0.hi <= 1.3);
    CHECK(!s.input.rho0.rho.is_constant(1e-6));
    // Nodes near the interface take intermediate values; deep-slab nodes
    // keep the exact levels.
    int mixed = 0;
    for (double v : s.input.rho0.rho.v)
      if (v != 0.8 && v != 1.3) ++mixed;
    CHECK(mixed > 0);
    CHECK(s.input.rho0.lo == 0.8);
    CHECK(s.input.rho0.hi == 1.3);
  }

  SUBCASE("file preset loads snapshots and matches direct projection") {
    TorusDomain dom;
    GridField rho(dom, 1);
    for (std::size_t q = 0; q < rho.v.size(); ++q) rho.v[q] = 1.0 + 0.001 * (q % 7);
    GridField u(dom, 3);  // zero
    GridField b = beltrami_reference(0.2, 1.0, dom.L, 0.0, dom.M);
    write_snapshot("tmp_init_rho.bin", rho);
    write_snapshot("tmp_init_u.bin", u);
    write_snapshot("tmp_init_b.bin", b);

    SimConfig c = parse_config(
        "init.preset = file\ninit.rho_file = tmp_init_rho.bin\n"
        "init.u_file = tmp_init_u.bin\ninit.b_file = tmp_init_b.bin\n"
        "modes.K = 1\n");
    RunSetup s = build_setup(c);
    CHECK(s.input.rho0.rho.v == rho.v);
    CHECK(s.input.alpha0.isZero(0.0));
    Eigen::VectorXd direct = project_L2(*s.basis, b);
    CHECK(s.input.beta0 == direct);

    // Grid mismatch is rejected.
    SimConfig bad = parse_config(
        "init.preset = file\ninit.rho_file = tmp_init_rho.bin\n"
        "init.u_file = tmp_init_u.bin\ninit.b_file = tmp_init_b.bin\n"
        "domain.M = 20\nmodes.K = 1\n");
    CHECK_THROWS_AS(build_setup(bad), ConfigError);
  }

  SUBCASE("constant-density presets reject a non-degenerate band") {
    CHECK_THROWS_AS(
        build_setup(parse_config("init.preset = beltrami\ninit.rho_lo = 1\ninit.rho_hi = 2\n")),
        ConfigError);
  }
}
