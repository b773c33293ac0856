#include "hallmhd/config.hpp"

#include <cmath>
#include <cstdlib>
#include <random>
#include <set>
#include <sstream>
#include <vector>

#include "hallmhd/io.hpp"
#include "hallmhd/mollify.hpp"
#include "hallmhd/verification.hpp"

namespace hallmhd {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// Raw key/value lines plus the violations collected while reading them.
struct Document {
  std::vector<std::pair<std::string, std::string>> entries;
  std::vector<std::string> violations;
};

Document split_lines(const std::string& text) {
  Document doc;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  std::set<std::string> seen;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      doc.violations.push_back("line " + std::to_string(lineno) +
                               ": expected `key = value`, got '" + line + "'");
      continue;
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      doc.violations.push_back("line " + std::to_string(lineno) + ": empty key");
      continue;
    }
    if (!seen.insert(key).second) {
      doc.violations.push_back(key + ": duplicate key");
      continue;
    }
    doc.entries.emplace_back(key, value);
  }
  return doc;
}

// Typed access over the parsed lines; every getter records a violation on
// type mismatch and marks the key as consumed so leftovers can be reported.
class Reader {
 public:
  explicit Reader(Document doc) : doc_(std::move(doc)) {}

  std::vector<std::string>& violations() { return doc_.violations; }

  void bad(const std::string& key, const std::string& why) {
    doc_.violations.push_back(key + ": " + why);
  }

  bool has(const std::string& key) const {
    for (const auto& [k, v] : doc_.entries)
      if (k == key) return true;
    return false;
  }

  void get_string(const std::string& key, std::string& out) {
    const std::string* v = lookup(key);
    if (v) out = *v;
  }

  void get_double(const std::string& key, double& out) {
    const std::string* v = lookup(key);
    if (!v) return;
    char* end = nullptr;
    double x = std::strtod(v->c_str(), &end);
    if (v->empty() || end != v->c_str() + v->size() || !std::isfinite(x)) {
      bad(key, "expected a finite number, got '" + *v + "'");
      return;
    }
    out = x;
  }

  void get_int(const std::string& key, int& out) {
    long x = 0;
    if (get_long_impl(key, x)) out = static_cast<int>(x);
  }

  void get_long(const std::string& key, long& out) {
    long x = 0;
    if (get_long_impl(key, x)) out = x;
  }

  void report_unknown() {
    for (const auto& [k, v] : doc_.entries)
      if (!consumed_.count(k)) doc_.violations.push_back(k + ": unknown key");
  }

 private:
  const std::string* lookup(const std::string& key) {
    consumed_.insert(key);
    for (const auto& [k, v] : doc_.entries)
      if (k == key) return &v;
    return nullptr;
  }

  bool get_long_impl(const std::string& key, long& out) {
    const std::string* v = lookup(key);
    if (!v) return false;
    char* end = nullptr;
    long x = std::strtol(v->c_str(), &end, 10);
    if (v->empty() || end != v->c_str() + v->size()) {
      bad(key, "expected an integer, got '" + *v + "'");
      return false;
    }
    out = x;
    return true;
  }

  Document doc_;
  std::set<std::string> consumed_;
};

bool valid_shape(const std::string& s) {
  return s == "constant" || s == "affine" || s == "quadratic";
}

void read_law(Reader& r, const std::string& prefix, LawSpec& spec) {
  r.get_string(prefix + ".shape", spec.shape);
  r.get_double(prefix + ".c0", spec.c0);
  r.get_double(prefix + ".c1", spec.c1);
  r.get_double(prefix + ".c2", spec.c2);
  if (!valid_shape(spec.shape))
    r.bad(prefix + ".shape",
          "expected constant | affine | quadratic, got '" + spec.shape + "'");
}

GridField constant_scalar(const TorusDomain& dom, double value) {
  GridField f(dom, 1);
  for (double& v : f.v) v = value;
  return f;
}

}  // namespace

SimConfig parse_config(const std::string& text) {
  Reader r(split_lines(text));
  SimConfig c;

  r.get_double("domain.L", c.domain_L);
  r.get_int("domain.M", c.domain_M);
  r.get_int("modes.K", c.modes_K);
  r.get_double("hall.h", c.hall_h);
  read_law(r, "law.mu", c.law_mu);
  read_law(r, "law.sigma", c.law_sigma);
  r.get_string("init.preset", c.init_preset);
  r.get_double("init.amplitude", c.init_amplitude);
  r.get_double("init.rho_lo", c.init_rho_lo);
  r.get_double("init.rho_hi", c.init_rho_hi);
  r.get_long("init.seed", c.init_seed);
  r.get_string("init.rho_file", c.init_rho_file);
  r.get_string("init.u_file", c.init_u_file);
  r.get_string("init.b_file", c.init_b_file);
  r.get_double("mollify.eps", c.mollify_eps);
  r.get_double("time.T", c.time_T);
  r.get_double("time.dt_window", c.time_dt_window);
  r.get_double("tol.ode", c.tol_ode);
  r.get_double("tol.picard", c.tol_picard);
  r.get_int("tol.picard_max_iter", c.tol_picard_max_iter);
  r.get_double("tol.relaxation", c.tol_relaxation);
  r.get_int("tol.max_halvings", c.tol_max_halvings);
  r.get_double("tol.energy_monitor", c.tol_energy_monitor);
  r.get_int("output.snapshot_interval", c.output_snapshot_interval);
  r.get_string("output.csv", c.output_csv);
  r.get_string("output.snapshot_dir", c.output_snapshot_dir);
  r.report_unknown();

  bool domain_ok = true;
  if (!(c.domain_L > 0.0)) {
    r.bad("domain.L", "box size must be positive, got " + format_double(c.domain_L));
    domain_ok = false;
  }
  if (c.domain_M < 1) {
    r.bad("domain.M", "grid size must be at least 1, got " + std::to_string(c.domain_M));
    domain_ok = false;
  }
  if (c.modes_K < 1) {
    r.bad("modes.K", "mode cutoff must be at least 1, got " + std::to_string(c.modes_K));
    domain_ok = false;
  } else if (c.domain_M >= 1 && 4 * c.modes_K > c.domain_M) {
    r.bad("domain.M", "violates the anti-aliasing margin 4*modes.K <= domain.M (need M >= " +
                          std::to_string(4 * c.modes_K) + ", got " +
                          std::to_string(c.domain_M) + ")");
    domain_ok = false;
  }
  if (!(c.hall_h >= 0.0))
    r.bad("hall.h", "Hall coefficient must be nonnegative, got " + format_double(c.hall_h));

  bool band_ok = true;
  if (!(c.init_rho_lo > 0.0)) {
    r.bad("init.rho_lo", "density floor must be positive, got " + format_double(c.init_rho_lo));
    band_ok = false;
  }
  if (!(c.init_rho_hi >= c.init_rho_lo)) {
    r.bad("init.rho_hi", "density band is empty: rho_hi " + format_double(c.init_rho_hi) +
                             " < rho_lo " + format_double(c.init_rho_lo));
    band_ok = false;
  }
  if (band_ok) {
    // Positivity of each law on the configured density band.
    auto check_law = [&](const char* prefix, LawKind kind, const LawSpec& spec) {
      if (!valid_shape(spec.shape)) return;  // already reported
      try {
        law_from_spec(kind, spec, c.init_rho_lo, c.init_rho_hi);
      } catch (const ConfigError& e) {
        r.bad(prefix, e.what());
      }
    };
    check_law("law.mu", LawKind::viscosity, c.law_mu);
    check_law("law.sigma", LawKind::conductivity, c.law_sigma);
  }

  const std::set<std::string> presets{"zero", "beltrami", "random_smooth", "two_level", "file"};
  if (!presets.count(c.init_preset)) {
    r.bad("init.preset",
          "expected zero | beltrami | random_smooth | two_level | file, got '" +
              c.init_preset + "'");
  } else if (c.init_preset == "file") {
    if (c.init_rho_file.empty()) r.bad("init.rho_file", "required by init.preset = file");
    if (c.init_u_file.empty()) r.bad("init.u_file", "required by init.preset = file");
    if (c.init_b_file.empty()) r.bad("init.b_file", "required by init.preset = file");
  }
  if (!(c.init_amplitude >= 0.0))
    r.bad("init.amplitude", "must be nonnegative, got " + format_double(c.init_amplitude));

  if (!(c.mollify_eps >= 0.0)) {
    r.bad("mollify.eps", "must be nonnegative (0 disables smoothing), got " +
                             format_double(c.mollify_eps));
  } else if (c.mollify_eps > 0.0 && domain_ok) {
    double dx = c.domain_L / c.domain_M;
    if (c.mollify_eps < 3.0 * dx)
      r.bad("mollify.eps", "smoothing radius must cover at least 3 grid cells (need >= " +
                               format_double(3.0 * dx) + ", got " +
                               format_double(c.mollify_eps) + ")");
    if (c.mollify_eps > 0.5 * c.domain_L)
      r.bad("mollify.eps", "smoothing radius must fit in half the box (need <= " +
                               format_double(0.5 * c.domain_L) + ", got " +
                               format_double(c.mollify_eps) + ")");
  }

  if (!(c.time_T >= 0.0))
    r.bad("time.T", "final time must be nonnegative, got " + format_double(c.time_T));
  if (!(c.time_dt_window > 0.0))
    r.bad("time.dt_window", "window length must be positive, got " +
                                format_double(c.time_dt_window));
  if (!(c.tol_ode > 0.0))
    r.bad("tol.ode", "must be positive, got " + format_double(c.tol_ode));
  if (!(c.tol_picard > 0.0))
    r.bad("tol.picard", "must be positive, got " + format_double(c.tol_picard));
  if (c.tol_picard_max_iter < 1)
    r.bad("tol.picard_max_iter", "must be at least 1, got " +
                                     std::to_string(c.tol_picard_max_iter));
  if (!(c.tol_relaxation > 0.0 && c.tol_relaxation <= 1.0))
    r.bad("tol.relaxation", "must lie in (0, 1], got " + format_double(c.tol_relaxation));
  if (c.tol_max_halvings < 0)
    r.bad("tol.max_halvings", "must be nonnegative, got " +
                                  std::to_string(c.tol_max_halvings));
  if (!(c.tol_energy_monitor >= 0.0))
    r.bad("tol.energy_monitor", "must be nonnegative, got " +
                                    format_double(c.tol_energy_monitor));
  if (c.output_snapshot_interval < 0)
    r.bad("output.snapshot_interval", "must be nonnegative, got " +
                                          std::to_string(c.output_snapshot_interval));
  if (c.output_csv.empty()) r.bad("output.csv", "must not be empty");
  if (c.output_snapshot_dir.empty()) r.bad("output.snapshot_dir", "must not be empty");

  if (!r.violations().empty()) {
    std::string msg = "configuration invalid:";
    for (const auto& v : r.violations()) msg += "\n  " + v;
    throw ConfigError(msg);
  }
  return c;
}

std::string render_config(const SimConfig& c) {
  std::ostringstream out;
  auto kv = [&out](const char* key, const std::string& value) {
    out << key << " = " << value << "\n";
  };
  auto kd = [&kv](const char* key, double value) { kv(key, format_double(value)); };
  auto ki = [&kv](const char* key, long value) { kv(key, std::to_string(value)); };

  kd("domain.L", c.domain_L);
  ki("domain.M", c.domain_M);
  ki("modes.K", c.modes_K);
  kd("hall.h", c.hall_h);
  kv("law.mu.shape", c.law_mu.shape);
  kd("law.mu.c0", c.law_mu.c0);
  kd("law.mu.c1", c.law_mu.c1);
  kd("law.mu.c2", c.law_mu.c2);
  kv("law.sigma.shape", c.law_sigma.shape);
  kd("law.sigma.c0", c.law_sigma.c0);
  kd("law.sigma.c1", c.law_sigma.c1);
  kd("law.sigma.c2", c.law_sigma.c2);
  kv("init.preset", c.init_preset);
  kd("init.amplitude", c.init_amplitude);
  kd("init.rho_lo", c.init_rho_lo);
  kd("init.rho_hi", c.init_rho_hi);
  ki("init.seed", c.init_seed);
  kv("init.rho_file", c.init_rho_file);
  kv("init.u_file", c.init_u_file);
  kv("init.b_file", c.init_b_file);
  kd("mollify.eps", c.mollify_eps);
  kd("time.T", c.time_T);
  kd("time.dt_window", c.time_dt_window);
  kd("tol.ode", c.tol_ode);
  kd("tol.picard", c.tol_picard);
  ki("tol.picard_max_iter", c.tol_picard_max_iter);
  kd("tol.relaxation", c.tol_relaxation);
  ki("tol.max_halvings", c.tol_max_halvings);
  kd("tol.energy_monitor", c.tol_energy_monitor);
  ki("output.snapshot_interval", c.output_snapshot_interval);
  kv("output.csv", c.output_csv);
  kv("output.snapshot_dir", c.output_snapshot_dir);
  return out.str();
}

MaterialLaw law_from_spec(LawKind kind, const LawSpec& spec, double rho_lo, double rho_hi) {
  return make_law(kind, spec.shape, spec.c0, spec.c1, spec.c2, rho_lo, rho_hi);
}

RunSetup build_setup(const SimConfig& c) {
  TorusDomain dom{c.domain_L, c.domain_M};
  RunSetup setup;
  setup.basis = std::make_shared<Basis>(enumerate_modes(dom, c.modes_K));
  const Basis& basis = *setup.basis;
  const auto n = static_cast<Eigen::Index>(basis.n());

  if ((c.init_preset == "zero" || c.init_preset == "beltrami") &&
      c.init_rho_lo != c.init_rho_hi)
    throw ConfigError("init.preset = " + c.init_preset +
                      " requires a constant density (init.rho_lo == init.rho_hi)");

  // Sharp initial fields per preset; smoothing (if enabled) is applied below.
  GridField rho = constant_scalar(dom, c.init_rho_lo);
  GridField u0(dom, 3), B0(dom, 3);
  Eigen::VectorXd alpha0 = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd beta0 = Eigen::VectorXd::Zero(n);

  if (c.init_preset == "beltrami") {
    B0 = beltrami_reference(c.init_amplitude, 1.0, dom.L, 0.0, dom.M);
    beta0 = project_L2(basis, B0);
  } else if (c.init_preset == "random_smooth") {
    std::mt19937_64 gen(static_cast<std::uint64_t>(c.init_seed));
    std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
    std::uniform_real_distribution<double> band(-c.init_amplitude, c.init_amplitude);
    double phi1 = angle(gen), phi2 = angle(gen);
    for (Eigen::Index i = 0; i < n; ++i) alpha0[i] = band(gen);
    for (Eigen::Index i = 0; i < n; ++i) beta0[i] = band(gen);
    double span = c.init_rho_hi - c.init_rho_lo;
    for (int i = 0; i < dom.M; ++i)
      for (int j = 0; j < dom.M; ++j) {
        double w = 0.5 + 0.5 * std::sin(2.0 * M_PI * i / dom.M + phi1) *
                             std::cos(2.0 * M_PI * j / dom.M + phi2);
        double value = c.init_rho_lo + span * w;
        for (int k = 0; k < dom.M; ++k) rho.at(0, i, j, k) = value;
      }
    u0 = synthesize(basis, alpha0);
    B0 = synthesize(basis, beta0);
  } else if (c.init_preset == "two_level") {
    for (int i = 0; i < dom.M; ++i) {
      double value = (i < dom.M / 2) ? c.init_rho_hi : c.init_rho_lo;
      for (int j = 0; j < dom.M; ++j)
        for (int k = 0; k < dom.M; ++k) rho.at(0, i, j, k) = value;
    }
  } else if (c.init_preset == "file") {
    rho = read_snapshot(c.init_rho_file);
    u0 = read_snapshot(c.init_u_file);
    B0 = read_snapshot(c.init_b_file);
    auto check_loaded = [&](const char* name, const GridField& field, int rank) {
      if (!(field.domain == dom))
        throw ConfigError(std::string(name) + ": snapshot grid (L=" +
                          format_double(field.domain.L) + ", M=" +
                          std::to_string(field.domain.M) +
                          ") does not match the configured domain (L=" +
                          format_double(dom.L) + ", M=" + std::to_string(dom.M) + ")");
      if (field.ncomp != rank)
        throw ConfigError(std::string(name) + ": expected rank " + std::to_string(rank) +
                          ", got " + std::to_string(field.ncomp));
    };
    check_loaded("init.rho_file", rho, 1);
    check_loaded("init.u_file", u0, 3);
    check_loaded("init.b_file", B0, 3);
    if (!(rho.min_value() > 0.0))
      throw ConfigError("init.rho_file: density must be positive everywhere (min " +
                        format_double(rho.min_value()) + ")");
    alpha0 = project_L2(basis, u0);
    beta0 = project_L2(basis, B0);
  }

  if (c.mollify_eps > 0.0) {
    InitialData id = build_initial_state(basis, rho, u0, B0, c.mollify_eps);
    setup.input.rho0 = DensitySnapshot{std::move(id.rho0eps), 0.0, id.rho_lo, id.rho_hi};
    setup.input.alpha0 = std::move(id.alpha0);
    setup.input.beta0 = std::move(id.beta0);
  } else {
    setup.input.rho0 = DensitySnapshot{std::move(rho), 0.0, 0.0, 0.0};
    setup.input.rho0.lo = setup.input.rho0.rho.min_value();
    setup.input.rho0.hi = setup.input.rho0.rho.max_value();
    setup.input.alpha0 = std::move(alpha0);
    setup.input.beta0 = std::move(beta0);
  }

  setup.input.basis = setup.basis.get();
  setup.input.coeffs.mu =
      law_from_spec(LawKind::viscosity, c.law_mu, setup.input.rho0.lo, setup.input.rho0.hi);
  setup.input.coeffs.sigma = law_from_spec(LawKind::conductivity, c.law_sigma,
                                           setup.input.rho0.lo, setup.input.rho0.hi);
  setup.input.coeffs.hall = c.hall_h;

  setup.driver.t_final = c.time_T;
  setup.driver.dt_window = c.time_dt_window;
  setup.driver.ode_tol = c.tol_ode;
  setup.driver.energy_monitor_tol = c.tol_energy_monitor;
  setup.driver.picard.tol = c.tol_picard;
  setup.driver.picard.max_iter = c.tol_picard_max_iter;
  setup.driver.picard.relaxation = c.tol_relaxation;
  setup.driver.picard.max_halvings = c.tol_max_halvings;
  return setup;
}

}  // namespace hallmhd
