#include <CLI11.hpp>
#include <cloakbench/experiments.hpp>
#include <cloakbench/materials.hpp>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <map>
#include <sstream>
#include <string>
#include <thread>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace cloakbench;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitExponents = 2;
constexpr int kExitSolver = 3;
constexpr int kExitSweepFail = 4;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// TOML-style key/value config: `key = value` lines grouped under [section]
// headers, '#' comments, quoted strings, bare numbers and booleans.
struct Config {
  std::map<std::string, std::string> kv;  // "section.key" -> raw token
  std::string path;

  bool has(const std::string& key) const { return kv.count(key) > 0; }

  std::string str(const std::string& key) const {
    auto it = kv.find(key);
    if (it == kv.end()) throw ConfigError("missing required key \"" + key + "\" in " + path);
    return it->second;
  }

  std::string str_or(const std::string& key, const std::string& def) const {
    auto it = kv.find(key);
    return it == kv.end() ? def : it->second;
  }

  double num(const std::string& key) const {
    const std::string s = str(key);
    try {
      size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ConfigError("key \"" + key + "\" is not a number: '" + s + "'");
    }
  }

  double num_or(const std::string& key, double def) const { return has(key) ? num(key) : def; }
  int int_or(const std::string& key, int def) const {
    return has(key) ? static_cast<int>(num(key)) : def;
  }
};

Config parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  Config cfg;
  cfg.path = path;
  std::string line, section;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(path + ":" + std::to_string(lineno) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
      value = value.substr(1, value.size() - 2);
    cfg.kv[section.empty() ? key : section + "." + key] = value;
  }
  return cfg;
}

json config_echo(const Config& cfg) {
  json echo = json::object();
  for (const auto& [key, raw] : cfg.kv) {
    json value;
    try {
      size_t used = 0;
      const double v = std::stod(raw, &used);
      value = used == raw.size() ? json(v) : json(raw);
    } catch (const std::exception&) {
      value = raw == "true" ? json(true) : raw == "false" ? json(false) : json(raw);
    }
    const auto dot = key.find('.');
    if (dot == std::string::npos)
      echo[key] = value;
    else
      echo[key.substr(0, dot)][key.substr(dot + 1)] = value;
  }
  return echo;
}

int resolve_threads(int flag_value) {
  int n = flag_value;
  if (n < 0) {
    if (const char* env = std::getenv("CLOAKBENCH_THREADS")) n = std::atoi(env);
  }
  if (n < 0) n = 1;
  if (n == 0) n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  return n;
}

CloakSpec spec_from(const Config& cfg) {
  CloakSpec s;
  s.omega = cfg.num("omega");
  s.exps = exponents(cfg.num("exponents.r"), cfg.num("exponents.s"), cfg.num("exponents.t"));
  s.alpha = cfg.num_or("layer.alpha", 1.0);
  s.beta = cfg.num_or("layer.beta", 1.0);
  s.eta = cfg.num_or("layer.eta", 1.0);
  s.eps_core = cfg.num_or("core.eps", 1.0);
  s.mu_core = cfg.num_or("core.mu", 1.0);
  s.sigma_core = cfg.num_or("core.sigma", 0.0);
  s.r_inner = cfg.num_or("geometry.r_inner", 1.0);
  s.r_outer = cfg.num_or("geometry.r_outer", 2.0);
  return s;
}

SourceSpec source_from(const Config& cfg) {
  const std::string kind = cfg.str("source.kind");
  const CVec3 density{Complex(cfg.num_or("source.jx", 1.0)), Complex(cfg.num_or("source.jy", 0.0)),
                      Complex(cfg.num_or("source.jz", 0.0))};
  if (kind == "core-ball") return CoreBallCurrent{cfg.num("source.radius"), density};
  if (kind == "shell")
    return ShellBallCurrent{cfg.num("source.r_inner"), cfg.num("source.r_outer"), density};
  throw ConfigError("key \"source.kind\" must be 'core-ball' or 'shell', got '" + kind + "'");
}

SweepOptions options_from(const Config& cfg, int threads, double tolerance) {
  SweepOptions o;
  o.n_polar = cfg.int_or("grid.polar", 64);
  o.n_azimuth = cfg.int_or("grid.azimuth", 128);
  o.threads = threads;
  if (tolerance > 0.0) o.slope_tolerance = tolerance;
  return o;
}

void write_file(const fs::path& dir, const std::string& name, const std::string& body) {
  fs::create_directories(dir);
  std::ofstream out(dir / name, std::ios::binary);
  out << body;
  if (!out) throw ConfigError("cannot write " + (dir / name).string());
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// --- exponents ---

int cmd_exponents(double r, double s, double t) {
  const LayerExponents e = exponents(r, s, t);
  const PredictedRates p = predicted_rates(e);
  json j;
  j["zeta1"] = e.zeta1;
  j["zeta2"] = e.zeta2;
  j["valid"] = e.valid;
  j["rates"] = {
      {"passive", p.passive}, {"active_core", p.active_core}, {"active_shell", p.active_shell}};
  if (!e.valid) j["note"] = e.note;
  std::printf("%s\n", j.dump(2).c_str());
  return e.valid ? kExitOk : kExitExponents;
}

// --- solve ---

int cmd_solve(const Config& cfg, const fs::path& out_dir, int threads) {
  (void)threads;  // a single solve has no per-point parallelism
  const double omega = cfg.num("omega");
  mie::LayeredSphere scatterer;
  CloakSpec spec;
  const bool vacuum = cfg.str_or("medium", "cloak") == "vacuum";
  if (vacuum) {
    scatterer.shells.push_back({1.0, Complex(1.0), Complex(1.0)});  // zero contrast
  } else {
    spec = spec_from(cfg);
    spec.rho = cfg.num("solve.rho");
    if (!spec.exps.valid) {
      std::fprintf(stderr, "error: invalid exponents: %s\n", spec.exps.note.c_str());
      return kExitExponents;
    }
    spec.validate();
    scatterer = virtual_scatterer(spec);
  }
  const auto sol = mie::plane_wave_solve_full(scatterer, omega, PlaneWave{});

  const auto grid = make_grid(cfg.int_or("grid.polar", 64), cfg.int_or("grid.azimuth", 128));
  std::string csv = "theta,phi,re_e_theta,im_e_theta,re_e_phi,im_e_phi,magnitude\n";
  for (const auto& u : grid.nodes) {
    const CVec3 f = mie::far_field(sol.coeffs, u);
    const double theta = std::acos(std::clamp(u.z, -1.0, 1.0));
    const double phi = std::atan2(u.y, u.x);
    const double st = std::sin(theta);
    const Vec3 theta_hat = st > 1e-14 ? Vec3{u.z * u.x / st, u.z * u.y / st, -st} : Vec3{1, 0, 0};
    const Vec3 phi_hat = st > 1e-14 ? Vec3{-u.y / st, u.x / st, 0.0} : Vec3{0, 1, 0};
    const Complex ft = dot(f, theta_hat), fp = dot(f, phi_hat);
    csv += fmt(theta) + "," + fmt(phi) + "," + fmt(ft.real()) + "," + fmt(ft.imag()) + "," +
           fmt(fp.real()) + "," + fmt(fp.imag()) + "," + fmt(norm(f)) + "\n";
  }
  write_file(out_dir, "farfield.csv", csv);

  json coeffs;
  coeffs["omega"] = omega;
  coeffs["cutoff"] = sol.coeffs.cutoff();
  coeffs["a"] = json::array();
  coeffs["b"] = json::array();
  for (int n = 0; n < sol.coeffs.cutoff(); ++n) {
    coeffs["a"].push_back({sol.coeffs.a[n].real(), sol.coeffs.a[n].imag()});
    coeffs["b"].push_back({sol.coeffs.b[n].real(), sol.coeffs.b[n].imag()});
  }
  write_file(out_dir, "coefficients.json", coeffs.dump(2) + "\n");

  const double balance_r = std::max(1.0, 2.0 * scatterer.outer_radius());
  const auto eb = mie::energy_balance(sol, balance_r, grid);
  const auto cs = mie::cross_sections(sol.coeffs);
  json diag;
  diag["energy_residual"] = eb.residual;
  diag["absorbed"] = eb.absorbed;
  diag["cross_sections"] = {
      {"scattering", cs.scattering}, {"extinction", cs.extinction}, {"absorption", cs.absorption}};
  diag["config_echo"] = config_echo(cfg);
  write_file(out_dir, "diagnostics.json", diag.dump(2) + "\n");
  return kExitOk;
}

// --- sweep ---

int emit_sweep(const SweepResult& r, const json& echo, const fs::path& out_dir,
               double tolerance) {
  json j = json::parse(sweep_to_json(r));
  j["config_echo"] = echo;
  write_file(out_dir, "sweep.json", j.dump(2) + "\n");
  write_file(out_dir, "sweep.csv", sweep_to_csv(r));
  std::printf("slope=%.3f predicted>=%.3f %s\n", r.fit.slope, r.predicted - tolerance,
              r.pass ? "pass" : "fail");
  return r.pass ? kExitOk : kExitSweepFail;
}

int cmd_selftest(const std::string& mode, const fs::path& out_dir) {
  const std::string prefix = "powerlaw:";
  if (mode.rfind(prefix, 0) != 0)
    throw ConfigError("unknown selftest mode '" + mode + "' (expected powerlaw:<k>)");
  const double k = std::stod(mode.substr(prefix.size()));
  SweepResult r;
  r.experiment = "selftest-powerlaw";
  for (double rho : geometric_grid(0.1, 0.01, 6)) {
    const double v = std::pow(rho, k);
    r.points.push_back({rho, v, v, 0.0});
  }
  std::vector<double> scales, norms;
  for (const auto& p : r.points) {
    scales.push_back(p.scale);
    norms.push_back(p.sup);
  }
  r.fit = fit_slope(scales, norms);
  r.fit_l2 = r.fit;
  r.predicted = k;
  r.pass = r.fit.slope >= k - 1e-9;
  return emit_sweep(r, json::object(), out_dir, 0.0);
}

int cmd_sweep(const Config& cfg, const fs::path& out_dir, int threads, double tolerance) {
  const std::string kind = cfg.str("experiment");
  const SweepOptions opts = options_from(cfg, threads, tolerance);
  const json echo = config_echo(cfg);

  if (kind == "small-inclusion-fixed" || kind == "small-inclusion-incident") {
    const auto taus = geometric_grid(cfg.num_or("sweep.tau_hi", 0.3),
                                     cfg.num_or("sweep.tau_lo", 0.03),
                                     cfg.int_or("sweep.points", 6));
    const auto mode = kind == "small-inclusion-fixed" ? TraceMode::FixedProfile
                                                      : TraceMode::IncidentTrace;
    return emit_sweep(small_inclusion_experiment(taus, mode, cfg.num("omega"), opts), echo,
                      out_dir, opts.slope_tolerance);
  }

  CloakSpec base = spec_from(cfg);
  if (!base.exps.valid) {
    std::fprintf(stderr, "error: invalid exponents: %s\n", base.exps.note.c_str());
    return kExitExponents;
  }
  const auto rhos = geometric_grid(cfg.num_or("sweep.rho_hi", 0.1),
                                   cfg.num_or("sweep.rho_lo", 0.01),
                                   cfg.int_or("sweep.points", 6));

  if (kind == "passive")
    return emit_sweep(passive_rate_experiment(base, rhos, PlaneWave{}, opts), echo, out_dir,
                      opts.slope_tolerance);
  if (kind == "active-core" || kind == "active-shell")
    return emit_sweep(active_rate_experiment(base, rhos, source_from(cfg), opts), echo, out_dir,
                      opts.slope_tolerance);
  if (kind == "cloak-bust") {
    const auto bust = cloak_bust_experiment(base, rhos, PlaneWave{}, opts);
    json extra;
    extra["no_layer_benign"] = json::parse(sweep_to_json(bust.no_layer_benign));
    extra["no_layer_worst"] = json::parse(sweep_to_json(bust.no_layer_worst));
    extra["core_eps_grid"] = bust.core_eps_grid;
    write_file(out_dir, "cloak_bust.json", extra.dump(2) + "\n");
    return emit_sweep(bust.with_layer, echo, out_dir, opts.slope_tolerance);
  }
  throw ConfigError("key \"experiment\" names an unknown sweep kind '" + kind + "'");
}

// --- export-tensors ---

int cmd_export_tensors(const Config& cfg, const fs::path& out_dir) {
  CloakSpec spec = spec_from(cfg);
  spec.rho = cfg.num("solve.rho");
  if (!spec.exps.valid) {
    std::fprintf(stderr, "error: invalid exponents: %s\n", spec.exps.note.c_str());
    return kExitExponents;
  }
  spec.validate();
  const auto rows = tensor_grid(spec, cfg.int_or("tensors.radial", 8),
                                cfg.int_or("tensors.polar", 4), cfg.int_or("tensors.azimuth", 8));
  write_file(out_dir, "tensors.csv", tensor_grid_csv(rows));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cloakbench: regularized near-cloak rate experiments"};
  app.require_subcommand(1);

  double er = 0.0, es = 2.0, et = 0.0;
  auto* sub_exp = app.add_subcommand("exponents", "print decay exponents for a layer triple");
  sub_exp->add_option("-r", er, "radial growth exponent r");
  sub_exp->add_option("-s", es, "conductivity exponent s");
  sub_exp->add_option("-t", et, "permeability exponent t");

  std::string config_path, out_dir = ".", selftest;
  int threads = -1;
  double tolerance = 0.0;
  auto add_io = [&](CLI::App* sub, bool need_config) {
    auto* opt = sub->add_option("--config", config_path, "experiment config file");
    if (need_config) opt->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--threads", threads, "worker threads (0 = all cores)");
    sub->add_option("--tolerance", tolerance, "slope tolerance override");
  };

  auto* sub_solve = app.add_subcommand("solve", "single solve: far field plus diagnostics");
  add_io(sub_solve, true);
  auto* sub_sweep = app.add_subcommand("sweep", "rate sweep with slope fit");
  add_io(sub_sweep, false);
  sub_sweep->add_option("--selftest", selftest, "synthetic data mode, e.g. powerlaw:3");
  auto* sub_export = app.add_subcommand("export-tensors", "sample physical cloak tensors to CSV");
  add_io(sub_export, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (sub_exp->parsed()) return cmd_exponents(er, es, et);
    const int nthreads = resolve_threads(threads);
    if (sub_sweep->parsed() && !selftest.empty()) return cmd_selftest(selftest, out_dir);
    const Config cfg = parse_config(config_path.empty()
                                        ? throw ConfigError("missing required flag --config")
                                        : config_path);
    if (sub_solve->parsed()) return cmd_solve(cfg, out_dir, nthreads);
    if (sub_sweep->parsed()) return cmd_sweep(cfg, out_dir, nthreads, tolerance);
    if (sub_export->parsed()) return cmd_export_tensors(cfg, out_dir);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const mie::SolverError& e) {
    std::fprintf(stderr, "error [%s]: %s\n", e.code.c_str(), e.what());
    return e.code == "invalid-spec" ? kExitConfig : kExitSolver;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitSolver;
  }
  return kExitOk;
}
