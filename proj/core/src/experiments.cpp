#include "cloakbench/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>

#include "json.hpp"

namespace cloakbench {

namespace {

using nlohmann::json;

// Run one job per point with a bounded number of concurrent workers; results
// land at fixed indices, so output order never depends on scheduling.
template <typename Fn>
std::vector<SweepPoint> run_points(int count, int threads, Fn&& job) {
  std::vector<SweepPoint> pts(count);
  const int width = std::max(1, threads);
  for (int base = 0; base < count; base += width) {
    std::vector<std::future<SweepPoint>> batch;
    const int end = std::min(count, base + width);
    for (int i = base; i < end; ++i) batch.push_back(std::async(std::launch::async, job, i));
    for (int i = base; i < end; ++i) pts[i] = batch[i - base].get();
  }
  return pts;
}

void finish(SweepResult& r, double predicted, const SweepOptions& opts) {
  std::vector<double> scales, sups, l2s;
  for (const auto& p : r.points) {
    scales.push_back(p.scale);
    sups.push_back(p.sup);
    l2s.push_back(p.l2);
  }
  r.fit = fit_slope(scales, sups);
  r.fit_l2 = fit_slope(scales, l2s);
  r.predicted = predicted;
  r.pass = r.fit.slope >= predicted - opts.slope_tolerance && r.fit.r_squared >= opts.r2_floor;
}

CloakSpec at_rho(const CloakSpec& base, double rho) {
  CloakSpec s = base;
  s.rho = rho;
  return s;
}

}  // namespace

FitResult fit_slope(const std::vector<double>& scales, const std::vector<double>& norms) {
  FitResult f;
  const size_t n = std::min(scales.size(), norms.size());
  if (n < 2) return f;
  if (std::all_of(scales.begin(), scales.end(), [&](double s) { return s == scales[0]; }))
    throw mie::SolverError("degenerate-abscissa", "slope fit needs at least two distinct scales");
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (size_t i = 0; i < n; ++i) {
    const double x = -std::log(scales[i]);  // log(1/scale)
    const double y = std::log(std::max(norms[i], 1e-300));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
  }
  const double dn = n * sxx - sx * sx;
  if (dn == 0.0) return f;
  // Decay rate reported positive: norm ~ scale^slope means y = -slope x + c.
  const double raw = (n * sxy - sx * sy) / dn;
  f.slope = -raw;
  f.intercept = (sy - raw * sx) / n;
  const double ss_res = syy - sy * sy / n - raw * (sxy - sx * sy / n);
  const double ss_tot = syy - sy * sy / n;
  f.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return f;
}

std::vector<double> geometric_grid(double hi, double lo, int n) {
  std::vector<double> g;
  if (n < 1) return g;
  if (n == 1) return {hi};
  const double q = std::pow(lo / hi, 1.0 / (n - 1));
  double v = hi;
  for (int i = 0; i < n; ++i) {
    g.push_back(v);
    v *= q;
  }
  g.back() = lo;
  return g;
}

SweepResult passive_rate_experiment(const CloakSpec& base, const std::vector<double>& rhos,
                                    const PlaneWave& inc, const SweepOptions& opts) {
  const SphereGrid grid = make_grid(opts.n_polar, opts.n_azimuth);
  SweepResult r;
  r.experiment = "passive";
  r.points = run_points(static_cast<int>(rhos.size()), opts.threads, [&](int i) {
    const CloakSpec spec = at_rho(base, rhos[i]);
    const auto sol = mie::plane_wave_solve_full(virtual_scatterer(spec), spec.omega, inc);
    const auto pattern = mie::far_field_pattern(sol.coeffs, grid);
    const auto eb = mie::energy_balance(sol, 2.0 * sol.sphere.outer_radius(), grid);
    return SweepPoint{rhos[i], sup_norm(pattern), l2_norm(pattern), eb.residual};
  });
  finish(r, predicted_rates(base.exps).passive, opts);
  return r;
}

SweepResult active_rate_experiment(const CloakSpec& base, const std::vector<double>& rhos,
                                   const SourceSpec& src, const SweepOptions& opts) {
  const bool core_src = std::holds_alternative<CoreBallCurrent>(src);
  if (!core_src && !std::holds_alternative<ShellBallCurrent>(src))
    throw mie::SolverError("unsupported-source", "active sweep needs a ball or shell current");
  if (core_src && !(base.sigma_core >= kScaleFloor))
    throw mie::SolverError("invalid-spec", "core ball currents need a conducting core");

  const SphereGrid grid = make_grid(opts.n_polar, opts.n_azimuth);
  SweepResult r;
  r.experiment = core_src ? "active-core" : "active-shell";
  r.points = run_points(static_cast<int>(rhos.size()), opts.threads, [&](int i) {
    const CloakSpec spec = at_rho(base, rhos[i]);
    const auto scat = virtual_scatterer(spec);
    const SourceSpec vsrc = virtual_source(spec, src);
    mie::CurrentSolution sol =
        core_src ? mie::current_n1_solve(scat, spec.omega, std::get<CoreBallCurrent>(vsrc))
                 : mie::current_n1_solve(scat, spec.omega, std::get<ShellBallCurrent>(vsrc));
    const auto pattern = mie::far_field_pattern(sol.coeffs, grid);
    const double balance_r = 2.0 * std::max(scat.outer_radius(), sol.src_r_outer);
    const auto eb = mie::energy_balance(sol, balance_r, grid);
    return SweepPoint{rhos[i], sup_norm(pattern), l2_norm(pattern), eb.residual};
  });
  const PredictedRates p = predicted_rates(base.exps);
  finish(r, core_src ? p.active_core : p.active_shell, opts);
  return r;
}

SweepResult small_inclusion_experiment(const std::vector<double>& taus, TraceMode mode,
                                       double omega, const SweepOptions& opts) {
  const SphereGrid grid = make_grid(opts.n_polar, opts.n_azimuth);
  SweepResult r;
  r.experiment = mode == TraceMode::FixedProfile ? "inclusion-fixed" : "inclusion-incident";
  r.points = run_points(static_cast<int>(taus.size()), opts.threads, [&](int i) {
    const double tau = taus[i];
    TangentialTrace trace;
    if (mode == TraceMode::FixedProfile) {
      trace.e.assign(3, Complex(1.0));
      trace.f.assign(3, Complex(1.0));
    } else {
      trace = mie::plane_wave_trace(omega, tau, 4);
    }
    const auto coeffs = mie::exterior_trace_solve(tau, omega, trace);
    const auto pattern = mie::far_field_pattern(coeffs, grid);
    return SweepPoint{tau, sup_norm(pattern), l2_norm(pattern), 0.0};
  });
  finish(r, mode == TraceMode::FixedProfile ? 2.0 : 3.0, opts);
  return r;
}

CloakBustResult cloak_bust_experiment(const CloakSpec& base, const std::vector<double>& rhos,
                                      const PlaneWave& inc, const SweepOptions& opts) {
  CloakBustResult out;
  out.with_layer = passive_rate_experiment(base, rhos, inc, opts);

  const SphereGrid grid = make_grid(opts.n_polar, opts.n_azimuth);
  auto bare_core = [&](const CloakSpec& spec, double eps) {
    mie::LayeredSphere s;
    s.shells.push_back({spec.rho * spec.r_inner / 2.0, Complex(eps / spec.rho),
                        Complex(spec.mu_core / spec.rho)});
    return s;
  };

  out.no_layer_benign.experiment = "no-layer-benign";
  out.no_layer_benign.points = run_points(static_cast<int>(rhos.size()), opts.threads, [&](int i) {
    const CloakSpec spec = at_rho(base, rhos[i]);
    const auto coeffs = mie::plane_wave_solve(bare_core(spec, spec.eps_core), spec.omega, inc);
    const auto pattern = mie::far_field_pattern(coeffs, grid);
    return SweepPoint{rhos[i], sup_norm(pattern), l2_norm(pattern), 0.0};
  });
  finish(out.no_layer_benign, 0.0, opts);

  // Adversarial content: per rho, maximize the far-field norm over a lossless
  // high-contrast core permittivity scan with no conducting layer.
  out.core_eps_grid = geometric_grid(1e4, 1.0, 20);
  out.no_layer_worst.experiment = "no-layer-worst";
  out.no_layer_worst.points = run_points(static_cast<int>(rhos.size()), opts.threads, [&](int i) {
    const CloakSpec spec = at_rho(base, rhos[i]);
    SweepPoint pt{rhos[i], 0.0, 0.0, 0.0};
    for (double eps : out.core_eps_grid) {
      const auto coeffs = mie::plane_wave_solve(bare_core(spec, eps), spec.omega, inc);
      const auto pattern = mie::far_field_pattern(coeffs, grid);
      const double s = sup_norm(pattern);
      if (s > pt.sup) {
        pt.sup = s;
        pt.l2 = l2_norm(pattern);
      }
    }
    return pt;
  });
  finish(out.no_layer_worst, 0.0, opts);
  return out;
}

std::string sweep_to_json(const SweepResult& r) {
  json j;
  j["experiment"] = r.experiment;
  j["predicted"] = r.predicted;
  j["pass"] = r.pass;
  j["slope"] = r.fit.slope;
  j["intercept"] = r.fit.intercept;
  j["r2"] = r.fit.r_squared;
  j["l2_fit"] = {{"slope", r.fit_l2.slope},
                 {"intercept", r.fit_l2.intercept},
                 {"r2", r.fit_l2.r_squared}};
  j["points"] = json::array();
  for (const auto& p : r.points)
    j["points"].push_back({{"rho", p.scale},
                           {"norm", p.sup},
                           {"l2", p.l2},
                           {"energy_residual", p.energy_residual}});
  return j.dump(2) + "\n";
}

std::string sweep_to_csv(const SweepResult& r) {
  std::string out = "rho,norm,l2,energy_residual\n";
  char buf[160];
  for (const auto& p : r.points) {
    std::snprintf(buf, sizeof(buf), "%.17e,%.17e,%.17e,%.17e\n", p.scale, p.sup, p.l2,
                  p.energy_residual);
    out += buf;
  }
  return out;
}

}  // namespace cloakbench
