// Acceptance gate: one line per criterion, nonzero exit if any fail.
#include <chrono>
#include <cloakbench/experiments.hpp>
#include <cloakbench/materials.hpp>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "oracles/bhmie_ref.hpp"
#include "oracles/ode_oracle.hpp"
#include "support/layer_fields.hpp"

using namespace cloakbench;
using C = std::complex<double>;

namespace {

int g_failures = 0;

void report(int idx, const std::string& name, bool ok, const std::string& detail) {
  std::printf("[%s] criterion %d: %s (%s)\n", ok ? "PASS" : "FAIL", idx, name.c_str(),
              detail.c_str());
  if (!ok) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

SweepOptions acceptance_opts() {
  SweepOptions o;
  o.threads = 1;  // runtime budgets are quoted single-threaded
  return o;
}

CloakSpec classical_spec() {
  CloakSpec s;
  s.exps = exponents(0.0, 2.0, 0.0);
  s.eps_core = 2.0;
  return s;
}

const std::vector<double> kRhos = geometric_grid(0.1, 0.01, 6);

std::string fit_detail(const SweepResult& r, double elapsed) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "slope=%.3f r2=%.5f %.2fs", r.fit.slope, r.fit.r_squared,
                elapsed);
  return buf;
}

// --- criteria 1-6: rate sweeps ---

void criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = passive_rate_experiment(classical_spec(), kRhos, PlaneWave{}, acceptance_opts());
  const double dt = seconds_since(t0);
  report(1, "classical-layer passive rate",
         r.fit.slope >= 2.7 && r.fit.r_squared >= 0.99 && dt < 10.0, fit_detail(r, dt));
}

void criterion2() {
  CloakSpec s;
  s.exps = exponents(1.0, 1.0, 1.0);
  s.eps_core = 2.0;

  auto t0 = std::chrono::steady_clock::now();
  const auto rp = passive_rate_experiment(s, kRhos, PlaneWave{}, acceptance_opts());
  const double dtp = seconds_since(t0);

  s.sigma_core = 1.0;
  t0 = std::chrono::steady_clock::now();
  const auto ra = active_rate_experiment(
      s, kRhos, SourceSpec{CoreBallCurrent{0.3, CVec3{C(1.0), {}, {}}}}, acceptance_opts());
  const double dta = seconds_since(t0);

  report(2, "rho-independent layer rates",
         rp.fit.slope >= 1.7 && dtp < 10.0 && ra.fit.slope >= 0.7 && dta < 10.0,
         "passive " + fit_detail(rp, dtp) + "; active-core " + fit_detail(ra, dta));
}

void criterion3() {
  CloakSpec s = classical_spec();
  s.sigma_core = 1.0;
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = active_rate_experiment(
      s, kRhos, SourceSpec{CoreBallCurrent{0.3, CVec3{C(1.0), {}, {}}}}, acceptance_opts());
  const double dt = seconds_since(t0);
  report(3, "classical-layer active core rate", r.fit.slope >= 1.2 && dt < 10.0,
         fit_detail(r, dt));
}

void criterion4() {
  CloakSpec s;
  s.exps = exponents(0.0, 3.0, -3.0);
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = active_rate_experiment(
      s, kRhos, SourceSpec{ShellBallCurrent{0.6, 0.9, CVec3{C(1.0), {}, {}}}}, acceptance_opts());
  const double dt = seconds_since(t0);
  report(4, "shell-current rate vs zeta2", r.fit.slope >= 2.7 && dt < 10.0, fit_detail(r, dt));
}

void criterion5() {
  const auto taus = geometric_grid(0.3, 0.03, 6);
  const auto t0 = std::chrono::steady_clock::now();
  const auto rf = small_inclusion_experiment(taus, TraceMode::FixedProfile, 1.0, acceptance_opts());
  const auto ri =
      small_inclusion_experiment(taus, TraceMode::IncidentTrace, 1.0, acceptance_opts());
  const double dt = seconds_since(t0);
  report(5, "small-inclusion rates", rf.fit.slope >= 1.8 && ri.fit.slope >= 2.8 && dt < 5.0,
         "fixed " + fit_detail(rf, dt) + "; incident " + fit_detail(ri, dt));
}

void criterion6() {
  const double cores[3][3] = {{10.0, 1.0, 0.0}, {1.0, 5.0, 0.0}, {2.0, 1.0, 3.0}};
  bool ok = true;
  std::string detail;
  for (const auto& c : cores) {
    CloakSpec s = classical_spec();
    s.eps_core = c[0];
    s.mu_core = c[1];
    s.sigma_core = c[2];
    const auto r = passive_rate_experiment(s, kRhos, PlaneWave{}, acceptance_opts());
    ok = ok && r.fit.slope >= 2.7;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "(%g,%g,%g): %.3f ", c[0], c[1], c[2], r.fit.slope);
    detail += buf;
  }
  report(6, "content-independent passive rate", ok, detail);
}

// --- criterion 7: property suite ---

mie::LayeredSphere lossy_two_layer() {
  mie::LayeredSphere s;
  s.shells.push_back({0.4, C(2.0, 0.5), C(1.0)});
  s.shells.push_back({1.0, C(1.5, 0.0), C(1.2)});
  return s;
}

double wronskian_worst() {
  double worst = 0.0;
  const C zs[] = {{0.01, 0.5}, {1.0, 0.0},  {2.0, 3.0}, {0.3, 8.0},
                  {15.0, 0.1}, {40.0, 20.0}, {5.0, -4.0}};
  for (const C z : zs)
    for (int n = 0; n <= 50; ++n) {
      const auto psi = specfun::riccati_psi(n, z);
      const auto xi = specfun::riccati_xi(n, z);
      const C w = (psi.val() * xi.deriv()).value() - (psi.deriv() * xi.val()).value();
      worst = std::max(worst, std::abs(w - C(0.0, 1.0)));
    }
  // psi/chi pair where its conditioning allows a meaningful check
  const C zm[] = {{0.01, 0.5}, {1.0, 0.0}, {2.0, 3.0}, {15.0, 0.1}, {5.0, -4.0}};
  for (const C z : zm)
    for (int n = 0; n <= 50; ++n) {
      const auto psi = specfun::riccati_psi(n, z);
      const auto chi = specfun::riccati_chi(n, z);
      const C w = (psi.deriv() * chi.val()).value() - (psi.val() * chi.deriv()).value();
      worst = std::max(worst, std::abs(w - 1.0));
    }
  return worst;
}

double functoriality_worst() {
  std::mt19937 rng(20240817);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto rand_mat = [&] {
    Mat3 m;
    do {
      for (auto& v : m.m) v = u(rng);
    } while (std::abs(m.det()) < 0.1);
    return m;
  };
  auto rand_spd = [&] {
    const Mat3 a = rand_mat();
    return SymTensor3::from_mat3(a * a.transpose());
  };
  auto entry_diff = [](const SymTensor3& a, const SymTensor3& b) {
    return std::max({std::abs(a.xx - b.xx), std::abs(a.xy - b.xy), std::abs(a.xz - b.xz),
                     std::abs(a.yy - b.yy), std::abs(a.yz - b.yz), std::abs(a.zz - b.zz)});
  };
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const MaterialPoint m{rand_spd(), rand_spd(), rand_spd()};
    const Mat3 f = rand_mat(), g = rand_mat();
    const MapSample sf{{}, {}, f, f.det()};
    const MapSample sg{{}, {}, g, g.det()};
    const MapSample sgf{{}, {}, g * f, (g * f).det()};
    const MaterialPoint two_step = push_forward(push_forward(m, sf), sg);
    const MaterialPoint one_step = push_forward(m, sgf);
    const double scale = std::max(1.0, std::abs(one_step.eps.eigenvalues()[2]));
    worst = std::max({worst, entry_diff(two_step.eps, one_step.eps) / scale,
                      entry_diff(two_step.mu, one_step.mu) / scale,
                      entry_diff(two_step.sigma, one_step.sigma) / scale});
  }
  return worst;
}

double continuity_worst() {
  const auto s = lossy_two_layer();
  const double omega = 1.3;
  const auto sol = mie::plane_wave_solve_full(s, omega, PlaneWave{});
  double worst = 0.0;
  for (int iface = 0; iface < 2; ++iface) {
    const double rb = s.shells[iface].outer_radius;
    for (int it = 0; it < 8; ++it) {
      const double th = M_PI * (it + 0.5) / 8.0;
      const double ct = std::cos(th), st = std::sin(th);
      for (double ph : {0.3, 1.7, 4.1}) {
        const double cphi = std::cos(ph), sphi = std::sin(ph);
        CVec3 ea, ha, eb, hb;
        testsupport::layer_fields(sol.layers[iface], omega, rb, ct, cphi, sphi, ea, ha);
        if (iface == 0) {
          testsupport::layer_fields(sol.layers[1], omega, rb, ct, cphi, sphi, eb, hb);
        } else {
          const Vec3 x{rb * st * cphi, rb * st * sphi, rb * ct};
          CVec3 es, hs, ei, hi;
          mie::exterior_field(sol.coeffs, x, es, hs);
          mie::incident_field(PlaneWave{}, omega, x, ei, hi);
          eb = es + ei;
          hb = hs + hi;
        }
        const Vec3 nu{st * cphi, st * sphi, ct};
        auto tang = [&](const CVec3& v) { return v - CVec3(nu) * dot(v, nu); };
        worst = std::max(worst, norm(tang(ea) - tang(eb)));
        worst = std::max(worst, norm(tang(ha) - tang(hb)));
      }
    }
  }
  return worst;
}

double energy_worst() {
  const auto grid = make_grid(64, 128);
  double worst = 0.0;

  // two passive plane-wave configurations
  worst = std::max(
      worst, mie::energy_balance(mie::plane_wave_solve_full(lossy_two_layer(), 1.3, PlaneWave{}),
                                 1.5, grid)
                 .residual);
  mie::LayeredSphere cond;
  cond.shells.push_back({0.05, C(10.0, 200.0), C(2.0)});
  cond.shells.push_back({0.1, C(1.0, 100.0), C(1.0)});
  worst = std::max(
      worst,
      mie::energy_balance(mie::plane_wave_solve_full(cond, 1.0, PlaneWave{}), 0.2, grid).residual);

  // the regularized cloak itself
  CloakSpec spec = classical_spec();
  spec.rho = 0.05;
  const auto scat = virtual_scatterer(spec);
  worst = std::max(
      worst, mie::energy_balance(mie::plane_wave_solve_full(scat, spec.omega, PlaneWave{}),
                                 2.0 * scat.outer_radius(), grid)
                 .residual);

  // two sourced configurations
  worst = std::max(worst, mie::energy_balance(mie::current_n1_solve(lossy_two_layer(), 1.3,
                                                                    CoreBallCurrent{
                                                                        0.3, CVec3{C(1.0), {}, {}}}),
                                              1.5, grid)
                              .residual);
  worst = std::max(worst, mie::energy_balance(
                              mie::current_n1_solve(lossy_two_layer(), 1.3,
                                                    ShellBallCurrent{0.3, 0.7,
                                                                     CVec3{C(1.0), {}, {}}}),
                              1.5, grid)
                              .residual);
  return worst;
}

double optical_theorem_worst() {
  PlaneWave inc;
  inc.khat = normalized(Vec3{1.0, 2.0, 2.0});
  const Vec3 p = normalized(cross(inc.khat, Vec3{0, 0, 1}));
  inc.pol = CVec3{C(p.x, 0.3), C(p.y, 0.0), C(p.z, 0.0)};
  inc.pol = inc.pol - CVec3(inc.khat) * dot(inc.pol, inc.khat);
  const double omega = 1.3;
  const auto c = mie::plane_wave_solve(lossy_two_layer(), omega, inc);
  const auto cs = mie::cross_sections(c);
  const CVec3 fwd = mie::far_field(c, inc.khat);
  const double pol2 = norm(inc.pol) * norm(inc.pol);
  const double ext_fwd = 4.0 * M_PI / omega * dot(fwd, conj(inc.pol)).imag() / pol2;
  return std::abs(cs.extinction - ext_fwd) / cs.extinction;
}

double two_route_worst() {
  const double omega = 1.3;
  const auto c = mie::plane_wave_solve(lossy_two_layer(), omega, PlaneWave{});
  const auto grid = make_grid(64, 128);
  const auto tr = mie::near_field_trace(c, nullptr, 1.6, grid);
  double worst = 0.0;
  for (Vec3 u : {Vec3{0, 0, 1}, Vec3{1, 0, 0}, Vec3{0.36, 0.48, 0.8}, Vec3{-0.6, 0.64, -0.48}}) {
    u = normalized(u);
    worst = std::max(worst, norm(mie::far_field(c, u) -
                                 mie::far_field_via_surface_integral(tr, grid, 1.6, omega, u)));
  }
  return worst;
}

double rotation_worst() {
  const double omega = 1.3;
  const auto c1 = mie::plane_wave_solve(lossy_two_layer(), omega, PlaneWave{});
  const Mat3 rot = rotation_about(normalized(Vec3{1.0, -2.0, 0.5}), 1.1);
  PlaneWave rotated;
  rotated.khat = rot.apply(Vec3{0, 0, 1});
  rotated.pol = CVec3(rot.apply(Vec3{1, 0, 0}));
  const auto c2 = mie::plane_wave_solve(lossy_two_layer(), omega, rotated);
  double worst = 0.0;
  for (Vec3 u : {Vec3{0, 0, 1}, Vec3{0.36, 0.48, 0.8}, Vec3{-0.6, 0.64, -0.48}}) {
    u = normalized(u);
    worst = std::max(worst, norm(rot.apply(mie::far_field(c1, u)) -
                                 mie::far_field(c2, rot.apply(u))));
  }
  return worst;
}

void criterion7() {
  struct Check {
    const char* name;
    double value;
    double bound;
  };
  const Check checks[] = {
      {"wronskian", wronskian_worst(), 1e-10},
      {"functoriality", functoriality_worst(), 1e-12},
      {"continuity", continuity_worst(), 1e-10},
      {"energy", energy_worst(), 1e-8},
      {"optical", optical_theorem_worst(), 1e-10},
      {"two-route", two_route_worst(), 1e-6},
      {"rotation", rotation_worst(), 1e-10},
  };
  bool ok = true;
  std::string detail;
  for (const auto& c : checks) {
    ok = ok && c.value <= c.bound;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s=%.1e ", c.name, c.value);
    detail += buf;
  }
  report(7, "property suite", ok, detail);
}

// --- criterion 8: oracle equivalence ---

void criterion8() {
  double mie_worst = 0.0;
  for (double x : {0.5, 1.0, 5.0}) {
    for (C m : {C(1.5, 0.1), C(3.0, 2.0)}) {
      mie::LayeredSphere s;
      s.shells.push_back({x, m * m, C(1.0)});
      const auto c = mie::plane_wave_solve(s, 1.0, PlaneWave{});
      std::vector<C> a, b;
      oracle::bhmie(x, m, c.cutoff(), a, b);
      double peak = 0.0, diff = 0.0;
      for (int n = 0; n < c.cutoff(); ++n) {
        peak = std::max({peak, std::abs(a[n]), std::abs(b[n])});
        diff = std::max({diff, std::abs(a[n] - c.a[n]), std::abs(b[n] - c.b[n])});
      }
      mie_worst = std::max(mie_worst, diff / peak);
    }
  }

  double ode_worst = 0.0;
  struct Cfg {
    std::vector<oracle::OdeLayer> layers;
    double omega;
  };
  const Cfg cfgs[] = {
      {{{0.4, C(2.0, 0.5), C(1.0)}, {1.0, C(1.5, 0.0), C(1.2)}}, 1.3},
      {{{0.3, C(3.0, 2.0), C(2.0)}, {0.6, C(1.2, 0.0), C(0.8)}, {1.0, C(2.5, 0.1), C(1.5, 0.3)}},
       0.9},
      {{{1.0, C(4.0, 3.0), C(1.0)}}, 2.0},
  };
  for (const auto& cf : cfgs) {
    mie::LayeredSphere s;
    for (const auto& l : cf.layers) s.shells.push_back({l.r_out, l.eps, l.mu});
    const auto c = mie::plane_wave_solve(s, cf.omega, PlaneWave{});
    const int nmax = std::min(6, c.cutoff());
    std::vector<C> a, b;
    oracle::ode_mie(cf.layers, cf.omega, nmax, a, b);
    double peak = 0.0, diff = 0.0;
    for (int n = 0; n < nmax; ++n) {
      peak = std::max({peak, std::abs(a[n]), std::abs(b[n])});
      diff = std::max({diff, std::abs(a[n] - c.a[n]), std::abs(b[n] - c.b[n])});
    }
    ode_worst = std::max(ode_worst, diff / peak);
  }

  double src_worst = 0.0;
  const auto s = lossy_two_layer();
  std::vector<oracle::OdeLayer> layers;
  for (const auto& sh : s.shells) layers.push_back({sh.outer_radius, sh.eps, sh.mu});
  const double pairs[3][2] = {{0.0, 0.3}, {0.3, 0.7}, {1.2, 1.5}};
  for (const auto& p : pairs) {
    const C q = oracle::ode_current(layers, 1.3, p[0], p[1]);
    const C got = p[0] == 0.0
                      ? mie::current_n1_solve(s, 1.3, CoreBallCurrent{p[1], CVec3{C(1.0), {}, {}}})
                            .transfer
                      : mie::current_n1_solve(s, 1.3,
                                              ShellBallCurrent{p[0], p[1], CVec3{C(1.0), {}, {}}})
                            .transfer;
    src_worst = std::max(src_worst, std::abs(got - q) / std::abs(q));
  }

  char buf[128];
  std::snprintf(buf, sizeof(buf), "single=%.1e layered=%.1e sourced=%.1e", mie_worst, ode_worst,
                src_worst);
  report(8, "oracle equivalence", mie_worst <= 1e-12 && ode_worst <= 1e-8 && src_worst <= 1e-8,
         buf);
}

// --- criterion 9: determinism ---

void criterion9() {
  SweepOptions o1 = acceptance_opts();
  o1.threads = 4;
  SweepOptions o2 = acceptance_opts();
  const auto r1 = passive_rate_experiment(classical_spec(), kRhos, PlaneWave{}, o1);
  const auto r2 = passive_rate_experiment(classical_spec(), kRhos, PlaneWave{}, o2);
  const bool ok = sweep_to_json(r1) == sweep_to_json(r2) && sweep_to_csv(r1) == sweep_to_csv(r2);
  report(9, "deterministic serialization", ok,
         ok ? "byte-identical across thread counts" : "outputs differ");
}

}  // namespace

int main() {
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  criterion9();
  if (g_failures > 0) {
    std::printf("ACCEPTANCE: %d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("ACCEPTANCE: all criteria passed\n");
  return 0;
}
