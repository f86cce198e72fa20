#include "cloakbench/mie.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "cloakbench/quadrature.hpp"

namespace cloakbench::mie {

namespace {

using specfun::RiccatiPair;
using specfun::ScaledC;

const Complex kI(0.0, 1.0);

Complex wavenumber(double omega, Complex eps, Complex mu) {
  Complex k = omega * std::sqrt(eps * mu);
  if (k.imag() < 0.0) k = -k;  // passive branch
  return k;
}

Complex i_pow(int n) {
  static const Complex table[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  return table[((n % 4) + 4) % 4];
}

// E_n = i^n (2n+1)/(n(n+1)), the plane-wave expansion weight.
Complex mode_weight(int n) { return i_pow(n) * ((2.0 * n + 1.0) / (n * (n + 1.0))); }

ScaledC sc_add(const ScaledC& a, const ScaledC& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  if (a.log_scale >= b.log_scale)
    return ScaledC{a.mantissa + b.mantissa * std::exp(b.log_scale - a.log_scale), a.log_scale}.normalized();
  return ScaledC{b.mantissa + a.mantissa * std::exp(a.log_scale - b.log_scale), b.log_scale}.normalized();
}

ScaledC sc_sub(const ScaledC& a, const ScaledC& b) { return sc_add(a, b * Complex(-1.0)); }

ScaledC sc_ratio(const ScaledC& num, const ScaledC& den) {
  if (den.is_zero()) throw SolverError("resonance-division", "scaled ratio: zero denominator");
  if (num.is_zero()) return {};
  return ScaledC{num.mantissa / den.mantissa, num.log_scale - den.log_scale}.normalized();
}

// 2x2 Cramer solve with scaled entries.
void solve2(const ScaledC& a11, const ScaledC& a12, const ScaledC& a21, const ScaledC& a22,
            const ScaledC& b1, const ScaledC& b2, ScaledC& x1, ScaledC& x2) {
  const ScaledC det = sc_sub(a11 * a22, a12 * a21);
  x1 = sc_ratio(sc_sub(b1 * a22, a12 * b2), det);
  x2 = sc_ratio(sc_sub(a11 * b2, b1 * a21), det);
}

int initial_cutoff(double x) {
  const int n = static_cast<int>(std::ceil(x + 4.05 * std::cbrt(std::max(x, 0.0)) + 2.0));
  return std::clamp(n, 4, specfun::kDefaultNMax);
}

struct LayerFns {
  Complex k, mu;
  double r_in = 0.0, r_out = 0.0;
  std::vector<RiccatiPair> psi_out, xi_out;  // at k * r_out
  std::vector<RiccatiPair> psi_in, xi_in;    // at k * r_in (layers after the core)
};

std::vector<LayerFns> layer_functions(const LayeredSphere& s, double omega, int nmax) {
  std::vector<LayerFns> fns(s.shells.size());
  double r_prev = 0.0;
  for (size_t l = 0; l < s.shells.size(); ++l) {
    const Shell& sh = s.shells[l];
    LayerFns& f = fns[l];
    f.k = wavenumber(omega, sh.eps, sh.mu);
    f.mu = sh.mu;
    f.r_in = r_prev;
    f.r_out = sh.outer_radius;
    f.psi_out = specfun::riccati_psi_array(nmax, f.k * sh.outer_radius);
    f.xi_out = specfun::riccati_xi_array(nmax, f.k * sh.outer_radius);
    if (l > 0) {
      f.psi_in = specfun::riccati_psi_array(nmax, f.k * r_prev);
      f.xi_in = specfun::riccati_xi_array(nmax, f.k * r_prev);
    }
    r_prev = sh.outer_radius;
  }
  return fns;
}

Complex propagate_log_derivative(Complex d_target, const RiccatiPair& psi_in,
                                 const RiccatiPair& xi_in, const RiccatiPair& psi_out,
                                 const RiccatiPair& xi_out) {
  const Complex d1i = psi_in.log_derivative();
  const Complex d3i = xi_in.log_derivative();
  const Complex d1o = psi_out.log_derivative();
  const Complex d3o = xi_out.log_derivative();
  const Complex q = ScaledC::ratio(psi_in.val() * xi_out.val(), psi_out.val() * xi_in.val());
  const Complex den = (d3i - d_target) - q * (d1i - d_target);
  if (den == Complex(0.0))
    throw SolverError("resonance-division", "log-derivative propagation hit a resonance");
  return (d1o * (d3i - d_target) - q * d3o * (d1i - d_target)) / den;
}

// Canonical-frame exterior coefficients a_n (TM), b_n (TE), n = 1..nmax.
void canonical_ab(const LayeredSphere& s, double omega, int nmax, std::vector<Complex>& a,
                  std::vector<Complex>& b) {
  a.assign(nmax, Complex(0.0));
  b.assign(nmax, Complex(0.0));
  if (s.shells.empty()) return;

  const auto fns = layer_functions(s, omega, nmax);
  const double x = omega * s.outer_radius();
  const auto psi_x = specfun::riccati_psi_array(nmax, Complex(x, 0.0));
  const auto xi_x = specfun::riccati_xi_array(nmax, Complex(x, 0.0));
  const size_t last = fns.size() - 1;

  for (int n = 1; n <= nmax; ++n) {
    Complex d_tm = fns[0].psi_out[n].log_derivative();
    Complex d_te = d_tm;
    for (size_t l = 1; l < fns.size(); ++l) {
      const Complex kp = fns[l - 1].k, mp = fns[l - 1].mu;
      const Complex kl = fns[l].k, ml = fns[l].mu;
      const Complex t_tm = d_tm * (mp * kl) / (kp * ml);
      const Complex t_te = d_te * (kp * ml) / (mp * kl);
      d_tm = propagate_log_derivative(t_tm, fns[l].psi_in[n], fns[l].xi_in[n], fns[l].psi_out[n],
                                      fns[l].xi_out[n]);
      d_te = propagate_log_derivative(t_te, fns[l].psi_in[n], fns[l].xi_in[n], fns[l].psi_out[n],
                                      fns[l].xi_out[n]);
    }
    const Complex g_tm = omega * fns[last].mu / fns[last].k * d_tm;
    const Complex g_te = fns[last].k / (fns[last].mu * omega) * d_te;
    a[n - 1] = ScaledC::ratio(sc_sub(psi_x[n].val() * g_tm, psi_x[n].deriv()),
                              sc_sub(xi_x[n].val() * g_tm, xi_x[n].deriv()));
    b[n - 1] = ScaledC::ratio(sc_sub(psi_x[n].val() * g_te, psi_x[n].deriv()),
                              sc_sub(xi_x[n].val() * g_te, xi_x[n].deriv()));
  }
}

int adequate_cutoff(const LayeredSphere& s, double omega, std::vector<Complex>& a,
                    std::vector<Complex>& b) {
  int nmax = initial_cutoff(omega * s.outer_radius());
  for (;;) {
    canonical_ab(s, omega, nmax, a, b);
    double peak = 0.0;
    for (int n = 0; n < nmax; ++n) peak = std::max(peak, std::abs(a[n]) + std::abs(b[n]));
    const double tail = nmax > 0 ? std::abs(a[nmax - 1]) + std::abs(b[nmax - 1]) : 0.0;
    if (peak == 0.0 || tail <= 1e-14 * peak) return nmax;
    if (nmax >= specfun::kDefaultNMax)
      throw SolverError("cutoff-inadequate", "multipole series did not converge by order " +
                                                 std::to_string(nmax));
    nmax = std::min(specfun::kDefaultNMax, nmax + std::max(4, nmax / 2));
  }
}

void check_source(const PlaneWave& inc) {
  const double kn = norm(inc.khat);
  if (!(kn > 0.0)) throw SolverError("invalid-source", "plane wave needs a direction");
  const double pn = norm(inc.pol);
  if (!(pn > 0.0)) throw SolverError("invalid-source", "plane wave needs a polarization");
  if (std::abs(dot(inc.pol, inc.khat / kn)) > 1e-10 * pn)
    throw SolverError("invalid-source", "polarization must be transverse to khat");
}

// Excitation frame: R maps the canonical frame onto (khat, pol); p1/p2 are the
// complex weights of the canonical x- and y-polarized solutions.
struct Frame {
  Mat3 rot;
  Complex p1, p2;
};

Frame frame_of(const Vec3& khat_raw, const CVec3& pol) {
  Frame f;
  const Vec3 khat = normalized(khat_raw);
  f.rot = rotation_between(Vec3{0, 0, 1}, khat);
  const Vec3 e1 = f.rot.apply(Vec3{1, 0, 0});
  const Vec3 e2 = f.rot.apply(Vec3{0, 1, 0});
  f.p1 = dot(pol, e1);
  f.p2 = dot(pol, e2);
  return f;
}

// Far field of the canonical x-polarized solution.
CVec3 far_field_canonical(const std::vector<Complex>& a, const std::vector<Complex>& b,
                          double omega, const Vec3& u) {
  const int nmax = static_cast<int>(a.size());
  const double mu = std::clamp(u.z, -1.0, 1.0);
  const double st = std::sqrt(std::max(0.0, 1.0 - mu * mu));
  double cphi = 1.0, sphi = 0.0;
  if (st > 1e-14) {
    cphi = u.x / st;
    sphi = u.y / st;
  }
  std::vector<double> pi_n, tau_n;
  specfun::angular_pi_tau_arrays(nmax, mu, pi_n, tau_n);
  Complex s1(0.0), s2(0.0);
  for (int n = 1; n <= nmax; ++n) {
    const double w = (2.0 * n + 1.0) / (n * (n + 1.0));
    s1 += w * (a[n - 1] * pi_n[n] + b[n - 1] * tau_n[n]);
    s2 += w * (a[n - 1] * tau_n[n] + b[n - 1] * pi_n[n]);
  }
  const Complex atheta = kI / omega * cphi * s2;
  const Complex aphi = -kI / omega * sphi * s1;
  const Vec3 theta_hat{mu * cphi, mu * sphi, -st};
  const Vec3 phi_hat{-sphi, cphi, 0.0};
  return CVec3(theta_hat) * atheta + CVec3(phi_hat) * aphi;
}

// E and H of the canonical x-polarized outgoing field at an exterior point.
void exterior_field_canonical(const std::vector<Complex>& a, const std::vector<Complex>& b,
                              double omega, const Vec3& x, CVec3& e_out, CVec3& h_out) {
  const double r = norm(x);
  const double rho = omega * r;
  const Vec3 rhat = x / r;
  const double mu = std::clamp(rhat.z, -1.0, 1.0);
  const double st = std::sqrt(std::max(0.0, 1.0 - mu * mu));
  double cphi = 1.0, sphi = 0.0;
  if (st > 1e-14) {
    cphi = rhat.x / st;
    sphi = rhat.y / st;
  }
  const int nmax = static_cast<int>(a.size());
  const auto xi = specfun::riccati_xi_array(nmax, Complex(rho, 0.0));
  std::vector<double> pi_n, tau_n;
  specfun::angular_pi_tau_arrays(nmax, mu, pi_n, tau_n);

  Complex er(0.0), et(0.0), ep(0.0), hr(0.0), ht(0.0), hp(0.0);
  for (int n = 1; n <= nmax; ++n) {
    const Complex en = mode_weight(n);
    const Complex z = xi[n].val().value();
    const Complex dz = xi[n].deriv().value();
    const Complex an = a[n - 1], bn = b[n - 1];
    const double nn1 = n * (n + 1.0);
    er += en * (kI * an * nn1 * st * pi_n[n] * z / (rho * rho));
    et += en * (kI * an * tau_n[n] * dz / rho - bn * pi_n[n] * z / rho);
    ep += en * (kI * an * pi_n[n] * dz / rho - bn * tau_n[n] * z / rho);
    hr += en * (kI * bn * nn1 * st * pi_n[n] * z / (rho * rho));
    ht += en * (-an * pi_n[n] * z / rho + kI * bn * tau_n[n] * dz / rho);
    hp += en * (-an * tau_n[n] * z / rho + kI * bn * pi_n[n] * dz / rho);
  }
  const Vec3 theta_hat{mu * cphi, mu * sphi, -st};
  const Vec3 phi_hat{-sphi, cphi, 0.0};
  e_out = CVec3(rhat) * (cphi * er) + CVec3(theta_hat) * (cphi * et) + CVec3(phi_hat) * (-sphi * ep);
  h_out = CVec3(rhat) * (sphi * hr) + CVec3(theta_hat) * (sphi * ht) + CVec3(phi_hat) * (cphi * hp);
}

// Dipole (exterior degree-1 TM) fields for amplitude vector q.
void dipole_field(const CVec3& q, double omega, const Vec3& x, CVec3& e_out, CVec3& h_out) {
  const double r = norm(x);
  const double rho = omega * r;
  const Vec3 rhat = x / r;
  const auto xi = specfun::riccati_xi(1, Complex(rho, 0.0));
  const Complex z = xi.val().value();
  const Complex dz = xi.deriv().value();
  const Complex qr = dot(q, rhat);
  const CVec3 qt = q - CVec3(rhat) * qr;
  e_out = qt * (dz / rho) + CVec3(rhat) * (2.0 * qr * z / (rho * rho));
  h_out = cross(rhat, q) * (kI * z / rho);
}

template <typename Eval>
CVec3 with_frame(const MultipoleCoefficients& c, const Vec3& x, Eval&& canonical_eval) {
  static const Mat3 rz = rotation_about(Vec3{0, 0, 1}, M_PI / 2.0);
  static const Mat3 rz_t = rz.transpose();
  const Frame f = frame_of(c.khat, c.pol);
  const Mat3 rt = f.rot.transpose();
  const Vec3 u = rt.apply(x);
  CVec3 out = canonical_eval(u) * f.p1;
  if (std::abs(f.p2) > 0.0) out = out + rz.apply(canonical_eval(rz_t.apply(u))) * f.p2;
  return f.rot.apply(out);
}

// Modal amplitudes (psi/xi weights) of one parity inside each layer, found by
// descending from the exterior coefficient through the interface conditions.
// TM rows enforce continuity of F'/k and F/mu; TE rows of F/k and F'/mu.
void descend_amplitudes(const std::vector<LayerFns>& fns, double omega, int n, Complex coeff,
                        bool tm, const std::vector<RiccatiPair>& psi_x,
                        const std::vector<RiccatiPair>& xi_x, std::vector<ScaledC>& c_psi,
                        std::vector<ScaledC>& c_xi) {
  const size_t nl = fns.size();
  const ScaledC f_val = sc_sub(psi_x[n].val(), xi_x[n].val() * coeff);
  const ScaledC f_der = sc_sub(psi_x[n].deriv(), xi_x[n].deriv() * coeff);
  // Continuous pair (q1, q2): TM carries (F'/k, F/mu), TE carries (F/k, F'/mu).
  ScaledC q1 = (tm ? f_der : f_val) * Complex(1.0 / omega);
  ScaledC q2 = tm ? f_val : f_der;

  for (size_t li = nl; li-- > 0;) {
    const LayerFns& f = fns[li];
    const RiccatiPair& psi = f.psi_out[n];
    const RiccatiPair& xi = f.xi_out[n];
    const ScaledC r1 = q1 * f.k;
    const ScaledC r2 = q2 * f.mu;
    const ScaledC row1_psi = tm ? psi.deriv() : psi.val();
    const ScaledC row1_xi = tm ? xi.deriv() : xi.val();
    const ScaledC row2_psi = tm ? psi.val() : psi.deriv();
    const ScaledC row2_xi = tm ? xi.val() : xi.deriv();
    if (li == 0) {
      // Regular core: single psi amplitude from the better-scaled row.
      const double m1 = std::abs(row1_psi.mantissa) == 0.0
                            ? -1e300
                            : std::log(std::abs(row1_psi.mantissa)) + row1_psi.log_scale;
      const double m2 = std::abs(row2_psi.mantissa) == 0.0
                            ? -1e300
                            : std::log(std::abs(row2_psi.mantissa)) + row2_psi.log_scale;
      c_psi[li] = m1 >= m2 ? sc_ratio(r1, row1_psi) : sc_ratio(r2, row2_psi);
      c_xi[li] = ScaledC{};
      return;
    }
    solve2(row1_psi, row1_xi, row2_psi, row2_xi, r1, r2, c_psi[li], c_xi[li]);
    // Trace the pair down to the inner boundary of this layer.
    const RiccatiPair& psi_i = f.psi_in[n];
    const RiccatiPair& xi_i = f.xi_in[n];
    const ScaledC fi_val = sc_add(c_psi[li] * psi_i.val(), c_xi[li] * xi_i.val());
    const ScaledC fi_der = sc_add(c_psi[li] * psi_i.deriv(), c_xi[li] * xi_i.deriv());
    q1 = (tm ? fi_der : fi_val) * (Complex(1.0) / f.k);
    q2 = (tm ? fi_val : fi_der) * (Complex(1.0) / f.mu);
  }
}

// Angular factors of the degree-n canonical field's squared magnitude:
// int |E_n N{F}|^2 dOmega = 2 pi (2n+1) (|F'/z|^2 + n(n+1)|F/z^2|^2), and the
// M-part contributes 2 pi (2n+1) |F/z|^2.
double modal_energy_density(const LayerModalField& lf, double r) {
  const int nmax = static_cast<int>(lf.tm_psi.size());
  const Complex z = lf.k * r;
  const auto psi = specfun::riccati_psi_array(nmax, z);
  const auto xi = specfun::riccati_xi_array(nmax, z);
  const double az2 = std::norm(z);
  double total = 0.0;
  for (int n = 1; n <= nmax; ++n) {
    const Complex f_tm = sc_add(lf.tm_psi[n - 1] * psi[n].val(), lf.tm_xi[n - 1] * xi[n].val()).value();
    const Complex f_tm_d =
        sc_add(lf.tm_psi[n - 1] * psi[n].deriv(), lf.tm_xi[n - 1] * xi[n].deriv()).value();
    const Complex f_te = sc_add(lf.te_psi[n - 1] * psi[n].val(), lf.te_xi[n - 1] * xi[n].val()).value();
    const double w = 2.0 * M_PI * (2.0 * n + 1.0);
    total += w * (std::norm(f_tm_d) / az2 + n * (n + 1.0) * std::norm(f_tm) / (az2 * az2) +
                  std::norm(f_te) / az2);
  }
  return total;
}

struct Segment {
  double r_in = 0.0, r_out = 0.0;
  Complex k, eps, mu;
  bool forced = false;
  bool exterior = false;
};

std::vector<Segment> build_segments(const LayeredSphere& s, double omega, double src_in,
                                    double src_out) {
  std::vector<double> cuts{src_in, src_out};
  for (const auto& sh : s.shells) cuts.push_back(sh.outer_radius);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(),
                         [](double a, double b) { return std::abs(a - b) < 1e-15; }),
             cuts.end());
  while (!cuts.empty() && cuts.front() <= 0.0) cuts.erase(cuts.begin());

  std::vector<Segment> segs;
  double r_prev = 0.0;
  auto material_at = [&](double r) -> Shell {
    for (const auto& sh : s.shells)
      if (r < sh.outer_radius) return sh;
    return Shell{0.0, Complex(1.0), Complex(1.0)};  // exterior vacuum
  };
  for (double c : cuts) {
    const double mid = 0.5 * (r_prev + c);
    const Shell m = material_at(mid);
    segs.push_back({r_prev, c, wavenumber(omega, m.eps, m.mu), m.eps, m.mu,
                    mid > src_in && mid < src_out, false});
    r_prev = c;
  }
  const Shell m = material_at(r_prev + 1.0);
  segs.push_back({r_prev, 0.0, wavenumber(omega, m.eps, m.mu), m.eps, m.mu, false, true});
  return segs;
}

CurrentSolution current_solve_impl(const LayeredSphere& s, double omega, double src_in,
                                   double src_out, const CVec3& density) {
  s.validate(omega);
  if (!(src_out > src_in) || src_in < 0.0)
    throw SolverError("unsupported-source", "current support must be a nonempty ball or shell");
  if (!(norm(density) > 0.0))
    throw SolverError("unsupported-source", "current density must be nonzero");

  auto segs = build_segments(s, omega, src_in, src_out);
  const int ns = static_cast<int>(segs.size());
  const int unknowns = 2 * ns - 2;

  // Unit current along z: E particular = -i/(omega eps) inside the support.
  auto e0_of = [&](const Segment& g) {
    return g.forced ? -kI / (omega * g.eps) : Complex(0.0);
  };
  // Column layout: [c_psi(0), c_psi(1), c_xi(1), ..., c_xi(ns-1)]; the
  // exterior region carries only its outgoing amplitude.
  auto col_psi = [&](int i) { return i == 0 ? 0 : 2 * i - 1; };
  auto col_xi = [&](int i) { return i == ns - 1 ? 2 * i - 1 : 2 * i; };

  Eigen::MatrixXcd mat = Eigen::MatrixXcd::Zero(unknowns, unknowns);
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(unknowns);

  for (int b = 0; b < ns - 1; ++b) {
    const double rb = segs[b].r_out;
    const int row_e = 2 * b, row_h = 2 * b + 1;
    for (int side = 0; side < 2; ++side) {
      const Segment& g = segs[b + side];
      const double sign = side == 0 ? 1.0 : -1.0;
      const Complex z = g.k * rb;
      const auto psi = specfun::riccati_psi(1, z);
      const auto xi = specfun::riccati_xi(1, z);
      const Complex pv = psi.val().value(), pd = psi.deriv().value();
      const Complex xv = xi.val().value(), xd = xi.deriv().value();
      const int i = b + side;
      const bool has_psi = !segs[i].exterior;
      const bool has_xi = i >= 1;
      if (has_psi) {
        mat(row_e, col_psi(i)) += sign * pd / z;
        mat(row_h, col_psi(i)) += sign * (g.k / g.mu) * pv / z;
      }
      if (has_xi) {
        mat(row_e, col_xi(i)) += sign * xd / z;
        mat(row_h, col_xi(i)) += sign * (g.k / g.mu) * xv / z;
      }
      rhs(row_e) -= sign * e0_of(g);
    }
  }

  // Column equilibration, then full-pivot LU.
  Eigen::VectorXd scale(unknowns);
  for (int j = 0; j < unknowns; ++j) {
    const double m = mat.col(j).cwiseAbs().maxCoeff();
    scale(j) = m > 0.0 ? 1.0 / m : 1.0;
    mat.col(j) *= scale(j);
  }
  Eigen::VectorXcd sol = mat.fullPivLu().solve(rhs);
  for (int j = 0; j < unknowns; ++j) sol(j) *= scale(j);

  CurrentSolution out;
  out.sphere = s;
  out.omega = omega;
  out.density = density;
  out.src_r_inner = src_in;
  out.src_r_outer = src_out;
  out.regions.reserve(segs.size());
  for (int i = 0; i < ns; ++i) {
    RadialRegion rr;
    rr.r_inner = segs[i].r_in;
    rr.r_outer = segs[i].r_out;
    rr.k = segs[i].k;
    rr.eps = segs[i].eps;
    rr.mu = segs[i].mu;
    rr.e_particular = e0_of(segs[i]);
    rr.exterior = segs[i].exterior;
    if (!segs[i].exterior) rr.c_psi = sol(col_psi(i));
    if (i >= 1) rr.c_xi = sol(col_xi(i));
    out.regions.push_back(rr);
  }
  out.transfer = out.regions.back().c_xi;
  out.coeffs.kind = PatternKind::Dipole;
  out.coeffs.omega = omega;
  out.coeffs.dipole_q = density * out.transfer;
  return out;
}

// Radial profile of the unit-z current solution inside one region:
// E = er cos(theta) rhat - e sin(theta) thetahat, H = -h sin(theta) phihat.
void region_profile(const RadialRegion& g, double omega, double r, Complex& e, Complex& er,
                    Complex& h) {
  const Complex z = g.k * r;
  Complex fv(0.0), fd(0.0);
  if (g.c_psi != Complex(0.0)) {
    const auto psi = specfun::riccati_psi(1, z);
    fv += g.c_psi * psi.val().value();
    fd += g.c_psi * psi.deriv().value();
  }
  if (g.c_xi != Complex(0.0)) {
    const auto xi = specfun::riccati_xi(1, z);
    fv += g.c_xi * xi.val().value();
    fd += g.c_xi * xi.deriv().value();
  }
  e = fd / z + g.e_particular;
  er = 2.0 * fv / (z * z) + g.e_particular;
  h = -g.k / (kI * omega * g.mu) * fv / z;
}

}  // namespace

void LayeredSphere::validate(double omega) const {
  if (!(omega > 0.0)) throw SolverError("invalid-frequency", "omega must be positive");
  double r_prev = 0.0;
  for (const auto& sh : shells) {
    if (!(sh.outer_radius > r_prev))
      throw SolverError("invalid-geometry", "shell radii must be positive and increasing");
    if (sh.eps.imag() < -1e-12 || sh.mu.imag() < -1e-12 || !(std::abs(sh.eps) > 0.0) ||
        !(std::abs(sh.mu) > 0.0) || !std::isfinite(std::abs(sh.eps)) ||
        !std::isfinite(std::abs(sh.mu)))
      throw SolverError("nonpassive-material", "materials must be passive and nondegenerate");
    r_prev = sh.outer_radius;
  }
}

MultipoleCoefficients plane_wave_solve(const LayeredSphere& s, double omega, const PlaneWave& inc) {
  s.validate(omega);
  check_source(inc);
  MultipoleCoefficients c;
  c.kind = PatternKind::Modal;
  c.omega = omega;
  c.khat = normalized(inc.khat);
  c.pol = inc.pol;
  adequate_cutoff(s, omega, c.a, c.b);
  double sca = 0.0, ext = 0.0;
  for (int n = 1; n <= c.cutoff(); ++n) {
    const double w = 2.0 * n + 1.0;
    sca += w * (std::norm(c.a[n - 1]) + std::norm(c.b[n - 1]));
    ext += w * (c.a[n - 1] + c.b[n - 1]).real();
  }
  if (ext - sca < -1e-12 * std::max(ext, sca))
    throw SolverError("passivity-violation", "negative absorption from a passive sphere");
  return c;
}

PlaneWaveSolution plane_wave_solve_full(const LayeredSphere& s, double omega,
                                        const PlaneWave& inc) {
  PlaneWaveSolution sol;
  sol.sphere = s;
  sol.omega = omega;
  sol.incident = inc;
  sol.coeffs = plane_wave_solve(s, omega, inc);

  const int nmax = sol.coeffs.cutoff();
  const auto fns = layer_functions(s, omega, nmax);
  const double x = omega * s.outer_radius();
  const auto psi_x = specfun::riccati_psi_array(nmax, Complex(x, 0.0));
  const auto xi_x = specfun::riccati_xi_array(nmax, Complex(x, 0.0));

  sol.layers.resize(fns.size());
  for (size_t l = 0; l < fns.size(); ++l) {
    LayerModalField& lf = sol.layers[l];
    lf.r_inner = fns[l].r_in;
    lf.r_outer = fns[l].r_out;
    lf.k = fns[l].k;
    lf.eps = s.shells[l].eps;
    lf.mu = fns[l].mu;
    lf.tm_psi.resize(nmax);
    lf.tm_xi.resize(nmax);
    lf.te_psi.resize(nmax);
    lf.te_xi.resize(nmax);
  }
  std::vector<ScaledC> c_psi(fns.size()), c_xi(fns.size());
  for (int n = 1; n <= nmax; ++n) {
    descend_amplitudes(fns, omega, n, sol.coeffs.a[n - 1], true, psi_x, xi_x, c_psi, c_xi);
    for (size_t l = 0; l < fns.size(); ++l) {
      sol.layers[l].tm_psi[n - 1] = c_psi[l];
      sol.layers[l].tm_xi[n - 1] = c_xi[l];
    }
    descend_amplitudes(fns, omega, n, sol.coeffs.b[n - 1], false, psi_x, xi_x, c_psi, c_xi);
    for (size_t l = 0; l < fns.size(); ++l) {
      sol.layers[l].te_psi[n - 1] = c_psi[l];
      sol.layers[l].te_xi[n - 1] = c_xi[l];
    }
  }
  return sol;
}

CurrentSolution current_n1_solve(const LayeredSphere& s, double omega, const CoreBallCurrent& src) {
  return current_solve_impl(s, omega, 0.0, src.radius, src.density);
}

CurrentSolution current_n1_solve(const LayeredSphere& s, double omega,
                                 const ShellBallCurrent& src) {
  return current_solve_impl(s, omega, src.r_inner, src.r_outer, src.density);
}

TangentialTrace plane_wave_trace(double omega, double tau, int nmax) {
  const double x = omega * tau;
  const auto psi = specfun::riccati_psi_array(nmax, Complex(x, 0.0));
  TangentialTrace t;
  t.e.resize(nmax);
  t.f.resize(nmax);
  for (int n = 1; n <= nmax; ++n) {
    t.e[n - 1] = -psi[n].deriv().value() / x;
    t.f[n - 1] = psi[n].val().value() / x;
  }
  return t;
}

MultipoleCoefficients exterior_trace_solve(double tau, double omega, const TangentialTrace& trace) {
  if (!(tau > 0.0)) throw SolverError("invalid-geometry", "trace radius must be positive");
  if (!(omega > 0.0)) throw SolverError("invalid-frequency", "omega must be positive");
  const int nmax = static_cast<int>(std::max(trace.e.size(), trace.f.size()));
  if (nmax < 1) throw SolverError("unsupported-source", "empty trace");
  const double x = omega * tau;
  const auto xi = specfun::riccati_xi_array(nmax, Complex(x, 0.0));
  MultipoleCoefficients c;
  c.kind = PatternKind::Modal;
  c.omega = omega;
  c.a.assign(nmax, Complex(0.0));
  c.b.assign(nmax, Complex(0.0));
  for (int n = 1; n <= nmax; ++n) {
    const Complex xv = xi[n].val().value();
    const Complex xd = xi[n].deriv().value();
    if (std::abs(xv) == 0.0 || std::abs(xd) == 0.0)
      throw SolverError("resonance-division", "outgoing radial function vanished on the trace sphere");
    if (n <= static_cast<int>(trace.e.size())) c.a[n - 1] = trace.e[n - 1] * x / xd;
    if (n <= static_cast<int>(trace.f.size())) c.b[n - 1] = trace.f[n - 1] * x / xv;
  }
  return c;
}

CVec3 far_field(const MultipoleCoefficients& c, const Vec3& xhat) {
  if (c.kind == PatternKind::Dipole) {
    const Complex qr = dot(c.dipole_q, xhat);
    return (c.dipole_q - CVec3(xhat) * qr) * (-kI / c.omega);
  }
  return with_frame(c, xhat, [&](const Vec3& u) { return far_field_canonical(c.a, c.b, c.omega, u); });
}

FarFieldPattern far_field_pattern(const MultipoleCoefficients& c, const SphereGrid& grid) {
  return sample_pattern(grid, [c](const Vec3& xhat) { return far_field(c, xhat); });
}

void exterior_field(const MultipoleCoefficients& c, const Vec3& x, CVec3& e_out, CVec3& h_out) {
  if (c.kind == PatternKind::Dipole) {
    dipole_field(c.dipole_q, c.omega, x, e_out, h_out);
    return;
  }
  // Evaluate E and H through the shared frame machinery in one pass each.
  e_out = with_frame(c, x, [&](const Vec3& u) {
    CVec3 e, h;
    exterior_field_canonical(c.a, c.b, c.omega, u, e, h);
    return e;
  });
  h_out = with_frame(c, x, [&](const Vec3& u) {
    CVec3 e, h;
    exterior_field_canonical(c.a, c.b, c.omega, u, e, h);
    return h;
  });
}

void incident_field(const PlaneWave& inc, double omega, const Vec3& x, CVec3& e_out, CVec3& h_out) {
  const Vec3 khat = normalized(inc.khat);
  const Complex phase = std::exp(kI * omega * dot(khat, x));
  e_out = inc.pol * phase;
  h_out = cross(CVec3(khat), inc.pol) * phase;
}

std::vector<NearFieldSample> near_field_trace(const MultipoleCoefficients& c, const PlaneWave* inc,
                                              double radius, const SphereGrid& grid) {
  if (!(radius > 0.0)) throw SolverError("invalid-geometry", "trace radius must be positive");
  std::vector<NearFieldSample> out;
  out.reserve(grid.nodes.size());
  for (const auto& nu : grid.nodes) {
    const Vec3 x = nu * radius;
    CVec3 e, h;
    exterior_field(c, x, e, h);
    if (inc) {
      CVec3 ei, hi;
      incident_field(*inc, c.omega, x, ei, hi);
      e = e + ei;
      h = h + hi;
    }
    NearFieldSample s;
    s.point = x;
    s.e = e - CVec3(nu) * dot(e, nu);
    s.h = h - CVec3(nu) * dot(h, nu);
    out.push_back(s);
  }
  return out;
}

CVec3 far_field_via_surface_integral(const std::vector<NearFieldSample>& samples,
                                     const SphereGrid& grid, double radius, double omega,
                                     const Vec3& xhat) {
  CVec3 acc;
  for (size_t i = 0; i < samples.size(); ++i) {
    const Vec3 nu = grid.nodes[i];
    const Complex phase = std::exp(-kI * omega * dot(xhat, samples[i].point));
    const CVec3 term = cross(nu, samples[i].e) + cross(cross(nu, samples[i].h), xhat);
    acc = acc + term * (phase * grid.weights[i] * radius * radius);
  }
  const CVec3 integral = acc * (kI * omega / (4.0 * M_PI));
  return cross(CVec3(xhat), integral);
}

EnergyBalance energy_balance(const PlaneWaveSolution& sol, double radius, const SphereGrid& grid) {
  if (!(radius >= sol.sphere.outer_radius()))
    throw SolverError("invalid-geometry", "balance sphere must enclose the scatterer");
  EnergyBalance eb;

  const double pol2 = norm(sol.incident.pol) * norm(sol.incident.pol);
  for (const auto& lf : sol.layers) {
    const double sigma = sol.omega * lf.eps.imag();
    if (sigma <= 0.0) continue;
    eb.absorbed += sigma * pol2 *
                   integrate_gk([&](double r) { return r * r * modal_energy_density(lf, r); },
                                lf.r_inner, lf.r_outer);
  }

  double flux = 0.0;
  for (size_t i = 0; i < grid.nodes.size(); ++i) {
    const Vec3 nu = grid.nodes[i];
    const Vec3 x = nu * radius;
    CVec3 e, h, ei, hi;
    exterior_field(sol.coeffs, x, e, h);
    incident_field(sol.incident, sol.omega, x, ei, hi);
    e = e + ei;
    h = h + hi;
    flux += grid.weights[i] * radius * radius * dot(cross(e, conj(h)), nu).real();
  }
  eb.rhs = -flux;
  eb.residual = std::abs(eb.absorbed - eb.rhs) /
                std::max({std::abs(eb.absorbed), std::abs(eb.rhs), 1e-300});
  return eb;
}

EnergyBalance energy_balance(const CurrentSolution& sol, double radius, const SphereGrid& grid) {
  const double enclosed = std::max(sol.sphere.outer_radius(), sol.src_r_outer);
  if (!(radius >= enclosed))
    throw SolverError("invalid-geometry", "balance sphere must enclose scatterer and source");
  EnergyBalance eb;

  const double j2 = norm(sol.density) * norm(sol.density);
  for (const auto& g : sol.regions) {
    const double sigma = sol.omega * g.eps.imag();
    if (sigma <= 0.0 || g.exterior) continue;
    eb.absorbed += sigma * j2 *
                   integrate_gk(
                       [&](double r) {
                         Complex e, er, h;
                         region_profile(g, sol.omega, r, e, er, h);
                         return r * r * (4.0 * M_PI / 3.0 * std::norm(er) +
                                         8.0 * M_PI / 3.0 * std::norm(e));
                       },
                       g.r_inner, g.r_outer);
  }

  // Source work: -Re int E . conj(J), with J the unit-z solve scaled by |J0|^2.
  double work = 0.0;
  for (const auto& g : sol.regions) {
    if (g.e_particular == Complex(0.0)) continue;  // only forced segments
    work += integrate_gk(
        [&](double r) {
          Complex e, er, h;
          region_profile(g, sol.omega, r, e, er, h);
          // Re int E_z dOmega for the unit real current along z.
          return r * r * (4.0 * M_PI / 3.0 * er + 8.0 * M_PI / 3.0 * e).real();
        },
        g.r_inner, g.r_outer);
  }
  const double source_work = -j2 * work;

  double flux = 0.0;
  for (size_t i = 0; i < grid.nodes.size(); ++i) {
    const Vec3 nu = grid.nodes[i];
    CVec3 e, h;
    dipole_field(sol.coeffs.dipole_q, sol.omega, nu * radius, e, h);
    flux += grid.weights[i] * radius * radius * dot(cross(e, conj(h)), nu).real();
  }
  eb.rhs = -flux + source_work;
  eb.residual = std::abs(eb.absorbed - eb.rhs) /
                std::max({std::abs(eb.absorbed), std::abs(eb.rhs), 1e-300});
  return eb;
}

CrossSections cross_sections(const MultipoleCoefficients& c) {
  if (c.kind != PatternKind::Modal)
    throw SolverError("unsupported-source", "cross sections need modal coefficients");
  CrossSections cs;
  for (int n = 1; n <= c.cutoff(); ++n) {
    const double w = 2.0 * n + 1.0;
    cs.scattering += w * (std::norm(c.a[n - 1]) + std::norm(c.b[n - 1]));
    cs.extinction += w * (c.a[n - 1] + c.b[n - 1]).real();
  }
  const double pref = 2.0 * M_PI / (c.omega * c.omega);
  cs.scattering *= pref;
  cs.extinction *= pref;
  cs.absorption = cs.extinction - cs.scattering;
  return cs;
}

}  // namespace cloakbench::mie
