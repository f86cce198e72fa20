#include "cloakbench/specfun.hpp"

#include <cmath>
#include <stdexcept>

namespace cloakbench {
namespace specfun {

namespace {

constexpr double kRenormHigh = 1e120;
constexpr double kRenormLow = 1e-120;

// sin z and cos z as mantissa * exp(|Im z|), overflow-free for any band.
struct TrigScaled {
  Complex sin_m, cos_m;
  double log_scale;
};

TrigScaled trig_scaled(Complex z) {
  const double s = std::abs(z.imag());
  // e^{iz - s} and e^{-iz - s} both have modulus <= 1.
  const Complex ep = std::exp(Complex(-z.imag() - s, z.real()));
  const Complex em = std::exp(Complex(z.imag() - s, -z.real()));
  const Complex i(0.0, 1.0);
  return {(ep - em) / (2.0 * i), (ep + em) / 2.0, s};
}

void renormalize(Complex& a, Complex& b, double& scale) {
  const double m = std::max(std::abs(a), std::abs(b));
  if (m > kRenormHigh || (m < kRenormLow && m > 0.0)) {
    const double lg = std::log(m);
    a *= std::exp(-lg);
    b *= std::exp(-lg);
    scale += lg;
  }
}

}  // namespace

ScaledC ScaledC::normalized() const {
  const double m = std::abs(mantissa);
  if (m == 0.0) return {Complex(0.0), 0.0};
  if (m > kRenormHigh || m < kRenormLow) {
    const double lg = std::log(m);
    return {mantissa * std::exp(-lg), log_scale + lg};
  }
  return *this;
}

Complex psi_log_derivative(int n, Complex z) {
  if (z == Complex(0.0)) throw std::domain_error("riccati: z must be nonzero");
  const int n_start = std::max(n, static_cast<int>(std::ceil(std::abs(z)))) + 50;
  Complex d(0.0);  // D_{n_start}, seed value; the recurrence forgets it
  for (int k = n_start; k > n; --k) {
    const Complex kz = static_cast<double>(k) / z;
    d = kz - 1.0 / (d + kz);
  }
  return d;
}

std::vector<RiccatiPair> riccati_psi_array(int nmax, Complex z) {
  if (z == Complex(0.0)) throw std::domain_error("riccati: z must be nonzero");
  if (nmax < 0 || nmax > kDefaultNMax) throw std::domain_error("riccati: order out of range");

  // Downward recurrence for all log-derivatives D1_k = psi_k'/psi_k.
  // Start well above both the order and the turning point |z| so the seed
  // error is fully forgotten by the time k reaches nmax.
  const int n_start = std::max(nmax, static_cast<int>(std::ceil(std::abs(z)))) + 50;
  std::vector<Complex> d1(nmax + 1);
  Complex d(0.0);
  for (int k = n_start; k >= 1; --k) {
    const Complex kz = static_cast<double>(k) / z;
    const Complex dm = kz - 1.0 / (d + kz);
    if (k <= nmax) d1[k] = d;
    d = dm;
  }
  // d now holds D1_0 = cot z; overwrite with the exact value below anyway.

  std::vector<RiccatiPair> out(nmax + 1);
  const TrigScaled t = trig_scaled(z);
  Complex v = t.sin_m;
  Complex dv = t.cos_m;
  double scale = t.log_scale;
  out[0] = {v, dv, scale, 0, z};
  for (int k = 1; k <= nmax; ++k) {
    // psi_{k-1}/psi_k = D1_k + k/z.
    v = v / (d1[k] + static_cast<double>(k) / z);
    dv = d1[k] * v;
    renormalize(v, dv, scale);
    out[k] = {v, dv, scale, k, z};
  }
  return out;
}

std::vector<RiccatiPair> riccati_chi_array(int nmax, Complex z) {
  if (z == Complex(0.0)) throw std::domain_error("riccati: z must be nonzero");
  if (nmax < 0 || nmax > kDefaultNMax) throw std::domain_error("riccati: order out of range");

  std::vector<RiccatiPair> out(nmax + 1);
  const TrigScaled t = trig_scaled(z);
  Complex prev = t.cos_m;                  // chi_0
  Complex cur = t.cos_m / z + t.sin_m;     // chi_1
  double scale = t.log_scale;
  out[0] = {prev, -t.sin_m, scale, 0, z};  // chi_0' = -sin z
  if (nmax == 0) return out;
  out[1] = {cur, prev - cur / z, scale, 1, z};
  for (int k = 2; k <= nmax; ++k) {
    Complex next = (2.0 * k - 1.0) / z * cur - prev;
    prev = cur;
    cur = next;
    renormalize(prev, cur, scale);
    out[k] = {cur, prev - static_cast<double>(k) / z * cur, scale, k, z};
  }
  return out;
}

std::vector<RiccatiPair> riccati_xi_array(int nmax, Complex z) {
  if (z == Complex(0.0)) throw std::domain_error("riccati: z must be nonzero");
  if (nmax < 0 || nmax > kDefaultNMax) throw std::domain_error("riccati: order out of range");

  std::vector<RiccatiPair> out(nmax + 1);
  // xi_0 = -i e^{iz} = e^{-Im z} * (-i e^{i Re z}); scale carried explicitly.
  double scale = -z.imag();
  const Complex i(0.0, 1.0);
  Complex prev = -i * std::exp(i * z.real());  // xi_0 mantissa
  Complex cur = prev * (1.0 / z - i);          // xi_1 = xi_0 (1/z - i)
  out[0] = {prev, i * prev, scale, 0, z};      // xi_0' = e^{iz} = i xi_0
  if (nmax == 0) return out;
  out[1] = {cur, prev - cur / z, scale, 1, z};
  for (int k = 2; k <= nmax; ++k) {
    Complex next = (2.0 * k - 1.0) / z * cur - prev;
    prev = cur;
    cur = next;
    renormalize(prev, cur, scale);
    out[k] = {cur, prev - static_cast<double>(k) / z * cur, scale, k, z};
  }
  return out;
}

RiccatiPair riccati_psi(int n, Complex z) { return riccati_psi_array(n, z)[n]; }
RiccatiPair riccati_chi(int n, Complex z) { return riccati_chi_array(n, z)[n]; }
RiccatiPair riccati_xi(int n, Complex z) { return riccati_xi_array(n, z)[n]; }

void angular_pi_tau_arrays(int nmax, double mu, std::vector<double>& pi_n, std::vector<double>& tau_n) {
  pi_n.assign(nmax + 1, 0.0);
  tau_n.assign(nmax + 1, 0.0);
  if (nmax < 1) return;
  pi_n[1] = 1.0;
  tau_n[1] = mu;
  for (int n = 2; n <= nmax; ++n) {
    const double pin = ((2.0 * n - 1.0) * mu * pi_n[n - 1] - n * pi_n[n - 2]) / (n - 1.0);
    pi_n[n] = pin;
    tau_n[n] = n * mu * pin - (n + 1.0) * pi_n[n - 1];
  }
}

std::pair<double, double> angular_pi_tau(int n, double mu) {
  if (n < 1) throw std::domain_error("angular_pi_tau: n >= 1 required");
  std::vector<double> p, t;
  angular_pi_tau_arrays(n, mu, p, t);
  return {p[n], t[n]};
}

}  // namespace specfun
}  // namespace cloakbench
