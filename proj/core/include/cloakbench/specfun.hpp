#pragma once

#include <complex>
#include <vector>

#include "cloakbench/geometry.hpp"

namespace cloakbench {
namespace specfun {

// Complex number carried as mantissa * exp(log_scale). The conducting layers
// push Riccati-Bessel values through many decades, so raw doubles are not
// enough; the scale exponent travels separately and only ratios ever collapse.
struct ScaledC {
  Complex mantissa{0.0};
  double log_scale = 0.0;

  Complex value() const { return mantissa * std::exp(log_scale); }
  bool is_zero() const { return mantissa == Complex(0.0); }

  ScaledC normalized() const;
  ScaledC operator*(const ScaledC& o) const { return ScaledC{mantissa * o.mantissa, log_scale + o.log_scale}.normalized(); }
  ScaledC operator*(Complex c) const { return ScaledC{mantissa * c, log_scale}.normalized(); }

  // Ratio of two scaled values, collapsed to an ordinary complex.
  static Complex ratio(const ScaledC& num, const ScaledC& den) {
    return num.mantissa / den.mantissa * std::exp(num.log_scale - den.log_scale);
  }
};

// Value/derivative pair of one Riccati-Bessel kind at (n, z).
// True value = value * exp(log_scale), same for the derivative.
struct RiccatiPair {
  Complex value{0.0};
  Complex derivative{0.0};
  double log_scale = 0.0;
  int n = 0;
  Complex z{0.0};

  ScaledC val() const { return {value, log_scale}; }
  ScaledC deriv() const { return {derivative, log_scale}; }
  Complex log_derivative() const { return derivative / value; }
};

inline constexpr int kDefaultNMax = 200;

// Regular kind psi_n(z) = z j_n(z), orders 0..nmax. Downward recurrence for the
// logarithmic derivative seeded at nmax + max(15, ceil(1.2|z|)), upward
// normalization from psi_0 = sin z.
std::vector<RiccatiPair> riccati_psi_array(int nmax, Complex z);

// Irregular kind chi_n(z) = -z y_n(z), upward recurrence from chi_0 = cos z.
std::vector<RiccatiPair> riccati_chi_array(int nmax, Complex z);

// Outgoing kind xi_n(z) = z h1_n(z) = psi_n - i chi_n, computed by its own
// upward recurrence from xi_0 = -i e^{iz} (no cancellation at large Im z).
std::vector<RiccatiPair> riccati_xi_array(int nmax, Complex z);

RiccatiPair riccati_psi(int n, Complex z);
RiccatiPair riccati_chi(int n, Complex z);
RiccatiPair riccati_xi(int n, Complex z);

// Logarithmic derivative psi_n'(z)/psi_n(z) alone (downward recurrence).
Complex psi_log_derivative(int n, Complex z);

// Far-field angular functions pi_n(mu) = P_n^1/sin(theta), tau_n = dP_n^1/dtheta,
// n = 1..nmax. The recurrence is polynomial in mu, finite at mu = +-1.
void angular_pi_tau_arrays(int nmax, double mu, std::vector<double>& pi_n, std::vector<double>& tau_n);

// Single-order convenience (n >= 1).
std::pair<double, double> angular_pi_tau(int n, double mu);

}  // namespace specfun
}  // namespace cloakbench
