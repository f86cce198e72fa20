#include "cloakbench/quadrature.hpp"

#include <algorithm>
#include <cmath>

namespace cloakbench {

namespace {

// 15-point Kronrod extension of 7-point Gauss (QUADPACK dqk15 constants).
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double integral;
  double error;
};

Panel gk15(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double resk = kWgk[7] * f(c);
  double resg = kWg[3] * f(c);
  for (int j = 0; j < 7; ++j) {
    const double v = f(c - h * kXgk[j]) + f(c + h * kXgk[j]);
    resk += kWgk[j] * v;
    if (j % 2 == 1) resg += kWg[j / 2] * v;
  }
  const double err = std::abs(resk - resg) * std::abs(h);
  return {resk * h, err};
}

double adapt(const std::function<double(double)>& f, double a, double b, const Panel& p,
             double tol, int depth) {
  if (p.error <= tol || depth <= 0) return p.integral;
  const double c = 0.5 * (a + b);
  const Panel left = gk15(f, a, c);
  const Panel right = gk15(f, c, b);
  return adapt(f, a, c, left, 0.5 * tol, depth - 1) +
         adapt(f, c, b, right, 0.5 * tol, depth - 1);
}

}  // namespace

double integrate_gk(const std::function<double(double)>& f, double a, double b, double rel_tol,
                    double abs_tol, int max_depth) {
  if (a == b) return 0.0;
  const Panel whole = gk15(f, a, b);
  const double tol = std::max(abs_tol, rel_tol * std::abs(whole.integral));
  return adapt(f, a, b, whole, tol, max_depth);
}

}  // namespace cloakbench
