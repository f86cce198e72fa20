#include "cloakbench/sphere_grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cloakbench {

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n < 1) throw std::domain_error("gauss_legendre: n >= 1 required");
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Chebyshev-like initial guess, then Newton on P_n.
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * pp * pp);
    weights[i] = w;
    weights[n - 1 - i] = w;
  }
}

SphereGrid make_grid(int n_polar, int n_azimuth) {
  if (n_polar < 8 || n_azimuth < 16)
    throw std::domain_error("make_grid: need n_polar >= 8 and n_azimuth >= 16");
  std::vector<double> mu, w;
  gauss_legendre(n_polar, mu, w);
  SphereGrid g;
  g.n_polar = n_polar;
  g.n_azimuth = n_azimuth;
  g.nodes.reserve(static_cast<size_t>(n_polar) * n_azimuth);
  g.weights.reserve(static_cast<size_t>(n_polar) * n_azimuth);
  const double wphi = 2.0 * M_PI / n_azimuth;
  for (int i = 0; i < n_polar; ++i) {
    const double st = std::sqrt(std::max(0.0, 1.0 - mu[i] * mu[i]));
    for (int j = 0; j < n_azimuth; ++j) {
      const double phi = wphi * j;
      g.nodes.push_back({st * std::cos(phi), st * std::sin(phi), mu[i]});
      g.weights.push_back(w[i] * wphi);
    }
  }
  return g;
}

FarFieldPattern sample_pattern(const SphereGrid& grid, const std::function<CVec3(const Vec3&)>& f) {
  FarFieldPattern p;
  p.grid = grid;
  p.values.reserve(grid.nodes.size());
  for (const auto& n : grid.nodes) p.values.push_back(f(n));
  p.evaluator = f;
  return p;
}

double sup_norm(const FarFieldPattern& p) {
  double best = 0.0;
  size_t arg = 0;
  for (size_t i = 0; i < p.values.size(); ++i) {
    const double v = norm(p.values[i]);
    if (v > best) {
      best = v;
      arg = i;
    }
  }
  if (!p.evaluator || p.grid.nodes.empty()) return best;

  // Local pattern-search refinement around the argmax node; step shrinks 3x
  // until the maximum stabilizes to 1e-7 relative.
  Vec3 d = p.grid.nodes[arg];
  double h = M_PI / std::max(1, p.grid.n_polar);
  for (int iter = 0; iter < 40 && h > 1e-9; ++iter) {
    const Vec3 helper = std::abs(d.z) < 0.9 ? Vec3{0, 0, 1} : Vec3{1, 0, 0};
    const Vec3 u = normalized(cross(d, helper));
    const Vec3 v = cross(d, u);
    const double before = best;
    for (int a = -1; a <= 1; ++a)
      for (int b = -1; b <= 1; ++b) {
        if (a == 0 && b == 0) continue;
        const Vec3 cand = normalized(d + u * (h * a) + v * (h * b));
        const double val = norm(p.evaluator(cand));
        if (val > best) {
          best = val;
          d = cand;
        }
      }
    if (best == before) {
      h /= 3.0;
      if (before > 0.0 && h < 1e-9) break;
    }
    if (before > 0.0 && (best - before) / best < 1e-7 && h < 1e-4) break;
  }
  return best;
}

double l2_norm(const FarFieldPattern& p) {
  double s = 0.0;
  for (size_t i = 0; i < p.values.size(); ++i) {
    const double v = norm(p.values[i]);
    s += p.grid.weights[i] * v * v;
  }
  return std::sqrt(s);
}

}  // namespace cloakbench
