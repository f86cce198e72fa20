#pragma once

#include <functional>
#include <vector>

#include "cloakbench/geometry.hpp"

namespace cloakbench {

// Product quadrature on the unit sphere: Gauss-Legendre in cos(theta),
// uniform (trapezoidal/periodic) in phi. Weights sum to 4*pi.
struct SphereGrid {
  std::vector<Vec3> nodes;
  std::vector<double> weights;
  int n_polar = 0;
  int n_azimuth = 0;
};

SphereGrid make_grid(int n_polar, int n_azimuth);

// Far-field pattern sampled on a grid. When an evaluator is attached,
// sup_norm refines locally around the argmax node.
struct FarFieldPattern {
  SphereGrid grid;
  std::vector<CVec3> values;
  std::function<CVec3(const Vec3&)> evaluator;  // optional
};

FarFieldPattern sample_pattern(const SphereGrid& grid, const std::function<CVec3(const Vec3&)>& f);

double sup_norm(const FarFieldPattern& p);
double l2_norm(const FarFieldPattern& p);

// Gauss-Legendre nodes/weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace cloakbench
