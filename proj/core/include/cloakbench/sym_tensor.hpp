#pragma once

#include <array>
#include <string>

#include "cloakbench/geometry.hpp"

namespace cloakbench {

// Real symmetric 3x3 tensor; only the six independent entries are stored, so
// symmetry is structural. Natural units (eps0 = mu0 = 1).
struct SymTensor3 {
  double xx = 0.0, xy = 0.0, xz = 0.0, yy = 0.0, yz = 0.0, zz = 0.0;

  static SymTensor3 identity() { return {1.0, 0.0, 0.0, 1.0, 0.0, 1.0}; }
  static SymTensor3 isotropic(double v) { return {v, 0.0, 0.0, v, 0.0, v}; }
  static SymTensor3 zero() { return {}; }

  Mat3 to_mat3() const {
    Mat3 m;
    m(0, 0) = xx; m(0, 1) = xy; m(0, 2) = xz;
    m(1, 0) = xy; m(1, 1) = yy; m(1, 2) = yz;
    m(2, 0) = xz; m(2, 1) = yz; m(2, 2) = zz;
    return m;
  }

  // Symmetrizes (A + A^T)/2; entries off the symmetric part are averaged away.
  static SymTensor3 from_mat3(const Mat3& m) {
    return {m(0, 0), 0.5 * (m(0, 1) + m(1, 0)), 0.5 * (m(0, 2) + m(2, 0)),
            m(1, 1), 0.5 * (m(1, 2) + m(2, 1)), m(2, 2)};
  }

  Vec3 apply(const Vec3& v) const { return to_mat3().apply(v); }

  SymTensor3 operator*(double s) const { return {xx * s, xy * s, xz * s, yy * s, yz * s, zz * s}; }

  // Eigenvalues in ascending order.
  std::array<double, 3> eigenvalues() const;
};

struct MaterialPoint {
  SymTensor3 eps;
  SymTensor3 mu;
  SymTensor3 sigma;
};

// Sample of a coordinate map: point, image, analytic jacobian, determinant.
struct MapSample {
  Vec3 point;      // y, virtual-domain coordinates
  Vec3 image;      // x = F(y)
  Mat3 jacobian;   // DF(y)
  double det_jacobian = 1.0;
};

struct RegularityReport {
  bool ok = true;
  std::string violation;  // empty when ok
};

}  // namespace cloakbench
