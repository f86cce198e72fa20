#pragma once

#include <variant>
#include <vector>

#include "cloakbench/geometry.hpp"

namespace cloakbench {

// Incident plane wave E^i = pol * exp(i omega khat.x), with pol.khat = 0.
struct PlaneWave {
  Vec3 khat{0.0, 0.0, 1.0};
  CVec3 pol{Complex(1.0), Complex(0.0), Complex(0.0)};
};

// Constant-density current in a ball centered at the origin.
struct CoreBallCurrent {
  double radius = 0.25;
  CVec3 density{Complex(1.0), Complex(0.0), Complex(0.0)};
};

// Constant-density current in a spherical shell r_inner <= |x| <= r_outer.
struct ShellBallCurrent {
  double r_inner = 0.5;
  double r_outer = 1.0;
  CVec3 density{Complex(1.0), Complex(0.0), Complex(0.0)};
};

// Prescribed tangential electric trace on a sphere, expanded in the canonical
// azimuthal angular family (the plane-wave m = +/-1 structure). Degree n
// coefficients are stored at index n-1. The trace field is
//   sum_n E_n [ i e_n * (N-type tangential angular part) + f_n * (M-type) ]
// with E_n = i^n (2n+1)/(n(n+1)) and radial factors replaced by 1.
struct TangentialTrace {
  std::vector<Complex> e;  // TM (electric) parity
  std::vector<Complex> f;  // TE (magnetic) parity
};

using SourceSpec = std::variant<PlaneWave, CoreBallCurrent, ShellBallCurrent, TangentialTrace>;

}  // namespace cloakbench
