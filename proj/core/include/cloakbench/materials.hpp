#pragma once

#include <string>
#include <vector>

#include "cloakbench/cloak_spec.hpp"
#include "cloakbench/sym_tensor.hpp"

namespace cloakbench {

// Checks symmetry-by-construction invariants plus uniform ellipticity of eps
// and mu within [lo, hi] (with small relative slack) and sigma >= 0.
RegularityReport check_regular(const MaterialPoint& m, double lo = kScaleFloor,
                               double hi = kScaleCeil, double slack = 1e-10);

// Push-forward F_* m = DF m DF^T / |det DF| evaluated with the map sample's
// analytic jacobian. Throws mie::SolverError("degenerate-map", ...) when
// |det DF| underflows.
MaterialPoint push_forward(const MaterialPoint& m, const MapSample& sample);

// Radial affine blow-up taking B_{rho*Rin} -> B_{Rin} while fixing |y| = Rout:
// |x| = a + b|y| on rho*Rin <= |y| <= Rout, identity outside.
MapSample radial_blowup_map(const CloakSpec& spec, const Vec3& y);

// Inverse image |y| of a physical radius |x| in [Rin, Rout].
double radial_blowup_preimage(const CloakSpec& spec, double r_physical);

// Physical cloak tensors at a point x: push-forward of the virtual two-layer
// medium through the blow-up map. Defined for |x| >= Rin/2 (the conducting
// layer maps to Rin/2 <= |x| <= Rin).
MaterialPoint physical_cloak_tensors(const CloakSpec& spec, const Vec3& x);

struct TensorGridRow {
  Vec3 x;
  MaterialPoint m;
};

// Samples the physical cloak tensors along radial spokes.
std::vector<TensorGridRow> tensor_grid(const CloakSpec& spec, int n_radial, int n_polar,
                                       int n_azimuth);

// CSV with full double precision (%.17e): x,y,z then eps, mu, sigma entries.
std::string tensor_grid_csv(const std::vector<TensorGridRow>& rows);

}  // namespace cloakbench
