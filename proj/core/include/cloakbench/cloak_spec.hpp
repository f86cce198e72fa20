#pragma once

#include <string>

#include "cloakbench/mie.hpp"
#include "cloakbench/sources.hpp"

namespace cloakbench {

// Lossy-layer exponent triple and the decay exponents it induces.
struct LayerExponents {
  double r = 0.0;
  double s = 2.0;
  double t = 0.0;
  double zeta1 = 0.0;
  double zeta2 = 0.0;
  bool valid = false;          // zeta1 > 0 (nontrivial decay)
  std::string note;            // reason when invalid
};

LayerExponents exponents(double r, double s, double t);

struct PredictedRates {
  double passive = 0.0;       // min(zeta1, 3)
  double active_core = 0.0;   // zeta1 / 2
  double active_shell = 0.0;  // zeta2
};

PredictedRates predicted_rates(const LayerExponents& e);

// Near-cloak configuration in the virtual (pre-blow-up) picture.
struct CloakSpec {
  double rho = 0.05;
  LayerExponents exps;
  double alpha = 1.0;   // lossy-layer permittivity scale
  double beta = 1.0;    // lossy-layer conductivity scale
  double eta = 1.0;     // gamma^{-1} = eta * I
  double eps_core = 1.0;
  double mu_core = 1.0;
  double sigma_core = 0.0;
  double omega = 1.0;
  double r_inner = 1.0;  // cloaked region boundary (physical picture)
  double r_outer = 2.0;  // cloak outer boundary

  void validate() const;  // throws mie::SolverError("invalid-spec", ...)
};

// Uniform-ellipticity window for admissible material scales.
inline constexpr double kScaleFloor = 1e-3;
inline constexpr double kScaleCeil = 1e3;
inline constexpr double kRhoMin = 1e-3;

// Two-layer virtual scatterer equivalent (in the exterior) to the physical
// cloak: small core of radius rho*r_inner/2 plus the lossy layer out to
// rho*r_inner.
mie::LayeredSphere virtual_scatterer(const CloakSpec& spec);

// Pull a physical source supported in the cloaked region back to the virtual
// picture: radii shrink by rho, current density scales by rho^{-2}.
SourceSpec virtual_source(const CloakSpec& spec, const SourceSpec& physical);

}  // namespace cloakbench
