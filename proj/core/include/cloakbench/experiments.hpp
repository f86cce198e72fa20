#pragma once

#include <string>
#include <vector>

#include "cloakbench/cloak_spec.hpp"
#include "cloakbench/materials.hpp"

namespace cloakbench {

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

// Ordinary least squares of log(norm) against log(1/rho) (or log(1/tau)).
FitResult fit_slope(const std::vector<double>& scales, const std::vector<double>& norms);

struct SweepPoint {
  double scale = 0.0;  // rho or tau
  double sup = 0.0;    // sup-norm of the far-field pattern
  double l2 = 0.0;     // L2 norm
  double energy_residual = 0.0;  // when an energy identity applies; else 0
};

struct SweepResult {
  std::string experiment;
  std::vector<SweepPoint> points;
  FitResult fit;        // on sup norms
  FitResult fit_l2;     // on L2 norms
  double predicted = 0.0;
  bool pass = false;    // slope >= predicted - tolerance and r^2 acceptable
};

struct SweepOptions {
  int n_polar = 64;
  int n_azimuth = 128;
  int threads = 1;
  double slope_tolerance = 0.3;
  double r2_floor = 0.98;
};

// Geometric grid of n points from hi down to lo.
std::vector<double> geometric_grid(double hi, double lo, int n);

// Plane-wave illumination of the regularized cloak; sup-norm decay vs rho.
SweepResult passive_rate_experiment(const CloakSpec& base, const std::vector<double>& rhos,
                                    const PlaneWave& inc, const SweepOptions& opts);

// Active source inside the cloaked region (core ball or shell current).
SweepResult active_rate_experiment(const CloakSpec& base, const std::vector<double>& rhos,
                                   const SourceSpec& src, const SweepOptions& opts);

enum class TraceMode { FixedProfile, IncidentTrace };

// Radiation from a prescribed trace on a vanishing sphere |x| = tau.
SweepResult small_inclusion_experiment(const std::vector<double>& taus, TraceMode mode,
                                       double omega, const SweepOptions& opts);

// Same passive sweep with the conducting layer deleted: once with the benign
// core as-is, and once maximizing the norm per rho over a lossless
// high-contrast core permittivity scan. The worst-case run demonstrates the
// non-uniform decay that the conducting layer suppresses.
struct CloakBustResult {
  SweepResult with_layer;
  SweepResult no_layer_benign;
  SweepResult no_layer_worst;          // per-rho max over the eps scan
  std::vector<double> core_eps_grid;   // 20 log-spaced values in [1, 1e4]
};

CloakBustResult cloak_bust_experiment(const CloakSpec& base, const std::vector<double>& rhos,
                                      const PlaneWave& inc, const SweepOptions& opts);

std::string sweep_to_json(const SweepResult& r);
std::string sweep_to_csv(const SweepResult& r);

}  // namespace cloakbench
