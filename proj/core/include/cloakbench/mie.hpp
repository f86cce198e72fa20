#pragma once

#include <stdexcept>
#include <vector>

#include "cloakbench/geometry.hpp"
#include "cloakbench/sources.hpp"
#include "cloakbench/specfun.hpp"
#include "cloakbench/sphere_grid.hpp"

namespace cloakbench::mie {

using specfun::ScaledC;

struct SolverError : std::runtime_error {
  std::string code;  // "nonpassive-material", "cutoff-inadequate", "unsupported-source", ...
  SolverError(std::string c, const std::string& msg) : std::runtime_error(msg), code(std::move(c)) {}
};

// One homogeneous layer; eps may carry conduction as Im(eps) = sigma/omega.
struct Shell {
  double outer_radius = 1.0;
  Complex eps{1.0, 0.0};
  Complex mu{1.0, 0.0};
};

// Concentric layers ordered inside-out; the exterior is vacuum.
struct LayeredSphere {
  std::vector<Shell> shells;

  double outer_radius() const { return shells.empty() ? 0.0 : shells.back().outer_radius; }
  void validate(double omega) const;  // ordering, passivity
};

enum class PatternKind {
  Modal,   // canonical-frame coefficients a_n, b_n plus excitation frame
  Dipole,  // exterior degree-1 electric multipole, amplitude vector q
};

// Exterior expansion of an outgoing field. For Modal kind the scattered field
// in the canonical frame (khat = z, pol = x) is
//   E+ = sum_n E_n ( i a_n N3_e1n - b_n M3_o1n ),  E_n = i^n (2n+1)/(n(n+1)),
// and the physical field is this solution rigidly rotated to (khat, pol).
// For Dipole kind, A(xhat) = -(i/omega) (q - (q.xhat) xhat).
struct MultipoleCoefficients {
  PatternKind kind = PatternKind::Modal;
  double omega = 1.0;
  std::vector<Complex> a;  // TM (electric), degree n at index n-1
  std::vector<Complex> b;  // TE (magnetic)
  Vec3 khat{0.0, 0.0, 1.0};
  CVec3 pol{Complex(1.0), Complex(0.0), Complex(0.0)};
  CVec3 dipole_q;

  int cutoff() const { return static_cast<int>(a.size()); }
};

// Per-layer canonical-frame modal amplitudes: inside layer l the degree-n
// radial factor of each parity is c_psi*psi_n(k r) + c_xi*chi-free xi_n(k r).
struct LayerModalField {
  double r_inner = 0.0;
  double r_outer = 1.0;
  Complex k;    // omega*sqrt(eps*mu), principal branch
  Complex eps;  // complex permittivity (conduction absorbed)
  Complex mu;
  std::vector<ScaledC> tm_psi, tm_xi;  // index n-1
  std::vector<ScaledC> te_psi, te_xi;
};

// Full plane-wave solution: exterior coefficients plus interior amplitudes.
struct PlaneWaveSolution {
  LayeredSphere sphere;
  double omega = 1.0;
  PlaneWave incident;
  MultipoleCoefficients coeffs;
  std::vector<LayerModalField> layers;
};

// One radial region of the n=1 source problem (unit current along z).
struct RadialRegion {
  double r_inner = 0.0;
  double r_outer = 1.0;
  Complex k;
  Complex eps;
  Complex mu;
  Complex e_particular;  // -i J0 / (omega eps) inside the forced region, else 0
  Complex c_psi{0.0};
  Complex c_xi{0.0};
  bool exterior = false;
};

// Solution of the constant-current problem. The solve is done for a unit
// current along z; `transfer` maps current density to exterior amplitude, so
// q = transfer * J0 for the actual (vector) density by isotropy.
struct CurrentSolution {
  LayeredSphere sphere;
  double omega = 1.0;
  CVec3 density;
  double src_r_inner = 0.0;
  double src_r_outer = 0.0;
  MultipoleCoefficients coeffs;  // Dipole kind, dipole_q = transfer * density
  Complex transfer;
  std::vector<RadialRegion> regions;  // unit-z solve
};

struct NearFieldSample {
  Vec3 point;
  CVec3 e;  // tangential part of E
  CVec3 h;  // tangential part of H
};

struct EnergyBalance {
  double absorbed = 0.0;  // int sigma |E|^2 over lossy regions
  double rhs = 0.0;       // boundary flux terms plus source work
  double residual = 0.0;  // relative mismatch
};

struct CrossSections {
  double scattering = 0.0;
  double extinction = 0.0;
  double absorption = 0.0;
};

// --- core solves ---

MultipoleCoefficients plane_wave_solve(const LayeredSphere& s, double omega, const PlaneWave& inc);
PlaneWaveSolution plane_wave_solve_full(const LayeredSphere& s, double omega, const PlaneWave& inc);

CurrentSolution current_n1_solve(const LayeredSphere& s, double omega, const CoreBallCurrent& src);
CurrentSolution current_n1_solve(const LayeredSphere& s, double omega, const ShellBallCurrent& src);

// Outgoing field matching a prescribed tangential trace on |x| = tau > 0.
MultipoleCoefficients exterior_trace_solve(double tau, double omega, const TangentialTrace& trace);

// Trace of the canonical plane wave (khat = z, pol = x) on |x| = tau.
TangentialTrace plane_wave_trace(double omega, double tau, int nmax);

// --- field evaluation ---

CVec3 far_field(const MultipoleCoefficients& c, const Vec3& xhat);

FarFieldPattern far_field_pattern(const MultipoleCoefficients& c, const SphereGrid& grid);

// E and H of the outgoing (scattered) field at an exterior point.
void exterior_field(const MultipoleCoefficients& c, const Vec3& x, CVec3& e_out, CVec3& h_out);

// Incident plane-wave fields.
void incident_field(const PlaneWave& inc, double omega, const Vec3& x, CVec3& e_out, CVec3& h_out);

// Tangential traces of the total exterior field on |x| = radius (> sphere).
// When `inc` is non-null the incident field is added to the outgoing one.
std::vector<NearFieldSample> near_field_trace(const MultipoleCoefficients& c, const PlaneWave* inc,
                                              double radius, const SphereGrid& grid);

// Stratton-Chu far field from tangential Cauchy data on |y| = radius.
CVec3 far_field_via_surface_integral(const std::vector<NearFieldSample>& samples,
                                     const SphereGrid& grid, double radius, double omega,
                                     const Vec3& xhat);

// --- diagnostics ---

EnergyBalance energy_balance(const PlaneWaveSolution& sol, double radius, const SphereGrid& grid);
EnergyBalance energy_balance(const CurrentSolution& sol, double radius, const SphereGrid& grid);

CrossSections cross_sections(const MultipoleCoefficients& c);

}  // namespace cloakbench::mie
