#include "cloakbench/materials.hpp"

#include <cmath>
#include <cstdio>

namespace cloakbench {

RegularityReport check_regular(const MaterialPoint& m, double lo, double hi, double slack) {
  auto window = [&](const SymTensor3& t, const char* name) -> std::string {
    const auto ev = t.eigenvalues();
    if (ev[0] < lo * (1.0 - slack))
      return std::string(name) + " eigenvalue " + std::to_string(ev[0]) + " below floor";
    if (ev[2] > hi * (1.0 + slack))
      return std::string(name) + " eigenvalue " + std::to_string(ev[2]) + " above ceiling";
    return {};
  };
  RegularityReport rep;
  std::string v = window(m.eps, "eps");
  if (v.empty()) v = window(m.mu, "mu");
  if (v.empty()) {
    const auto ev = m.sigma.eigenvalues();
    const double scale = std::max(1.0, std::abs(ev[2]));
    if (ev[0] < -slack * scale) v = "sigma eigenvalue " + std::to_string(ev[0]) + " negative";
  }
  if (!v.empty()) {
    rep.ok = false;
    rep.violation = std::move(v);
  }
  return rep;
}

MaterialPoint push_forward(const MaterialPoint& m, const MapSample& sample) {
  const double det = std::abs(sample.det_jacobian);
  if (det < 1e-300)
    throw mie::SolverError("degenerate-map", "push-forward through a degenerate jacobian");
  const Mat3 df = sample.jacobian;
  const Mat3 dft = df.transpose();
  auto push = [&](const SymTensor3& t) {
    return SymTensor3::from_mat3(df * t.to_mat3() * dft) * (1.0 / det);
  };
  return {push(m.eps), push(m.mu), push(m.sigma)};
}

MapSample radial_blowup_map(const CloakSpec& spec, const Vec3& y) {
  const double r1 = spec.r_inner, r2 = spec.r_outer, rho = spec.rho;
  const double ry = norm(y);
  MapSample s;
  s.point = y;
  if (ry >= r2) {
    s.image = y;
    s.jacobian = Mat3::identity();
    s.det_jacobian = 1.0;
    return s;
  }
  if (ry <= rho * r1) {
    s.image = y / rho;
    Mat3 j = Mat3::identity();
    for (auto& v : j.m) v /= rho;
    s.jacobian = j;
    s.det_jacobian = 1.0 / (rho * rho * rho);
    return s;
  }
  const double a = r1 * r2 * (1.0 - rho) / (r2 - rho * r1);
  const double b = (r2 - r1) / (r2 - rho * r1);
  const double f = a + b * ry;
  const Vec3 u = y / ry;
  Mat3 j;
  const double tang = f / ry;
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) {
      const double ui = (i == 0 ? u.x : i == 1 ? u.y : u.z);
      const double uk = (k == 0 ? u.x : k == 1 ? u.y : u.z);
      j(i, k) = (b - tang) * ui * uk + (i == k ? tang : 0.0);
    }
  s.image = u * f;
  s.jacobian = j;
  s.det_jacobian = b * tang * tang;
  return s;
}

double radial_blowup_preimage(const CloakSpec& spec, double r_physical) {
  const double r1 = spec.r_inner, r2 = spec.r_outer, rho = spec.rho;
  if (r_physical >= r2) return r_physical;
  if (r_physical <= r1) return rho * r_physical;
  const double a = r1 * r2 * (1.0 - rho) / (r2 - rho * r1);
  const double b = (r2 - r1) / (r2 - rho * r1);
  return (r_physical - a) / b;
}

MaterialPoint physical_cloak_tensors(const CloakSpec& spec, const Vec3& x) {
  spec.validate();
  const double r = norm(x);
  const double r1 = spec.r_inner, r2 = spec.r_outer;
  if (r >= r2) return {SymTensor3::identity(), SymTensor3::identity(), SymTensor3::zero()};
  if (r < r1 / 2.0)
    return {SymTensor3::isotropic(spec.eps_core), SymTensor3::isotropic(spec.mu_core),
            SymTensor3::isotropic(spec.sigma_core)};

  // Virtual material at the preimage point, pushed forward through the map.
  const double ry = radial_blowup_preimage(spec, r);
  const Vec3 y = (r > 0.0 ? x * (ry / r) : Vec3{0, 0, ry});
  MaterialPoint virt;
  if (r < r1) {
    // Conducting layer.
    virt = {SymTensor3::isotropic(std::pow(spec.rho, -spec.exps.r) * spec.alpha),
            SymTensor3::isotropic(std::pow(spec.rho, -spec.exps.t) / spec.eta),
            SymTensor3::isotropic(std::pow(spec.rho, -spec.exps.s) * spec.beta)};
  } else {
    virt = {SymTensor3::identity(), SymTensor3::identity(), SymTensor3::zero()};
  }
  return push_forward(virt, radial_blowup_map(spec, y));
}

std::vector<TensorGridRow> tensor_grid(const CloakSpec& spec, int n_radial, int n_polar,
                                       int n_azimuth) {
  std::vector<TensorGridRow> rows;
  rows.reserve(static_cast<size_t>(n_radial) * n_polar * n_azimuth);
  for (int ir = 0; ir < n_radial; ++ir) {
    const double r = spec.r_inner / 2.0 +
                     (spec.r_outer - spec.r_inner / 2.0) * (ir + 0.5) / n_radial;
    for (int it = 0; it < n_polar; ++it) {
      const double th = M_PI * (it + 0.5) / n_polar;
      for (int ip = 0; ip < n_azimuth; ++ip) {
        const double ph = 2.0 * M_PI * ip / n_azimuth;
        const Vec3 x{r * std::sin(th) * std::cos(ph), r * std::sin(th) * std::sin(ph),
                     r * std::cos(th)};
        rows.push_back({x, physical_cloak_tensors(spec, x)});
      }
    }
  }
  return rows;
}

std::string tensor_grid_csv(const std::vector<TensorGridRow>& rows) {
  std::string out =
      "x,y,z,eps_xx,eps_xy,eps_xz,eps_yy,eps_yz,eps_zz,"
      "mu_xx,mu_xy,mu_xz,mu_yy,mu_yz,mu_zz,"
      "sigma_xx,sigma_xy,sigma_xz,sigma_yy,sigma_yz,sigma_zz\n";
  char buf[64];
  auto put = [&](double v, char sep) {
    std::snprintf(buf, sizeof(buf), "%.17e%c", v, sep);
    out += buf;
  };
  for (const auto& row : rows) {
    put(row.x.x, ',');
    put(row.x.y, ',');
    put(row.x.z, ',');
    for (const SymTensor3* t : {&row.m.eps, &row.m.mu, &row.m.sigma}) {
      const bool last = t == &row.m.sigma;
      put(t->xx, ',');
      put(t->xy, ',');
      put(t->xz, ',');
      put(t->yy, ',');
      put(t->yz, ',');
      put(t->zz, last ? '\n' : ',');
    }
  }
  return out;
}

}  // namespace cloakbench
