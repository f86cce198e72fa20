#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cloakbench/materials.hpp>
#include <cloakbench/mie.hpp>
#include <cmath>
#include <random>
#include <sstream>

using namespace cloakbench;

namespace {

CloakSpec default_spec() {
  CloakSpec s;
  s.rho = 0.1;
  s.exps = exponents(0.0, 2.0, 0.0);
  return s;
}

Mat3 random_invertible(std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Mat3 m;
  do {
    for (auto& v : m.m) v = u(rng);
  } while (std::abs(m.det()) < 0.1);
  return m;
}

SymTensor3 random_spd(std::mt19937& rng) {
  const Mat3 a = random_invertible(rng);
  return SymTensor3::from_mat3(a * a.transpose());
}

double max_entry_diff(const SymTensor3& a, const SymTensor3& b) {
  return std::max({std::abs(a.xx - b.xx), std::abs(a.xy - b.xy), std::abs(a.xz - b.xz),
                   std::abs(a.yy - b.yy), std::abs(a.yz - b.yz), std::abs(a.zz - b.zz)});
}

}  // namespace

TEST_CASE("regularity windows") {
  MaterialPoint vac{SymTensor3::identity(), SymTensor3::identity(), SymTensor3::zero()};
  CHECK(check_regular(vac).ok);

  MaterialPoint bad_eps = vac;
  bad_eps.eps = SymTensor3::isotropic(1e-4);
  const auto r1 = check_regular(bad_eps);
  CHECK_FALSE(r1.ok);
  CHECK(r1.violation.find("eps") != std::string::npos);

  MaterialPoint bad_mu = vac;
  bad_mu.mu = SymTensor3::isotropic(2e3);
  const auto r2 = check_regular(bad_mu);
  CHECK_FALSE(r2.ok);
  CHECK(r2.violation.find("mu") != std::string::npos);

  MaterialPoint bad_sigma = vac;
  bad_sigma.sigma = SymTensor3{1.0, 0.0, 0.0, 1.0, 0.0, -0.5};
  const auto r3 = check_regular(bad_sigma);
  CHECK_FALSE(r3.ok);
  CHECK(r3.violation.find("sigma") != std::string::npos);

  // boundary values pass thanks to the slack
  MaterialPoint edge = vac;
  edge.eps = SymTensor3::isotropic(1e-3);
  edge.mu = SymTensor3::isotropic(1e3);
  CHECK(check_regular(edge).ok);
}

TEST_CASE("push-forward basics") {
  std::mt19937 rng(7);
  const MaterialPoint m{random_spd(rng), random_spd(rng), random_spd(rng)};

  MapSample ident;
  ident.jacobian = Mat3::identity();
  ident.det_jacobian = 1.0;
  const auto mi = push_forward(m, ident);
  CHECK(max_entry_diff(mi.eps, m.eps) < 1e-15);

  // Isotropic blow-up x = y / rho multiplies isotropic tensors by rho.
  const double rho = 0.1;
  MapSample blow;
  blow.jacobian = Mat3::identity();
  for (auto& v : blow.jacobian.m) v /= rho;
  blow.det_jacobian = 1.0 / (rho * rho * rho);
  const MaterialPoint vac{SymTensor3::identity(), SymTensor3::identity(), SymTensor3::zero()};
  const auto mb = push_forward(vac, blow);
  CHECK(max_entry_diff(mb.eps, SymTensor3::isotropic(rho)) < 1e-15);
  CHECK(max_entry_diff(mb.mu, SymTensor3::isotropic(rho)) < 1e-15);

  MapSample degenerate;
  degenerate.jacobian = Mat3{};
  degenerate.det_jacobian = 0.0;
  CHECK_THROWS_WITH_AS(push_forward(m, degenerate), doctest::Contains("degenerate"),
                       mie::SolverError);
}

TEST_CASE("push-forward functoriality and positivity") {
  std::mt19937 rng(42);
  for (int trial = 0; trial < 100; ++trial) {
    const Mat3 a = random_invertible(rng);
    const Mat3 b = random_invertible(rng);
    MapSample fa{{}, {}, a, a.det()};
    MapSample fb{{}, {}, b, b.det()};
    MapSample fab{{}, {}, b * a, (b * a).det()};

    const MaterialPoint m{random_spd(rng), random_spd(rng), random_spd(rng)};
    const auto two_step = push_forward(push_forward(m, fa), fb);
    const auto one_step = push_forward(m, fab);
    const double scale = std::max(1.0, std::abs(one_step.eps.eigenvalues()[2]));
    CHECK(max_entry_diff(two_step.eps, one_step.eps) < 1e-12 * scale);
    CHECK(max_entry_diff(two_step.mu, one_step.mu) < 1e-12 * scale);
    CHECK(max_entry_diff(two_step.sigma, one_step.sigma) < 1e-12 * scale);

    // positivity survives the push-forward
    CHECK(one_step.eps.eigenvalues()[0] > 0.0);
  }
}

TEST_CASE("radial map worked example and branches") {
  const CloakSpec spec = default_spec();

  const auto mid = radial_blowup_map(spec, Vec3{1.0, 0.0, 0.0});
  CHECK(mid.image.x == doctest::Approx(1.47368421052631575).epsilon(1e-12));
  CHECK(mid.image.y == 0.0);
  CHECK(mid.image.z == 0.0);

  // identity outside
  const auto out = radial_blowup_map(spec, Vec3{0.0, 2.5, 0.0});
  CHECK(out.image.y == 2.5);
  CHECK(out.det_jacobian == 1.0);

  // pure dilation inside the small ball
  const auto in = radial_blowup_map(spec, Vec3{0.02, 0.03, 0.01});
  CHECK(in.image.x == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(in.det_jacobian == doctest::Approx(1e3).epsilon(1e-12));

  // continuity across both interfaces
  for (double r : {0.1, 2.0}) {
    const Vec3 dir{0.36, 0.48, 0.8};
    const auto lo = radial_blowup_map(spec, dir * (r - 1e-9));
    const auto hi = radial_blowup_map(spec, dir * (r + 1e-9));
    CHECK(norm(lo.image - hi.image) < 1e-7);
  }

  // preimage round trip
  for (double rp : {0.6, 1.0, 1.3, 1.9, 2.0, 3.0}) {
    const double ry = radial_blowup_preimage(spec, rp);
    const auto s = radial_blowup_map(spec, Vec3{0.0, 0.0, ry});
    CHECK(norm(s.image) == doctest::Approx(rp).epsilon(1e-12));
  }
}

TEST_CASE("radial map jacobian against finite differences") {
  const CloakSpec spec = default_spec();
  const Vec3 pts[] = {{0.3, 0.4, 0.5}, {0.05, 0.02, 0.01}, {1.2, -0.3, 0.9}, {-0.2, 0.11, 0.05}};
  const double h = 1e-6;
  for (const Vec3& y : pts) {
    const auto s = radial_blowup_map(spec, y);
    CHECK(std::abs(s.jacobian.det() - s.det_jacobian) < 1e-10 * std::abs(s.det_jacobian));
    for (int k = 0; k < 3; ++k) {
      Vec3 dy{};
      (k == 0 ? dy.x : k == 1 ? dy.y : dy.z) = h;
      const Vec3 fp = radial_blowup_map(spec, y + dy).image;
      const Vec3 fm = radial_blowup_map(spec, y - dy).image;
      const Vec3 col = (fp - fm) / (2.0 * h);
      CHECK(std::abs(s.jacobian(0, k) - col.x) < 1e-6);
      CHECK(std::abs(s.jacobian(1, k) - col.y) < 1e-6);
      CHECK(std::abs(s.jacobian(2, k) - col.z) < 1e-6);
    }
  }
}

TEST_CASE("physical cloak tensors by region") {
  CloakSpec spec = default_spec();
  spec.eps_core = 2.0;
  const double rho = spec.rho;

  // cloaked interior: prescribed core material untouched
  const auto core = physical_cloak_tensors(spec, Vec3{0.1, 0.1, 0.1});
  CHECK(max_entry_diff(core.eps, SymTensor3::isotropic(2.0)) < 1e-15);

  // conducting image layer: isotropic rho * (virtual layer) for (0,2,0)
  const auto layer = physical_cloak_tensors(spec, Vec3{0.0, 0.75, 0.0});
  CHECK(max_entry_diff(layer.eps, SymTensor3::isotropic(rho)) < 1e-12);
  CHECK(max_entry_diff(layer.mu, SymTensor3::isotropic(rho)) < 1e-12);
  CHECK(max_entry_diff(layer.sigma, SymTensor3::isotropic(1.0 / rho)) < 1e-10);

  // anisotropic cloak annulus: tangential eigenvalue 1/b, radial ~ rho^2
  const double b = (spec.r_outer - spec.r_inner) / (spec.r_outer - rho * spec.r_inner);
  const auto ann = physical_cloak_tensors(spec, Vec3{1.0 + 1e-9, 0.0, 0.0});
  const auto ev = ann.eps.eigenvalues();
  CHECK(ev[0] == doctest::Approx(b * rho * rho).epsilon(1e-6));
  CHECK(ev[2] == doctest::Approx(1.0 / b).epsilon(1e-6));

  // vacuum outside
  const auto vac = physical_cloak_tensors(spec, Vec3{0.0, 0.0, 2.5});
  CHECK(max_entry_diff(vac.eps, SymTensor3::identity()) < 1e-15);
  CHECK(max_entry_diff(vac.sigma, SymTensor3::zero()) < 1e-15);
}

TEST_CASE("tensor grid export") {
  const CloakSpec spec = default_spec();
  const auto rows = tensor_grid(spec, 2, 2, 4);
  CHECK(rows.size() == 16);

  const std::string csv = tensor_grid_csv(rows);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line ==
        "x,y,z,eps_xx,eps_xy,eps_xz,eps_yy,eps_yz,eps_zz,"
        "mu_xx,mu_xy,mu_xz,mu_yy,mu_yz,mu_zz,"
        "sigma_xx,sigma_xy,sigma_xz,sigma_yy,sigma_yz,sigma_zz");
  int n = 0;
  while (std::getline(in, line)) {
    CHECK(std::count(line.begin(), line.end(), ',') == 20);
    ++n;
  }
  CHECK(n == 16);
  // full precision round-trips
  const double v = std::strtod(csv.substr(csv.find('\n') + 1).c_str(), nullptr);
  CHECK(v == rows[0].x.x);
}
