#pragma once

#include <array>
#include <cmath>
#include <complex>

namespace cloakbench {

using Complex = std::complex<double>;

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
};

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline Vec3 normalized(const Vec3& a) { return a / norm(a); }

// Complex-valued 3-vector (fields, polarizations, currents).
struct CVec3 {
  Complex x{0.0}, y{0.0}, z{0.0};

  CVec3() = default;
  CVec3(Complex cx, Complex cy, Complex cz) : x(cx), y(cy), z(cz) {}
  explicit CVec3(const Vec3& v) : x(v.x), y(v.y), z(v.z) {}

  CVec3 operator+(const CVec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  CVec3 operator-(const CVec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  CVec3 operator*(Complex s) const { return {x * s, y * s, z * s}; }
};

inline CVec3 operator*(Complex s, const CVec3& v) { return v * s; }

// Bilinear (unconjugated) product; pair with conj() explicitly where needed.
inline Complex dot(const CVec3& a, const CVec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Complex dot(const CVec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline CVec3 conj(const CVec3& a) { return {std::conj(a.x), std::conj(a.y), std::conj(a.z)}; }
inline CVec3 cross(const CVec3& a, const CVec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline CVec3 cross(const Vec3& a, const CVec3& b) { return cross(CVec3(a), b); }
inline CVec3 cross(const CVec3& a, const Vec3& b) { return cross(a, CVec3(b)); }
inline double norm(const CVec3& a) { return std::sqrt(std::norm(a.x) + std::norm(a.y) + std::norm(a.z)); }

// Dense 3x3 real matrix, row-major.
struct Mat3 {
  std::array<double, 9> m{};

  double& operator()(int i, int j) { return m[3 * i + j]; }
  double operator()(int i, int j) const { return m[3 * i + j]; }

  static Mat3 identity() {
    Mat3 r;
    r(0, 0) = r(1, 1) = r(2, 2) = 1.0;
    return r;
  }

  Vec3 apply(const Vec3& v) const {
    return {m[0] * v.x + m[1] * v.y + m[2] * v.z,
            m[3] * v.x + m[4] * v.y + m[5] * v.z,
            m[6] * v.x + m[7] * v.y + m[8] * v.z};
  }
  CVec3 apply(const CVec3& v) const {
    return {m[0] * v.x + m[1] * v.y + m[2] * v.z,
            m[3] * v.x + m[4] * v.y + m[5] * v.z,
            m[6] * v.x + m[7] * v.y + m[8] * v.z};
  }

  Mat3 transpose() const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) r(i, j) = (*this)(j, i);
    return r;
  }

  Mat3 operator*(const Mat3& o) const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double s = 0.0;
        for (int k = 0; k < 3; ++k) s += (*this)(i, k) * o(k, j);
        r(i, j) = s;
      }
    return r;
  }

  double det() const {
    return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
           m[2] * (m[3] * m[7] - m[4] * m[6]);
  }
};

// Rotation by angle about a unit axis (Rodrigues).
inline Mat3 rotation_about(const Vec3& axis, double angle) {
  const double c = std::cos(angle), s = std::sin(angle), t = 1.0 - c;
  const double ux = axis.x, uy = axis.y, uz = axis.z;
  Mat3 r;
  r(0, 0) = c + ux * ux * t;
  r(0, 1) = ux * uy * t - uz * s;
  r(0, 2) = ux * uz * t + uy * s;
  r(1, 0) = uy * ux * t + uz * s;
  r(1, 1) = c + uy * uy * t;
  r(1, 2) = uy * uz * t - ux * s;
  r(2, 0) = uz * ux * t - uy * s;
  r(2, 1) = uz * uy * t + ux * s;
  r(2, 2) = c + uz * uz * t;
  return r;
}

// Rotation taking unit vector `from` onto unit vector `to`.
inline Mat3 rotation_between(const Vec3& from, const Vec3& to) {
  Vec3 ax = cross(from, to);
  const double s = norm(ax);
  const double c = dot(from, to);
  if (s < 1e-14) {
    if (c > 0.0) return Mat3::identity();
    // Antiparallel: rotate pi about any axis orthogonal to `from`.
    Vec3 helper = std::abs(from.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
    Vec3 orth = normalized(cross(from, helper));
    return rotation_about(orth, M_PI);
  }
  return rotation_about(ax / s, std::atan2(s, c));
}

}  // namespace cloakbench
