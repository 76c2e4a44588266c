#pragma once

#include <array>
#include <cmath>

namespace hoigaze::data {

/// 3-D point or direction. Derives from std::array so the arithmetic below
/// is found by argument-dependent lookup.
struct Vec3 : std::array<double, 3> {};

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline double distance(const Vec3& a, const Vec3& b) { return norm(a - b); }

inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

/// Caller guarantees a non-zero vector.
inline Vec3 normalized(const Vec3& a) { return (1.0 / norm(a)) * a; }

/// Angle in radians between two non-zero vectors.
inline double angle_between(const Vec3& a, const Vec3& b) {
  double c = dot(a, b) / (norm(a) * norm(b));
  if (c > 1.0) c = 1.0;
  if (c < -1.0) c = -1.0;
  return std::acos(c);
}

/// Rotates `v` about unit `axis` by `angle` radians (Rodrigues).
inline Vec3 rotate(const Vec3& v, const Vec3& axis, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return c * v + s * cross(axis, v) + ((1.0 - c) * dot(axis, v)) * axis;
}

/// Spherical interpolation between unit vectors; t = 0 gives `from`.
inline Vec3 slerp(const Vec3& from, const Vec3& to, double t) {
  const double omega = angle_between(from, to);
  if (omega < 1e-9) return from;
  const double s = std::sin(omega);
  if (s < 1e-9) {
    // Antiparallel: rotate about any perpendicular axis.
    Vec3 axis = cross(from, Vec3{1.0, 0.0, 0.0});
    if (norm(axis) < 1e-6) axis = cross(from, Vec3{0.0, 1.0, 0.0});
    return rotate(from, normalized(axis), t * omega);
  }
  return normalized((std::sin((1.0 - t) * omega) / s) * from + (std::sin(t * omega) / s) * to);
}

}  // namespace hoigaze::data
