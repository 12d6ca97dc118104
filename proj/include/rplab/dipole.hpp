#pragma once

#include <cmath>

#include <Eigen/Core>

#include "rplab/error.hpp"

namespace rplab {

using Vec3 = Eigen::Vector3d;

enum class DipoleKind { electric, magnetic };

struct Dipole {
  Vec3 moment = Vec3::Zero();
  DipoleKind kind = DipoleKind::electric;
};

namespace detail {

inline double checked_norm(const Vec3& r) {
  const double n = r.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw Error("dipole separation must be nonzero and finite");
  return n;
}

}  // namespace detail

/// [d1.d2 - 3 (d1.r)(d2.r)] / |r|^3 for electric dipoles; minus that for a
/// pair of persistent-current (magnetic) dipoles.
inline double dipole_energy(const Dipole& d1, const Dipole& d2, const Vec3& r) {
  if (d1.kind != d2.kind) throw Error("dipole_energy needs two dipoles of the same kind");
  const double n = detail::checked_norm(r);
  const Vec3 u = r / n;
  const double e = (d1.moment.dot(d2.moment) - 3.0 * d1.moment.dot(u) * d2.moment.dot(u)) / (n * n * n);
  return d1.kind == DipoleKind::electric ? e : -e;
}

/// Image under the mirror with unit normal n: an electric dipole is reflected
/// and charge conjugated, -d + 2n(d.n); a current loop is reflected as an
/// axial vector, m - 2n(m.n).
inline Dipole reflect_dipole(const Dipole& d, const Vec3& normal) {
  if (std::abs(normal.norm() - 1.0) > 1e-12) throw Error("mirror normal must be a unit vector");
  const double p = d.moment.dot(normal);
  if (d.kind == DipoleKind::electric) return {-d.moment + 2.0 * p * normal, d.kind};
  return {d.moment - 2.0 * p * normal, d.kind};
}

/// Closed form for a dipole and its conjugate image a distance |r| apart:
/// -(d.d + (d.r^)^2) / |r|^3, the same for both kinds.
inline double mirror_pair_energy(const Dipole& d, const Vec3& r) {
  const double n = detail::checked_norm(r);
  const double p = d.moment.dot(r / n);
  return -(d.moment.squaredNorm() + p * p) / (n * n * n);
}

/// The same quantity through the reflection rule and the pair energy.
inline double mirror_pair_energy_via_reflection(const Dipole& d, const Vec3& r) {
  const double n = detail::checked_norm(r);
  return dipole_energy(d, reflect_dipole(d, r / n), r);
}

/// dE/d|r| of the mirror-pair energy at fixed direction: -3 E / |r|.
inline double mirror_pair_radial_derivative(const Dipole& d, const Vec3& r) {
  return -3.0 * mirror_pair_energy(d, r) / detail::checked_norm(r);
}

}  // namespace rplab
