#include <gtest/gtest.h>

#include <cmath>

#include "rplab/dipole.hpp"
#include "rplab/rng.hpp"

using namespace rplab;

namespace {

Vec3 random_vec(Rng& rng) { return {rng.normal(), rng.normal(), rng.normal()}; }

}  // namespace

TEST(DipoleEnergy, Examples) {
  const Vec3 z = Vec3::UnitZ();
  const Dipole d{z, DipoleKind::electric};
  EXPECT_NEAR(dipole_energy(d, d, 2.0 * z), -2.0 / 8.0, 1e-15);
  const Dipole dx{Vec3::UnitX(), DipoleKind::electric}, dy{Vec3::UnitY(), DipoleKind::electric};
  EXPECT_EQ(dipole_energy(dx, dy, z), 0.0);
  // a magnetic pair has the opposite sign
  const Dipole m{z, DipoleKind::magnetic};
  EXPECT_NEAR(dipole_energy(m, m, 2.0 * z), 2.0 / 8.0, 1e-15);
}

TEST(DipoleEnergy, Bilinear) {
  Rng rng(4);
  for (int i = 0; i < 100; ++i) {
    const Dipole a{random_vec(rng), DipoleKind::electric}, b{random_vec(rng), DipoleKind::electric};
    const Vec3 r = random_vec(rng);
    const Dipole a2{2.0 * a.moment, a.kind};
    EXPECT_NEAR(dipole_energy(a2, b, r), 2.0 * dipole_energy(a, b, r), 1e-10 * (1 + std::abs(dipole_energy(a, b, r))));
    EXPECT_NEAR(dipole_energy(a, b, r), dipole_energy(b, a, r), 1e-12 * (1 + std::abs(dipole_energy(a, b, r))));
  }
}

TEST(DipoleEnergy, RejectsZeroSeparationAndMixedKinds) {
  const Dipole e{Vec3::UnitZ(), DipoleKind::electric}, m{Vec3::UnitZ(), DipoleKind::magnetic};
  EXPECT_THROW(dipole_energy(e, e, Vec3::Zero()), Error);
  EXPECT_THROW(dipole_energy(e, m, Vec3::UnitX()), Error);
}

TEST(ReflectDipole, Examples) {
  const Vec3 n = Vec3::UnitZ();
  EXPECT_EQ(reflect_dipole({n, DipoleKind::electric}, n).moment, n);
  EXPECT_EQ(reflect_dipole({Vec3::UnitX(), DipoleKind::electric}, n).moment, -Vec3::UnitX());
  EXPECT_EQ(reflect_dipole({n, DipoleKind::magnetic}, n).moment, -n);
  EXPECT_EQ(reflect_dipole({Vec3::UnitX(), DipoleKind::magnetic}, n).moment, Vec3::UnitX());
  EXPECT_THROW(reflect_dipole({n, DipoleKind::electric}, 2.0 * n), Error);
}

TEST(MirrorPair, Examples) {
  const Vec3 z = Vec3::UnitZ();
  EXPECT_NEAR(mirror_pair_energy({z, DipoleKind::electric}, 1.5 * z), -2.0 / std::pow(1.5, 3), 1e-15);
  EXPECT_NEAR(mirror_pair_energy({2.0 * Vec3::UnitX(), DipoleKind::electric}, 1.5 * z), -4.0 / std::pow(1.5, 3),
              1e-15);
}

TEST(MirrorPair, ClosedFormMatchesReflectionPath) {
  Rng rng(2024);
  for (auto kind : {DipoleKind::electric, DipoleKind::magnetic})
    for (int i = 0; i < 1000; ++i) {
      const Dipole d{random_vec(rng), kind};
      const Vec3 r = random_vec(rng);
      const double a = mirror_pair_energy(d, r), b = mirror_pair_energy_via_reflection(d, r);
      EXPECT_LE(a, 0.0);
      EXPECT_NEAR(a, b, 1e-12 * std::abs(a));
    }
}

TEST(MirrorPair, RadialDerivative) {
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    const Dipole d{random_vec(rng), DipoleKind::electric};
    const Vec3 u = random_vec(rng).normalized();
    const double r = 0.5 + 3.0 * rng.uniform(), h = 1e-5 * r;
    const double fd = (mirror_pair_energy(d, (r + h) * u) - mirror_pair_energy(d, (r - h) * u)) / (2 * h);
    const double an = mirror_pair_radial_derivative(d, r * u);
    EXPECT_NEAR(fd, an, 1e-6 * std::abs(an));
    EXPECT_GE(an, 0.0);  // attraction: energy rises with distance
  }
}
