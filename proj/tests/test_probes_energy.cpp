#include <gtest/gtest.h>

#include <cmath>

#include "rplab/energy.hpp"
#include "rplab/inequalities.hpp"
#include "rplab/probes.hpp"

using namespace rplab;

namespace {

/// E_mir(z) of a Z_2 charge pair on a 2d torus Lt x L, from the character
/// expansion: lambda_0 = 2 cosh b, lambda_1 = 2 sinh b.
double torus_energy(double beta, int lt, int l, int z) {
  const double l0 = 2 * std::cosh(beta), l1 = 2 * std::sinh(beta);
  const int area = lt * l, inside = lt * z;
  const double v = (std::pow(l0, area - inside) * std::pow(l1, inside) + std::pow(l1, area - inside) * std::pow(l0, inside)) /
                   (std::pow(l0, area) + std::pow(l1, area));
  return -std::log(v) / lt;
}

EnergyOptions center_fixed() {
  EnergyOptions o;
  o.enumeration.reduction = SymmetryReduction::gauge_and_center;
  return o;
}

}  // namespace

TEST(ProbeWeight, IdentityConfiguration) {
  const auto g = build_geometry({3, 4, 2}, 1, 0);
  const U1Group u1;
  const auto cfg = identity_config(u1, g);
  EXPECT_EQ(probe_weight(u1, g, cfg, PointCharge{3, 5}), cplx(1.0));
  const std::vector<int> w{0, 4, 9};
  EXPECT_NEAR(probe_weight(u1, g, cfg, Dielectric{0.7, w}).real(), std::exp(0.7 * 3), 1e-12);
  const ZnGroup z2(2);
  auto zc = identity_config(z2, g);
  EXPECT_EQ(probe_weight(z2, g, zc, Conductor{w}), cplx(1.0));
  zc[g.plaquette_links(4)[0]] = 1;
  EXPECT_EQ(probe_weight(z2, g, zc, Conductor{w}), cplx(0.0));
}

TEST(ProbeWeight, U1ConductorIsRejected) {
  const auto g = build_geometry({2, 4}, 1, 0);
  const U1Group u1;
  EXPECT_THROW(probe_weight(u1, g, identity_config(u1, g), Conductor{{0}}), ModelError);
  const Probe d = conductor_as_dielectric(Conductor{{0, 1}}, 40.0);
  ASSERT_TRUE(std::holds_alternative<Dielectric>(d));
  EXPECT_EQ(std::get<Dielectric>(d).alpha, 40.0);
}

TEST(MirrorProbe, ChargeIsReflectedAndConjugated) {
  const auto g = build_geometry({2, 8}, 1, 0);
  const Probe m = mirror_probe(g, PointCharge{1, g.site({0, 2, 0, 0})});
  ASSERT_TRUE(std::holds_alternative<PointCharge>(m));
  EXPECT_EQ(std::get<PointCharge>(m).q, -1);
  EXPECT_EQ(std::get<PointCharge>(m).site, g.site({0, 6, 0, 0}));
}

TEST(MirrorProbe, InvolutionForAllKinds) {
  const auto g = build_geometry({2, 6, 2}, 1, 0);
  ProbeSpec body{ProbeKind::dielectric, 1, 0.4, box_shape(3, {0, 0, 0, 0}, {0, 1, 1, 0}, true)};
  const Probe d = place(g, body, {0, 1, 0, 0});
  body.kind = ProbeKind::conductor;
  const Probe c = place(g, body, {0, 1, 0, 0});
  for (const Probe& p : {Probe{PointCharge{2, g.site({0, 1, 1, 0})}}, d, c}) {
    const Probe back = mirror_probe(g, mirror_probe(g, p));
    EXPECT_EQ(compile(g, back).support(g), compile(g, p).support(g));
    EXPECT_EQ(back.index(), p.index());
  }
}

TEST(MirrorProbe, RefusesProbesOnTheMirror) {
  const auto g = build_geometry({2, 6}, 1, 0);
  EXPECT_THROW(mirror_probe(g, PointCharge{1, g.site({0, 0, 0, 0})}), SupportError);
}

TEST(Placement, AnchorForSeparationCentersTheProbe) {
  const auto g = build_geometry({2, 12}, 1, 0);
  const ProbeSpec charge;
  for (int z : {2, 4, 6}) EXPECT_EQ(anchor_for_separation(g, charge, Rotation{}, z), z / 2);
  EXPECT_THROW(anchor_for_separation(g, charge, Rotation{}, 3), GeometryError);
  // a one-link-wide slab along the mirror normal has its centroid on a half-integer
  ProbeSpec slab{ProbeKind::conductor, 1, 0.0, {{{{0, 0, 0, 0}, 1, -1}}, {}}};
  EXPECT_EQ(anchor_for_separation(g, slab, Rotation{}, 3), 1);
}

TEST(Placement, PlaneRotationsAreQuarterTurns) {
  const auto rots = plane_rotations(1, 2);
  ASSERT_EQ(rots.size(), 4u);
  const Coord e1{0, 1, 0, 0};
  EXPECT_EQ(rots[1].apply(e1), (Coord{0, 0, 1, 0}));
  EXPECT_EQ(rots[2].apply(e1), (Coord{0, -1, 0, 0}));
  EXPECT_EQ(rots[3].apply(e1), (Coord{0, 0, -1, 0}));
  EXPECT_EQ(spatial_rotations(3).size(), 4u);
  EXPECT_EQ(spatial_rotations(4).size(), 24u);
}

TEST(Correlator, NoProbesGivesOne) {
  const auto g = build_geometry({2, 4}, 1, 0);
  const GaugeModel<ZnGroup> m{ZnGroup(2), 0.5};
  const Estimate e = correlator(m, g, {}, EnergyOptions{});
  EXPECT_EQ(e.mean, cplx(1.0));
  EXPECT_EQ(e.std_error, 0.0);
}

TEST(Correlator, ConductorMcMatchesEnumeration) {
  const auto g = build_geometry({2, 2, 2}, 2, 0);
  const GaugeModel<ZnGroup> m{ZnGroup(2), 0.5};
  const Probe c = Conductor{{3}};
  EnergyOptions ex;
  ex.enumeration.reduction = SymmetryReduction::gauge;
  const double exact = correlator(m, g, {c}, ex).mean.real();
  McParams p;
  p.seed = 31;
  p.measure_sweeps = 20000;
  const Estimate mc = correlator_mc(m, g, {c}, p);
  EXPECT_LE(std::abs(mc.mean.real() - exact), 3 * mc.std_error);
}

TEST(InteractionEnergy, TrivialFunctionalsGiveZero) {
  const auto g = build_geometry({2, 4}, 1, 0);
  const GaugeModel<ZnGroup> m{ZnGroup(2), 0.5};
  const Probe none = Dielectric{0.0, {0}};
  const Probe other = Dielectric{0.0, {5}};
  EnergyOptions o;
  o.enumeration.reduction = SymmetryReduction::gauge;
  EXPECT_NEAR(interaction_energy(m, g, none, other, o).mean.real(), 0.0, 1e-14);
}

TEST(InteractionEnergy, StrongCouplingClusters) {
  const auto g = build_geometry({2, 8, 2}, 1, 0);
  const GaugeModel<U1Group> m{U1Group{}, 0.0};
  ProbeSpec slab{ProbeKind::dielectric, 1, 0.3, slab_shape(g, 1, 1)};
  const Probe a = place(g, slab, {0, 1, 0, 0});
  const Probe b = place(g, slab, {0, 5, 0, 0});
  EnergyOptions o;
  o.mode = EvalMode::mc;
  o.mc.seed = 8;
  o.mc.measure_sweeps = 4000;
  const Estimate e = interaction_energy(m, g, a, b, o);
  EXPECT_LE(std::abs(e.mean.real()), 3 * e.std_error + 1e-12);
}

TEST(InteractionEnergy, OverlappingProbesAreRejected) {
  const auto g = build_geometry({2, 4}, 1, 0);
  const GaugeModel<ZnGroup> m{ZnGroup(2), 0.5};
  EXPECT_THROW(interaction_energy(m, g, Dielectric{0.1, {1, 2}}, Dielectric{0.1, {2}}, EnergyOptions{}), GeometryError);
}

TEST(EnergyScan, Z2ChargePairMatchesTorusFormula) {
  const auto g = build_geometry({2, 12}, 1, 0);
  const GaugeModel<ZnGroup> m{ZnGroup(2), 0.7};
  const auto curve = energy_scan(m, g, ProbeSpec{}, {2, 4, 6}, center_fixed());
  ASSERT_EQ(curve.energies.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i)
    EXPECT_NEAR(curve.energies[i].mean.real(), torus_energy(0.7, 2, 12, curve.separations[i]), 1e-12);
  EXPECT_LE(curve.energies[0].mean.real(), curve.energies[1].mean.real());
  EXPECT_LE(curve.energies[1].mean.real(), curve.energies[2].mean.real());
}

TEST(EnergyScan, OpenSpaceGivesLinearPotential) {
  // with open space the charge pair correlator is tanh(b)^(Lt z)
  const auto g = build_geometry({2, 9}, {Boundary::periodic, Boundary::open}, 1, 4);
  const GaugeModel<ZnGroup> m{ZnGroup(2), 0.5};
  EnergyOptions o;
  o.enumeration.reduction = SymmetryReduction::gauge;
  const auto curve = energy_scan(m, g, ProbeSpec{}, {2, 4, 6, 8}, o);
  for (std::size_t i = 0; i < curve.separations.size(); ++i) {
    const double expect = -curve.separations[i] * std::log(std::tanh(0.5));
    EXPECT_NEAR(curve.energies[i].mean.real(), expect, 1e-12 * expect);  // relative: log of a ~1e-5 correlator
  }
}

TEST(EnergyScan, SingleSeparationGivesOnePoint) {
  const auto g = build_geometry({2, 8}, 1, 0);
  const GaugeModel<ZnGroup> m{ZnGroup(3), 0.5};
  const auto curve = energy_scan(m, g, ProbeSpec{}, {2}, center_fixed());
  EXPECT_EQ(curve.energies.size(), 1u);
  EXPECT_TRUE(std::isfinite(curve.energies[0].mean.real()));
}

TEST(EnergyScan, RejectsUnsortedSeparationsAndMirrorContact) {
  const auto g = build_geometry({2, 8}, 1, 0);
  const GaugeModel<ZnGroup> m{ZnGroup(2), 0.5};
  EXPECT_THROW(energy_scan(m, g, ProbeSpec{}, {4, 2}, center_fixed()), Error);
  EXPECT_THROW(energy_scan(m, g, ProbeSpec{}, {0}, center_fixed()), SupportError);
}

TEST(EnergyScan, ZeroCorrelatorIsReportedExactly) {
  // a lone charge has <P> = 0, so forcing the self-energy subtraction
  // needs the logarithm of zero
  const auto g = build_geometry({2, 8}, 1, 0);
  const GaugeModel<ZnGroup> m{ZnGroup(2), 0.5};
  EnergyOptions o;
  o.enumeration.reduction = SymmetryReduction::gauge;
  o.self_energy = SelfEnergy::subtract;
  EXPECT_THROW(interaction_energy(m, g, PointCharge{1, g.site({0, 1, 0, 0})}, PointCharge{1, g.site({0, 3, 0, 0})}, o),
               ZeroCorrelatorError);
}

TEST(OrientationMatrix, SymmetricForRealCorrelators) {
  const auto g = build_geometry({2, 2, 5}, {Boundary::periodic, Boundary::open, Boundary::open}, 2, 2);
  const GaugeModel<ZnGroup> m{ZnGroup(2), 0.6};
  ProbeSpec l_shape{ProbeKind::conductor, 1, 0.0, {{{{0, 0, 0, 0}, 1, -1}, {{0, 0, 0, 0}, 2, -1}}, {0, 1, 1, 0}}};
  EnergyOptions o = center_fixed();
  const auto rots = plane_rotations(1, 2);
  const auto mtx = orientation_matrix(m, g, l_shape, {0, 0, 3, 0}, {rots[0], rots[1]}, o);
  ASSERT_EQ(mtx.size(), 2u);
  EXPECT_NEAR(mtx[0][1].mean.real(), mtx[1][0].mean.real(), 1e-12);
  for (const auto& v : torque_verdicts(mtx)) EXPECT_NE(v.status, Status::fail) << v.check << " " << v.details;
}
