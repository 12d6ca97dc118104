#include <gtest/gtest.h>

#include "rplab/lattice.hpp"

using namespace rplab;

namespace {

LatticeGeometry periodic(std::vector<int> ext, int rdim, int plane) {
  return build_geometry(std::move(ext), rdim, plane);
}

int z_of(const LatticeGeometry& g, int site) { return g.coords(site)[g.reflection_dim()]; }

}  // namespace

TEST(Geometry, CountsFourDimensional) {
  const auto g = periodic({4, 2, 2, 2}, 3, 0);
  EXPECT_EQ(g.num_sites(), 32);
  EXPECT_EQ(g.num_links(), 128);
  EXPECT_EQ(g.num_plaquettes(), 32 * 6);
}

TEST(Geometry, CountsThreeDimensional) {
  const auto g = periodic({2, 2, 2}, 2, 0);
  EXPECT_EQ(g.num_sites(), 8);
  EXPECT_EQ(g.num_links(), 24);
}

TEST(Geometry, OpenDirectionDropsBoundaryLinks) {
  const auto g = build_geometry({4, 3}, {Boundary::periodic, Boundary::open}, 1, 1);
  EXPECT_EQ(g.num_sites(), 12);
  EXPECT_EQ(g.num_links(), 12 + 8);
  EXPECT_EQ(g.num_plaquettes(), 8);
}

TEST(Geometry, RejectsOddPeriodicReflectionExtent) {
  EXPECT_THROW(periodic({2, 2, 3}, 2, 0), GeometryError);
}

TEST(Geometry, RejectsOpenTime) {
  EXPECT_THROW(build_geometry({2, 2}, {Boundary::open, Boundary::periodic}, 1, 0), GeometryError);
}

TEST(Geometry, RejectsOffCenterOpenMirror) {
  EXPECT_THROW(build_geometry({2, 4}, {Boundary::periodic, Boundary::open}, 1, 1), GeometryError);
}

TEST(Geometry, NeighborWrapsAndStopsAtOpenEdge) {
  const auto g = build_geometry({2, 3}, {Boundary::periodic, Boundary::open}, 1, 1);
  const int s = g.site({1, 2, 0, 0});
  EXPECT_EQ(*g.neighbor(s, 0, 1), g.site({0, 2, 0, 0}));
  EXPECT_FALSE(g.neighbor(s, 1, 1).has_value());
}

TEST(Reflection, SiteMapOnPeriodicExtentFour) {
  const auto g = periodic({2, 4}, 1, 0);
  auto at = [&](int z) { return g.site({0, z, 0, 0}); };
  EXPECT_EQ(g.reflect_site(at(1)), at(3));
  EXPECT_EQ(g.reflect_site(at(0)), at(0));
  EXPECT_EQ(g.reflect_site(at(2)), at(2));
}

TEST(Reflection, IsAnInvolutionOnAllElements) {
  for (const auto& g : {periodic({2, 4, 2}, 1, 1), periodic({2, 2, 2, 4}, 3, 3),
                        build_geometry({2, 5}, {Boundary::periodic, Boundary::open}, 1, 2)}) {
    for (int s = 0; s < g.num_sites(); ++s) EXPECT_EQ(g.reflect_site(g.reflect_site(s)), s);
    for (int l = 0; l < g.num_links(); ++l) {
      const auto once = g.reflect_link(l);
      const auto twice = g.reflect_link(once.index);
      EXPECT_EQ(twice.index, l);
      EXPECT_EQ(once.flipped, twice.flipped);
    }
    for (int p = 0; p < g.num_plaquettes(); ++p) EXPECT_EQ(g.reflect_plaquette(g.reflect_plaquette(p).index).index, p);
  }
}

TEST(Reflection, PerpendicularLinkKeepsOrientation) {
  const auto g = periodic({2, 2, 4}, 2, 0);
  const int l = g.link_id(g.site({0, 0, 1, 0}), 1);
  const auto r = g.reflect_link(l);
  EXPECT_FALSE(r.flipped);
  EXPECT_EQ(g.link(r.index).dir, 1);
  EXPECT_EQ(g.link(r.index).site, g.site({0, 0, 3, 0}));
}

TEST(Reflection, LinkAlongMirrorNormalIsReversed) {
  const auto g = periodic({2, 2, 4}, 2, 0);
  const int l = g.link_id(g.site({0, 0, 1, 0}), 2);  // z=1 -> z=2
  const auto r = g.reflect_link(l);
  EXPECT_TRUE(r.flipped);
  EXPECT_EQ(g.link(r.index).dir, 2);
  EXPECT_EQ(g.link(r.index).site, g.site({0, 0, 2, 0}));  // z=2 -> z=3
}

TEST(Classification, SitesAndPlaquettes) {
  const auto g = periodic({2, 2, 4}, 2, 0);
  EXPECT_EQ(g.classify_site(g.site({0, 0, 0, 0})), Region::zero);
  EXPECT_EQ(g.classify_site(g.site({0, 0, 1, 0})), Region::plus);
  EXPECT_EQ(g.classify_site(g.site({0, 0, 2, 0})), Region::zero);
  EXPECT_EQ(g.classify_site(g.site({0, 0, 3, 0})), Region::minus);
  const int timelike_in_plane = g.plaquette_id(g.site({0, 1, 0, 0}), 0, 1);
  EXPECT_EQ(g.classify_plaquette(timelike_in_plane), Region::zero);
  const int crossing = g.plaquette_id(g.site({0, 0, 0, 0}), 0, 2);
  EXPECT_EQ(g.classify_plaquette(crossing), Region::plus);
}

TEST(Classification, ReflectionSwapsPlusAndMinus) {
  const auto g = periodic({2, 2, 6}, 2, 1);
  auto swapped = [](Region r) { return r == Region::plus ? Region::minus : r == Region::minus ? Region::plus : r; };
  for (int s = 0; s < g.num_sites(); ++s) EXPECT_EQ(g.classify_site(g.reflect_site(s)), swapped(g.classify_site(s)));
  for (int l = 0; l < g.num_links(); ++l)
    EXPECT_EQ(g.classify_link(g.reflect_link(l).index), swapped(g.classify_link(l)));
  for (int p = 0; p < g.num_plaquettes(); ++p)
    EXPECT_EQ(g.classify_plaquette(g.reflect_plaquette(p).index), swapped(g.classify_plaquette(p)));
}

TEST(Classification, FixedPlanes) {
  const auto g = periodic({2, 6}, 1, 1);
  EXPECT_EQ(g.fixed_planes(), (std::vector<int>{1, 4}));
  for (int s : g.sites_in(Region::zero)) EXPECT_TRUE(z_of(g, s) == 1 || z_of(g, s) == 4);
  const auto o = build_geometry({2, 5}, {Boundary::periodic, Boundary::open}, 1, 2);
  EXPECT_EQ(o.fixed_planes(), std::vector<int>{2});
  EXPECT_EQ(o.sites_in(Region::plus).size(), o.sites_in(Region::minus).size());
}

TEST(Plaquettes, EveryLinkOfAPlaquetteKnowsIt) {
  const auto g = periodic({2, 2, 2}, 2, 0);
  for (int p = 0; p < g.num_plaquettes(); ++p) {
    const auto links = g.plaquette_links(p);
    for (int i = 0; i < 4; ++i) {
      int sign_sum = 0;
      for (const auto& [q, sign] : g.link_plaquettes(links[i])) sign_sum += q == p ? sign : 0;
      EXPECT_EQ(sign_sum, LatticeGeometry::plaquette_signs()[i]);
    }
  }
}
