#pragma once

#include <algorithm>
#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rplab/error.hpp"

namespace rplab {

enum class Boundary { periodic, open };

/// Side of the mirror an element lies on.
enum class Region { plus, zero, minus };

inline const char* to_string(Region r) {
  switch (r) {
    case Region::plus: return "plus";
    case Region::zero: return "zero";
    case Region::minus: return "minus";
  }
  return "?";
}

inline constexpr int kMaxDim = 4;

/// Lattice coordinates; entries beyond the lattice dimension are zero.
using Coord = std::array<int, kMaxDim>;

/// Canonical link: from `site` one step in the positive `dir` direction.
struct LinkRef {
  int site;
  int dir;
};

/// Canonical plaquette at `site` spanning (mu, nu) with mu < nu.
struct PlaquetteRef {
  int site;
  int mu;
  int nu;
};

/// Image of an oriented element under the reflection. `flipped` marks that the
/// canonical representative runs against the reflected path, so the evaluated
/// group element must be inverted.
struct Reflected {
  int index;
  bool flipped;
};

/// Hypercubic lattice with a site-plane reflection.
///
/// Direction 0 is Euclidean time and is always periodic; its extent is the
/// inverse temperature (lattice spacing 1). Sites, links and plaquettes carry
/// dense integer ids. Immutable after construction.
class LatticeGeometry {
 public:
  LatticeGeometry(std::vector<int> extents, std::vector<Boundary> boundary, int reflection_dim,
                  int reflection_plane)
      : extents_(std::move(extents)),
        boundary_(std::move(boundary)),
        rdim_(reflection_dim),
        rplane_(reflection_plane) {
    validate();
    build_tables();
  }

  int dim() const { return static_cast<int>(extents_.size()); }
  int extent(int mu) const { return extents_[mu]; }
  const std::vector<int>& extents() const { return extents_; }
  Boundary boundary(int mu) const { return boundary_[mu]; }
  const std::vector<Boundary>& boundaries() const { return boundary_; }
  int reflection_dim() const { return rdim_; }
  int reflection_plane() const { return rplane_; }
  /// Inverse temperature: the periodic time extent.
  int beta() const { return extents_[0]; }

  int num_sites() const { return num_sites_; }
  int num_links() const { return static_cast<int>(links_.size()); }
  int num_plaquettes() const { return static_cast<int>(plaquettes_.size()); }

  Coord coords(int site) const {
    Coord c{};
    for (int mu = dim() - 1; mu >= 0; --mu) {
      c[mu] = site % extents_[mu];
      site /= extents_[mu];
    }
    return c;
  }

  /// Site id for coordinates, wrapping periodic directions. Empty when an
  /// open direction is left.
  std::optional<int> try_site(Coord c) const {
    int id = 0;
    for (int mu = 0; mu < dim(); ++mu) {
      int x = c[mu];
      const int n = extents_[mu];
      if (boundary_[mu] == Boundary::periodic) {
        x = ((x % n) + n) % n;
      } else if (x < 0 || x >= n) {
        return std::nullopt;
      }
      id = id * n + x;
    }
    return id;
  }

  int site(const Coord& c) const {
    auto s = try_site(c);
    if (!s) throw GeometryError("site outside the lattice");
    return *s;
  }

  std::optional<int> neighbor(int site, int mu, int step) const {
    Coord c = coords(site);
    c[mu] += step;
    return try_site(c);
  }

  /// Link id for (site, dir), or -1 if the link leaves an open boundary.
  int link_id(int site, int dir) const { return link_of_[site * dim() + dir]; }
  const LinkRef& link(int id) const { return links_[id]; }
  /// Site at the head of a canonical link.
  int link_head(int id) const { return link_head_[id]; }

  /// Plaquette id for (site, mu, nu), mu < nu, or -1 if absent.
  int plaquette_id(int site, int mu, int nu) const {
    if (mu > nu) std::swap(mu, nu);
    return plaq_of_[(site * kMaxDim + mu) * kMaxDim + nu];
  }
  const PlaquetteRef& plaquette(int id) const { return plaquettes_[id]; }

  /// Links of a plaquette in counterclockwise path order
  /// U_mu(x) U_nu(x+mu) U_mu(x+nu)^-1 U_nu(x)^-1, with exponents {+1,+1,-1,-1}.
  const std::array<int, 4>& plaquette_links(int id) const { return plaq_links_[id]; }
  static constexpr std::array<int, 4> plaquette_signs() { return {1, 1, -1, -1}; }

  /// (plaquette id, exponent of the link inside it) for every plaquette
  /// containing the link.
  const std::vector<std::pair<int, int>>& link_plaquettes(int link) const {
    return link_plaqs_[link];
  }

  /// Links incident on a site (as either endpoint).
  const std::vector<int>& site_links(int site) const { return site_links_[site]; }

  // --- reflection -------------------------------------------------------

  /// z -> 2*plane - z along the reflection direction.
  int reflect_site(int site) const { return reflected_site_[site]; }
  Reflected reflect_link(int link) const { return reflected_link_[link]; }
  Reflected reflect_plaquette(int plaq) const { return reflected_plaq_[plaq]; }

  Region classify_site(int site) const { return region_of_doubled(2 * coords(site)[rdim_]); }
  Region classify_link(int link) const {
    const LinkRef& l = links_[link];
    return region_of_doubled(2 * coords(l.site)[rdim_] + (l.dir == rdim_ ? 1 : 0));
  }
  Region classify_plaquette(int plaq) const {
    const PlaquetteRef& p = plaquettes_[plaq];
    const bool spans = p.mu == rdim_ || p.nu == rdim_;
    return region_of_doubled(2 * coords(p.site)[rdim_] + (spans ? 1 : 0));
  }

  /// Region of a point given by its doubled coordinate along the reflection
  /// direction (element centers sit on half-integers).
  Region region_of_doubled(int c2) const {
    const int rel = c2 - 2 * rplane_;
    if (boundary_[rdim_] == Boundary::open) {
      return rel == 0 ? Region::zero : (rel > 0 ? Region::plus : Region::minus);
    }
    const int period = 2 * extents_[rdim_];
    const int r = ((rel % period) + period) % period;
    if (r == 0 || r == extents_[rdim_]) return Region::zero;
    return r < extents_[rdim_] ? Region::plus : Region::minus;
  }

  std::vector<int> sites_in(Region r) const { return collect(num_sites(), r, &LatticeGeometry::classify_site); }
  std::vector<int> links_in(Region r) const { return collect(num_links(), r, &LatticeGeometry::classify_link); }
  std::vector<int> plaquettes_in(Region r) const {
    return collect(num_plaquettes(), r, &LatticeGeometry::classify_plaquette);
  }

  /// Fixed site-planes of the reflection (one if open, two if periodic).
  std::vector<int> fixed_planes() const {
    if (boundary_[rdim_] == Boundary::open) return {rplane_};
    return {rplane_, (rplane_ + extents_[rdim_] / 2) % extents_[rdim_]};
  }

 private:
  void validate() const {
    const int d = dim();
    if (d < 2 || d > kMaxDim) throw GeometryError("lattice dimension must be between 2 and 4");
    if (static_cast<int>(boundary_.size()) != d)
      throw GeometryError("boundary flags must match the number of extents");
    for (int mu = 0; mu < d; ++mu)
      if (extents_[mu] < 2) throw GeometryError("every extent must be at least 2");
    if (boundary_[0] != Boundary::periodic) throw GeometryError("time direction (index 0) must be periodic");
    if (rdim_ < 0 || rdim_ >= d) throw GeometryError("reflection_dim out of range");
    const int n = extents_[rdim_];
    if (rplane_ < 0 || rplane_ >= n) throw GeometryError("reflection_plane out of range");
    if (boundary_[rdim_] == Boundary::periodic) {
      if (n % 2 != 0)
        throw GeometryError("periodic reflection direction needs an even extent, got " + std::to_string(n));
    } else if (2 * rplane_ != n - 1) {
      throw GeometryError("open reflection direction must be symmetric about the plane (extent " +
                          std::to_string(n) + ", plane " + std::to_string(rplane_) + ")");
    }
  }

  std::vector<int> collect(int count, Region r, Region (LatticeGeometry::*cls)(int) const) const {
    std::vector<int> out;
    for (int i = 0; i < count; ++i)
      if ((this->*cls)(i) == r) out.push_back(i);
    return out;
  }

  void build_tables() {
    const int d = dim();
    num_sites_ = 1;
    for (int e : extents_) num_sites_ *= e;

    link_of_.assign(static_cast<std::size_t>(num_sites_) * d, -1);
    for (int s = 0; s < num_sites_; ++s)
      for (int mu = 0; mu < d; ++mu)
        if (auto h = neighbor(s, mu, +1)) {
          link_of_[s * d + mu] = static_cast<int>(links_.size());
          links_.push_back({s, mu});
          link_head_.push_back(*h);
        }

    plaq_of_.assign(static_cast<std::size_t>(num_sites_) * kMaxDim * kMaxDim, -1);
    for (int s = 0; s < num_sites_; ++s)
      for (int mu = 0; mu < d; ++mu)
        for (int nu = mu + 1; nu < d; ++nu) {
          const int l0 = link_id(s, mu);
          const int l3 = link_id(s, nu);
          if (l0 < 0 || l3 < 0) continue;
          const int l1 = link_id(link_head_[l0], nu);
          const int l2 = link_id(link_head_[l3], mu);
          if (l1 < 0 || l2 < 0) continue;
          plaq_of_[(s * kMaxDim + mu) * kMaxDim + nu] = static_cast<int>(plaquettes_.size());
          plaquettes_.push_back({s, mu, nu});
          plaq_links_.push_back({l0, l1, l2, l3});
        }

    link_plaqs_.assign(links_.size(), {});
    for (int p = 0; p < num_plaquettes(); ++p)
      for (int k = 0; k < 4; ++k) link_plaqs_[plaq_links_[p][k]].push_back({p, plaquette_signs()[k]});

    site_links_.assign(num_sites_, {});
    for (int l = 0; l < num_links(); ++l) {
      site_links_[links_[l].site].push_back(l);
      site_links_[link_head_[l]].push_back(l);
    }

    reflected_site_.resize(num_sites_);
    for (int s = 0; s < num_sites_; ++s) {
      Coord c = coords(s);
      c[rdim_] = 2 * rplane_ - c[rdim_];
      auto r = try_site(c);
      if (!r) throw GeometryError("reflection leaves the lattice");
      reflected_site_[s] = *r;
    }

    reflected_link_.resize(links_.size());
    for (int l = 0; l < num_links(); ++l) {
      const LinkRef& ref = links_[l];
      if (ref.dir != rdim_) {
        reflected_link_[l] = {link_id(reflected_site_[ref.site], ref.dir), false};
      } else {
        // the reflected link runs from Theta(x) to Theta(x) - e_r
        reflected_link_[l] = {link_id(reflected_site_[link_head_[l]], ref.dir), true};
      }
      if (reflected_link_[l].index < 0) throw GeometryError("reflected link leaves the lattice");
    }

    reflected_plaq_.resize(plaquettes_.size());
    for (int p = 0; p < num_plaquettes(); ++p) {
      const PlaquetteRef& ref = plaquettes_[p];
      const bool spans = ref.mu == rdim_ || ref.nu == rdim_;
      int base = reflected_site_[ref.site];
      if (spans) {
        Coord c = coords(base);
        c[rdim_] -= 1;
        auto b = try_site(c);
        if (!b) throw GeometryError("reflected plaquette leaves the lattice");
        base = *b;
      }
      const int img = plaquette_id(base, ref.mu, ref.nu);
      if (img < 0) throw GeometryError("reflected plaquette leaves the lattice");
      reflected_plaq_[p] = {img, spans};
    }
  }

  std::vector<int> extents_;
  std::vector<Boundary> boundary_;
  int rdim_;
  int rplane_;
  int num_sites_ = 0;
  std::vector<int> link_of_;
  std::vector<LinkRef> links_;
  std::vector<int> link_head_;
  std::vector<int> plaq_of_;
  std::vector<PlaquetteRef> plaquettes_;
  std::vector<std::array<int, 4>> plaq_links_;
  std::vector<std::vector<std::pair<int, int>>> link_plaqs_;
  std::vector<std::vector<int>> site_links_;
  std::vector<int> reflected_site_;
  std::vector<Reflected> reflected_link_;
  std::vector<Reflected> reflected_plaq_;
};

inline LatticeGeometry build_geometry(std::vector<int> extents, std::vector<Boundary> boundary, int reflection_dim,
                                      int reflection_plane) {
  return LatticeGeometry(std::move(extents), std::move(boundary), reflection_dim, reflection_plane);
}

/// All-periodic convenience overload.
inline LatticeGeometry build_geometry(std::vector<int> extents, int reflection_dim, int reflection_plane) {
  std::vector<Boundary> b(extents.size(), Boundary::periodic);
  return LatticeGeometry(std::move(extents), std::move(b), reflection_dim, reflection_plane);
}

}  // namespace rplab
