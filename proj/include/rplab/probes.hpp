#pragma once

#include <algorithm>
#include <array>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "rplab/error.hpp"
#include "rplab/gauge.hpp"
#include "rplab/lattice.hpp"
#include "rplab/observable.hpp"

namespace rplab {

/// Static charge q: the Polyakov line through `site` (time coordinate 0)
/// raised to the power q.
struct PointCharge {
  int q = 1;
  int site = 0;
};

/// exp(alpha * sum_P Re U_P) over timelike plaquettes; alpha = (1 - eps)/(2 g^2).
struct Dielectric {
  double alpha = 0.0;
  std::vector<int> plaquettes;
};

/// Indicator that every worldvolume plaquette is the identity (Z_N only).
struct Conductor {
  std::vector<int> plaquettes;
};

using Probe = std::variant<PointCharge, Dielectric, Conductor>;

inline bool is_neutral(const Probe& p) { return !std::holds_alternative<PointCharge>(p); }

// --- shapes and rotations ----------------------------------------------------

/// Spatial element of a body relative to its anchor: a link (nu < 0) or a
/// spatial plaquette. A placed body occupies the worldvolume swept by its
/// elements over all of Euclidean time: timelike plaquettes along each link,
/// and each spatial plaquette on every time slice.
struct ShapeElement {
  Coord offset{};
  int mu = 1;
  int nu = -1;
};

struct Shape {
  std::vector<ShapeElement> elements;
  /// Rotation center in doubled coordinates (so plaquette centers are exact).
  Coord pivot2{};
};

enum class ProbeKind { charge, dielectric, conductor };

/// A probe before placement.
struct ProbeSpec {
  ProbeKind kind = ProbeKind::charge;
  int charge = 1;
  double alpha = 0.0;
  Shape shape;
};

/// Signed permutation of axes: e_mu -> sign[mu] * e_axis[mu]. Time is fixed.
struct Rotation {
  std::array<int, kMaxDim> axis{0, 1, 2, 3};
  std::array<int, kMaxDim> sign{1, 1, 1, 1};
  std::string name = "id";

  Coord apply(const Coord& v) const {
    Coord out{};
    for (int mu = 0; mu < kMaxDim; ++mu) out[axis[mu]] += sign[mu] * v[mu];
    return out;
  }
};

/// Proper rotations of the spatial axes 1..d-1 (24 in d = 4, 4 in d = 3,
/// the identity alone in d = 2).
inline std::vector<Rotation> spatial_rotations(int d) {
  std::vector<int> perm;
  for (int mu = 1; mu < d; ++mu) perm.push_back(mu);
  const int k = static_cast<int>(perm.size());
  std::vector<Rotation> out;
  do {
    for (int mask = 0; mask < (1 << k); ++mask) {
      Rotation r;
      int parity = 0;
      for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j)
          if (perm[i] > perm[j]) ++parity;
      int negs = 0;
      std::string name;
      for (int i = 0; i < k; ++i) {
        r.axis[i + 1] = perm[i];
        r.sign[i + 1] = (mask >> i) & 1 ? -1 : 1;
        negs += (mask >> i) & 1;
        name += (r.sign[i + 1] < 0 ? "-" : "+") + std::to_string(perm[i]);
      }
      if ((parity + negs) % 2 != 0) continue;
      r.name = name;
      out.push_back(r);
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

/// The four quarter turns in the (a, b) plane, a -> b first.
inline std::vector<Rotation> plane_rotations(int a, int b) {
  std::vector<Rotation> out;
  for (int k = 0; k < 4; ++k) {
    Rotation r;
    r.name = "rot" + std::to_string(90 * k);
    // k quarter turns: e_a -> cos e_a + sin e_b, e_b -> -sin e_a + cos e_b
    static constexpr int c[4] = {1, 0, -1, 0};
    static constexpr int s[4] = {0, 1, 0, -1};
    if (c[k] != 0) {
      r.axis[a] = a, r.sign[a] = c[k];
      r.axis[b] = b, r.sign[b] = c[k];
    } else {
      r.axis[a] = b, r.sign[a] = s[k];
      r.axis[b] = a, r.sign[b] = -s[k];
    }
    out.push_back(r);
  }
  return out;
}

/// Every spatial link with both ends in the box [lo, hi] (inclusive, relative
/// coordinates), optionally with the spatial plaquettes inside it.
inline Shape box_shape(int d, const Coord& lo, const Coord& hi, bool with_plaquettes = false) {
  Shape s;
  Coord c = lo;
  c[0] = 0;
  Coord center{};
  for (int mu = 1; mu < d; ++mu) center[mu] = lo[mu] + hi[mu];
  s.pivot2 = center;
  while (true) {
    for (int mu = 1; mu < d; ++mu) {
      if (c[mu] + 1 <= hi[mu]) s.elements.push_back({c, mu, -1});
      if (!with_plaquettes) continue;
      for (int nu = mu + 1; nu < d; ++nu)
        if (c[mu] + 1 <= hi[mu] && c[nu] + 1 <= hi[nu]) s.elements.push_back({c, mu, nu});
    }
    int mu = d - 1;
    for (; mu >= 1; --mu) {
      if (++c[mu] <= hi[mu]) break;
      c[mu] = lo[mu];
    }
    if (mu < 1) break;
  }
  return s;
}

/// Slab `thickness` site layers thick along `normal_dim` and spanning every
/// other spatial direction, including the closing link of periodic ones.
inline Shape slab_shape(const LatticeGeometry& geom, int normal_dim, int thickness) {
  if (normal_dim < 1 || normal_dim >= geom.dim()) throw GeometryError("slab normal must be a spatial direction");
  if (thickness < 1) throw GeometryError("slab thickness must be at least 1");
  Shape s;
  Coord c{};
  while (true) {
    for (int mu = 1; mu < geom.dim(); ++mu) {
      const bool full = mu != normal_dim;
      const bool has_next = full ? (geom.boundary(mu) == Boundary::periodic || c[mu] + 1 < geom.extent(mu))
                                 : c[mu] + 1 < thickness;
      if (has_next) s.elements.push_back({c, mu, -1});
    }
    int mu = geom.dim() - 1;
    for (; mu >= 1; --mu) {
      const int lim = mu == normal_dim ? thickness : geom.extent(mu);
      if (++c[mu] < lim) break;
      c[mu] = 0;
    }
    if (mu < 1) break;
  }
  s.pivot2[normal_dim] = thickness - 1;
  return s;
}

// --- placement ---------------------------------------------------------------

namespace detail {

inline Coord unit(int mu) {
  Coord e{};
  if (mu >= 0) e[mu] = 1;
  return e;
}

/// Elements of the shape after rotation about its pivot (anchor at origin).
inline std::vector<ShapeElement> rotated_elements(const Shape& shape, const Rotation& rot) {
  std::vector<ShapeElement> out;
  for (const auto& el : shape.elements) {
    Coord c2{};
    const Coord emu = unit(el.mu), enu = unit(el.nu);
    for (int k = 0; k < kMaxDim; ++k) c2[k] = 2 * el.offset[k] + emu[k] + enu[k] - shape.pivot2[k];
    Coord r2 = rot.apply(c2);
    ShapeElement img;
    img.mu = rot.axis[el.mu];
    img.nu = el.nu < 0 ? -1 : rot.axis[el.nu];
    if (img.nu >= 0 && img.nu < img.mu) std::swap(img.mu, img.nu);
    const Coord fmu = unit(img.mu), fnu = unit(img.nu);
    for (int k = 0; k < kMaxDim; ++k) {
      const int b2 = r2[k] + shape.pivot2[k] - fmu[k] - fnu[k];
      if (b2 % 2 != 0) throw GeometryError("rotation pivot does not map the shape onto the lattice");
      img.offset[k] = b2 / 2;
    }
    out.push_back(img);
  }
  return out;
}

}  // namespace detail

/// Sum of doubled element centers along `dim` and the element count, for the
/// rotated shape anchored at the origin. The centroid is sum / (2 count).
inline std::pair<long, long> doubled_centroid(const ProbeSpec& spec, const Rotation& rot, int dim) {
  if (spec.kind == ProbeKind::charge) return {0, 1};
  long sum = 0;
  const auto els = detail::rotated_elements(spec.shape, rot);
  for (const auto& el : els) sum += 2 * el.offset[dim] + (el.mu == dim ? 1 : 0) + (el.nu == dim ? 1 : 0);
  return {sum, static_cast<long>(els.size())};
}

inline Probe place(const LatticeGeometry& geom, const ProbeSpec& spec, const Coord& anchor,
                   const Rotation& rot = Rotation{}) {
  Coord base = anchor;
  base[0] = 0;
  if (spec.kind == ProbeKind::charge) {
    auto s = geom.try_site(base);
    if (!s) throw GeometryError("point charge placed outside the lattice");
    return PointCharge{spec.charge, *s};
  }
  const auto els = detail::rotated_elements(spec.shape, rot);
  if (els.empty()) throw GeometryError("probe shape has no elements");
  std::vector<int> plaqs;
  for (const auto& el : els) {
    if (el.mu < 1 || el.mu >= geom.dim() || el.nu >= geom.dim())
      throw GeometryError("probe shape uses a direction the lattice does not have");
    Coord c{};
    for (int k = 0; k < kMaxDim; ++k) c[k] = base[k] + el.offset[k];
    for (int t = 0; t < geom.extent(0); ++t) {
      c[0] = t;
      auto s = geom.try_site(c);
      const int p = s ? (el.nu < 0 ? geom.plaquette_id(*s, 0, el.mu) : geom.plaquette_id(*s, el.mu, el.nu)) : -1;
      if (p < 0) throw GeometryError("probe worldvolume leaves the lattice");
      plaqs.push_back(p);
    }
  }
  std::sort(plaqs.begin(), plaqs.end());
  plaqs.erase(std::unique(plaqs.begin(), plaqs.end()), plaqs.end());
  if (spec.kind == ProbeKind::dielectric) return Dielectric{spec.alpha, std::move(plaqs)};
  return Conductor{std::move(plaqs)};
}

/// Anchor coordinate along the reflection direction that puts the probe's
/// centroid at distance z/2 from the mirror plane, so that the probe and its
/// image are z apart.
inline int anchor_for_separation(const LatticeGeometry& geom, const ProbeSpec& spec, const Rotation& rot, int z) {
  const int r = geom.reflection_dim();
  const auto [sum, count] = doubled_centroid(spec, rot, r);
  const long num = (2L * geom.reflection_plane() + z) * count - sum;
  if (num % (2 * count) != 0)
    throw GeometryError("separation " + std::to_string(z) + " puts the probe centroid off the lattice grid");
  return static_cast<int>(num / (2 * count));
}

// --- regions, mirror, weights ------------------------------------------------

inline std::vector<int> worldline_links(const LatticeGeometry& geom, int site) {
  std::vector<int> links;
  Coord c = geom.coords(site);
  for (int t = 0; t < geom.extent(0); ++t) {
    c[0] = t;
    links.push_back(geom.link_id(geom.site(c), 0));
  }
  return links;
}

/// Plus or Minus when the whole worldvolume lies strictly on one side,
/// otherwise Zero.
inline Region probe_region(const LatticeGeometry& geom, const Probe& probe) {
  if (const auto* pc = std::get_if<PointCharge>(&probe)) return geom.classify_site(pc->site);
  const auto& plaqs = std::holds_alternative<Dielectric>(probe) ? std::get<Dielectric>(probe).plaquettes
                                                                : std::get<Conductor>(probe).plaquettes;
  if (plaqs.empty()) return Region::zero;
  const Region first = geom.classify_plaquette(plaqs.front());
  for (int p : plaqs)
    if (geom.classify_plaquette(p) != first) return Region::zero;
  return first;
}

/// The conjugate image across the mirror: geometry reflected, charge negated.
inline Probe mirror_probe(const LatticeGeometry& geom, const Probe& probe) {
  if (probe_region(geom, probe) == Region::zero)
    throw SupportError("mirror_probe: probe touches the mirror plane or straddles it");
  auto reflect_all = [&](const std::vector<int>& plaqs) {
    std::vector<int> out;
    for (int p : plaqs) out.push_back(geom.reflect_plaquette(p).index);
    std::sort(out.begin(), out.end());
    return out;
  };
  if (const auto* pc = std::get_if<PointCharge>(&probe)) return PointCharge{-pc->q, geom.reflect_site(pc->site)};
  if (const auto* d = std::get_if<Dielectric>(&probe)) return Dielectric{d->alpha, reflect_all(d->plaquettes)};
  return Conductor{reflect_all(std::get<Conductor>(probe).plaquettes)};
}

/// Probe translated by `step` along spatial direction `mu`.
inline Probe shift_probe(const LatticeGeometry& geom, const Probe& probe, int mu, int step) {
  auto move_site = [&](int s) {
    auto n = geom.neighbor(s, mu, step);
    if (!n) throw GeometryError("shifted probe leaves the lattice");
    return *n;
  };
  auto move_all = [&](const std::vector<int>& plaqs) {
    std::vector<int> out;
    for (int p : plaqs) {
      const PlaquetteRef& ref = geom.plaquette(p);
      const int q = geom.plaquette_id(move_site(ref.site), ref.mu, ref.nu);
      if (q < 0) throw GeometryError("shifted probe leaves the lattice");
      out.push_back(q);
    }
    std::sort(out.begin(), out.end());
    return out;
  };
  if (const auto* pc = std::get_if<PointCharge>(&probe)) return PointCharge{pc->q, move_site(pc->site)};
  if (const auto* d = std::get_if<Dielectric>(&probe)) return Dielectric{d->alpha, move_all(d->plaquettes)};
  return Conductor{move_all(std::get<Conductor>(probe).plaquettes)};
}

inline CompiledObservable compile(const LatticeGeometry& geom, const Probe& probe) {
  CompiledObservable o;
  if (const auto* pc = std::get_if<PointCharge>(&probe)) {
    if (pc->site < 0 || pc->site >= geom.num_sites()) throw GeometryError("point charge outside the lattice");
    auto links = worldline_links(geom, pc->site);
    std::sort(links.begin(), links.end());
    o.terms.front().links.clear();
    if (pc->q != 0)
      for (int l : links) o.terms.front().links.emplace_back(l, pc->q);
  } else if (const auto* d = std::get_if<Dielectric>(&probe)) {
    for (int p : d->plaquettes) {
      if (p < 0 || p >= geom.num_plaquettes()) throw GeometryError("dielectric plaquette outside the lattice");
      o.dielectric.emplace_back(p, d->alpha);
    }
  } else {
    for (int p : std::get<Conductor>(probe).plaquettes) {
      if (p < 0 || p >= geom.num_plaquettes()) throw GeometryError("conductor plaquette outside the lattice");
      o.indicator_plaquettes.push_back(p);
    }
  }
  return o;
}

/// Links the probe functional depends on.
inline std::vector<int> probe_support(const LatticeGeometry& geom, const Probe& probe) {
  return compile(geom, probe).support(geom);
}

/// Continuous groups cannot carry an exact conductor; callers substitute a
/// dielectric with large alpha.
template <class G>
void require_supported(const G&, const Probe& probe) {
  if constexpr (std::is_same_v<G, U1Group>) {
    if (std::holds_alternative<Conductor>(probe))
      throw ModelError("a conductor is an indicator on a discrete group; for U(1) use a dielectric with large alpha");
  }
}

/// Conductor realized as a strongly coupled dielectric.
inline Probe conductor_as_dielectric(const Probe& probe, double alpha) {
  if (const auto* c = std::get_if<Conductor>(&probe)) return Dielectric{alpha, c->plaquettes};
  return probe;
}

template <class G>
cplx probe_weight(const G& group, const LatticeGeometry& geom, const GaugeConfig<G>& cfg, const Probe& probe) {
  require_supported(group, probe);
  if (static_cast<int>(cfg.size()) != geom.num_links()) throw GeometryError("config size does not match lattice");
  std::vector<typename G::element> plaqs(geom.num_plaquettes());
  for (int p = 0; p < geom.num_plaquettes(); ++p) plaqs[p] = plaquette_element(group, geom, cfg, p);
  return evaluate<G>(group, compile(geom, probe), cfg, plaqs);
}

}  // namespace rplab
