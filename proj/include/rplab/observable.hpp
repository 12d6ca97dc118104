#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "rplab/error.hpp"
#include "rplab/gauge.hpp"
#include "rplab/lattice.hpp"

namespace rplab {

/// One character: coeff * prod_l U_l^{exponent_l}.
struct CompiledTerm {
  cplx coeff{1.0, 0.0};
  std::vector<std::pair<int, int>> links;  // (link id, exponent), sorted by link id
};

/// Gauge observable in product form ready for fast evaluation:
///   (sum_terms coeff * U^a) * prod_{P in indicator} [U_P = 1] * exp(sum alpha_P Re U_P).
/// Polynomial functionals, charges, conductors and dielectrics all lower to it.
struct CompiledObservable {
  std::vector<CompiledTerm> terms{CompiledTerm{}};
  std::vector<int> indicator_plaquettes;
  std::vector<std::pair<int, double>> dielectric;  // (plaquette id, alpha)

  /// Links the value depends on (sorted, unique).
  std::vector<int> support(const LatticeGeometry& geom) const {
    std::vector<int> s;
    for (const auto& t : terms)
      for (const auto& [l, a] : t.links) s.push_back(l);
    for (int p : indicator_plaquettes)
      for (int l : geom.plaquette_links(p)) s.push_back(l);
    for (const auto& [p, alpha] : dielectric)
      for (int l : geom.plaquette_links(p)) s.push_back(l);
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    return s;
  }
};

namespace detail {

inline std::vector<std::pair<int, int>> merge_exponents(const std::vector<std::pair<int, int>>& a,
                                                        const std::vector<std::pair<int, int>>& b) {
  std::map<int, int> m;
  for (const auto& [l, e] : a) m[l] += e;
  for (const auto& [l, e] : b) m[l] += e;
  std::vector<std::pair<int, int>> out;
  for (const auto& [l, e] : m)
    if (e != 0) out.emplace_back(l, e);
  return out;
}

}  // namespace detail

inline CompiledObservable multiply(const CompiledObservable& a, const CompiledObservable& b) {
  CompiledObservable out;
  out.terms.clear();
  for (const auto& ta : a.terms)
    for (const auto& tb : b.terms) out.terms.push_back({ta.coeff * tb.coeff, detail::merge_exponents(ta.links, tb.links)});
  out.indicator_plaquettes = a.indicator_plaquettes;
  out.indicator_plaquettes.insert(out.indicator_plaquettes.end(), b.indicator_plaquettes.begin(),
                                  b.indicator_plaquettes.end());
  std::sort(out.indicator_plaquettes.begin(), out.indicator_plaquettes.end());
  out.indicator_plaquettes.erase(std::unique(out.indicator_plaquettes.begin(), out.indicator_plaquettes.end()),
                                 out.indicator_plaquettes.end());
  out.dielectric = a.dielectric;
  out.dielectric.insert(out.dielectric.end(), b.dielectric.begin(), b.dielectric.end());
  return out;
}

/// Expands plaquette factors into their four links.
inline CompiledObservable compile(const LatticeGeometry& geom, const GaugeFunctional& f) {
  CompiledObservable out;
  out.terms.clear();
  constexpr auto signs = LatticeGeometry::plaquette_signs();
  for (const auto& m : f.terms) {
    std::vector<std::pair<int, int>> links;
    for (const auto& fac : m.factors) {
      if (fac.kind == GaugeVar::link) {
        if (fac.index < 0 || fac.index >= geom.num_links()) throw GeometryError("functional references an unknown link");
        links.emplace_back(fac.index, fac.power);
      } else {
        if (fac.index < 0 || fac.index >= geom.num_plaquettes())
          throw GeometryError("functional references an unknown plaquette");
        const auto& pl = geom.plaquette_links(fac.index);
        for (int k = 0; k < 4; ++k) links.emplace_back(pl[k], signs[k] * fac.power);
      }
    }
    out.terms.push_back({m.coeff, detail::merge_exponents(links, {})});
  }
  if (out.terms.empty()) out.terms.push_back({cplx{0.0, 0.0}, {}});
  return out;
}

/// Whether every term has zero lattice divergence (mod N; N = 0 for U(1)),
/// i.e. the observable is invariant under local gauge transformations.
inline bool gauge_invariant(const LatticeGeometry& geom, const CompiledObservable& o, int n) {
  for (const auto& t : o.terms) {
    std::vector<long> div(geom.num_sites(), 0);
    for (const auto& [l, a] : t.links) {
      div[geom.link(l).site] += a;
      div[geom.link_head(l)] -= a;
    }
    for (long d : div)
      if (n == 0 ? d != 0 : d % n != 0) return false;
  }
  return true;
}

/// Whether the observable is unchanged when every time link leaving time
/// slice `slice` is multiplied by a center element.
inline bool center_invariant(const LatticeGeometry& geom, const CompiledObservable& o, int n, int slice) {
  for (const auto& t : o.terms) {
    long winding = 0;
    for (const auto& [l, a] : t.links)
      if (geom.link(l).dir == 0 && geom.coords(geom.link(l).site)[0] == slice) winding += a;
    if (n == 0 ? winding != 0 : winding % n != 0) return false;
  }
  return true;
}

/// Generic evaluation from link and plaquette elements.
template <class G>
cplx evaluate(const G& group, const CompiledObservable& o, std::span<const typename G::element> links,
              std::span<const typename G::element> plaqs) {
  for (int p : o.indicator_plaquettes)
    if (plaqs[p] != group.identity()) return {0.0, 0.0};
  cplx poly{0.0, 0.0};
  for (const auto& t : o.terms) {
    auto e = group.identity();
    for (const auto& [l, a] : t.links) e = group.accumulate(e, links[l], a);
    poly += t.coeff * group.phase(group.normalize(e));
  }
  if (o.dielectric.empty()) return poly;
  double s = 0.0;
  for (const auto& [p, alpha] : o.dielectric) s += alpha * group.re(plaqs[p]);
  return poly * std::exp(s);
}

/// Bitmask form for Z_2 with at most 64 links and 64 plaquettes.
struct Z2Observable {
  struct Term {
    cplx coeff;
    std::uint64_t mask;
  };
  std::vector<Term> terms;
  std::uint64_t indicator = 0;
  std::vector<std::pair<int, double>> dielectric;
  double dielectric_total = 0.0;

  explicit Z2Observable(const CompiledObservable& o) {
    for (const auto& t : o.terms) {
      std::uint64_t m = 0;
      for (const auto& [l, a] : t.links)
        if (a % 2 != 0) m |= std::uint64_t{1} << l;
      terms.push_back({t.coeff, m});
    }
    for (int p : o.indicator_plaquettes) indicator |= std::uint64_t{1} << p;
    dielectric = o.dielectric;
    for (const auto& [p, alpha] : dielectric) dielectric_total += alpha;
  }

  cplx eval(std::uint64_t link_bits, std::uint64_t plaq_bits) const {
    if (plaq_bits & indicator) return {0.0, 0.0};
    cplx poly{0.0, 0.0};
    for (const auto& t : terms) poly += (std::popcount(t.mask & link_bits) & 1) ? -t.coeff : t.coeff;
    if (dielectric.empty()) return poly;
    double s = dielectric_total;
    for (const auto& [p, alpha] : dielectric)
      if ((plaq_bits >> p) & 1) s -= 2.0 * alpha;
    return poly * std::exp(s);
  }
};

/// Factors evaluated once per configuration plus the products requested.
class ObservableSet {
 public:
  int add_factor(CompiledObservable o) {
    factors_.push_back(std::move(o));
    return static_cast<int>(factors_.size()) - 1;
  }
  int add_product(std::vector<int> factor_ids) {
    for (int i : factor_ids)
      if (i < 0 || i >= static_cast<int>(factors_.size())) throw Error("product references an unknown factor");
    products_.push_back(std::move(factor_ids));
    return static_cast<int>(products_.size()) - 1;
  }
  const std::vector<CompiledObservable>& factors() const { return factors_; }
  const std::vector<std::vector<int>>& products() const { return products_; }

 private:
  std::vector<CompiledObservable> factors_;
  std::vector<std::vector<int>> products_;
};

}  // namespace rplab
