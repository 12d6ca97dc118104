#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "rplab/error.hpp"
#include "rplab/lattice.hpp"
#include "rplab/rng.hpp"

namespace rplab {

using cplx = std::complex<double>;

/// Compact U(1); elements are angles in [0, 2 pi).
struct U1Group {
  using element = double;

  static std::string name() { return "U1"; }
  element identity() const { return 0.0; }
  element normalize(double a) const {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    a = std::fmod(a, two_pi);
    return a < 0.0 ? a + two_pi : a;
  }
  /// e1 * e2^power (abelian, written additively).
  element accumulate(element e1, element e2, int power) const { return e1 + power * e2; }
  element inverse(element e) const { return normalize(-e); }
  cplx phase(element e) const { return std::polar(1.0, e); }
  double re(element e) const { return std::cos(e); }
  element random(Rng& rng) const { return rng.uniform(0.0, 2.0 * std::numbers::pi); }
  element propose(element current, Rng& rng, double width) const {
    return normalize(current + rng.uniform(-width, width));
  }
};

/// Cyclic group Z_N; element k stands for exp(2 pi i k / N).
struct ZnGroup {
  using element = int;

  explicit ZnGroup(int order) : n(order) {
    if (n < 2) throw ModelError("Z_N needs N >= 2");
    for (int k = 0; k < n; ++k) {
      phases.push_back(std::polar(1.0, 2.0 * std::numbers::pi * k / n));
      cosines.push_back(k == 0 ? 1.0 : phases.back().real());
    }
    // exact values where they are representable
    if (n % 2 == 0) {
      phases[n / 2] = {-1.0, 0.0};
      cosines[n / 2] = -1.0;
    }
    if (n % 4 == 0) {
      phases[n / 4] = {0.0, 1.0};
      phases[3 * n / 4] = {0.0, -1.0};
      cosines[n / 4] = cosines[3 * n / 4] = 0.0;
    }
  }

  std::string name() const { return "Z" + std::to_string(n); }
  element identity() const { return 0; }
  element normalize(long k) const { return static_cast<int>(((k % n) + n) % n); }
  element accumulate(element e1, element e2, int power) const {
    return normalize(static_cast<long>(e1) + static_cast<long>(power) * e2);
  }
  element inverse(element e) const { return normalize(-static_cast<long>(e)); }
  cplx phase(element e) const { return phases[e]; }
  double re(element e) const { return cosines[e]; }
  element random(Rng& rng) const { return static_cast<int>(rng.below(n)); }
  /// Uniformly random element different from `current`.
  element propose(element current, Rng& rng, double /*width*/) const {
    int k = static_cast<int>(rng.below(n - 1));
    return k >= current ? k + 1 : k;
  }

  int n;
  std::vector<cplx> phases;
  std::vector<double> cosines;
};

using GaugeGroupSpec = std::variant<U1Group, ZnGroup>;

/// Wilson action S = -inverse_coupling * sum_P Re U_P, inverse_coupling = 1/(2 g^2).
template <class G>
struct GaugeModel {
  G group;
  double inverse_coupling = 1.0;

  void validate() const {
    // zero is admitted: the strong-coupling (Haar) limit
    if (!std::isfinite(inverse_coupling) || inverse_coupling < 0.0)
      throw ModelError("inverse_coupling must be finite and non-negative");
  }
};

template <class G>
using GaugeConfig = std::vector<typename G::element>;

template <class G>
GaugeConfig<G> identity_config(const G& group, const LatticeGeometry& geom) {
  return GaugeConfig<G>(geom.num_links(), group.identity());
}

template <class G>
GaugeConfig<G> random_config(const G& group, const LatticeGeometry& geom, Rng& rng) {
  GaugeConfig<G> cfg(geom.num_links());
  for (auto& e : cfg) e = group.random(rng);
  return cfg;
}

/// Path-ordered product around a plaquette, as a group element.
template <class G>
typename G::element plaquette_element(const G& group, const LatticeGeometry& geom, const GaugeConfig<G>& cfg,
                                      int plaq) {
  const auto& links = geom.plaquette_links(plaq);
  constexpr auto signs = LatticeGeometry::plaquette_signs();
  auto e = group.identity();
  for (int k = 0; k < 4; ++k) e = group.accumulate(e, cfg[links[k]], signs[k]);
  return group.normalize(e);
}

template <class G>
cplx plaquette_value(const G& group, const LatticeGeometry& geom, const GaugeConfig<G>& cfg, int plaq) {
  return group.phase(plaquette_element(group, geom, cfg, plaq));
}

template <class G>
double wilson_action(const GaugeModel<G>& model, const LatticeGeometry& geom, const GaugeConfig<G>& cfg) {
  if (static_cast<int>(cfg.size()) != geom.num_links()) throw GeometryError("config size does not match lattice");
  double sum = 0.0;
  for (int p = 0; p < geom.num_plaquettes(); ++p) sum += model.group.re(plaquette_element(model.group, geom, cfg, p));
  return -model.inverse_coupling * sum;
}

template <class G>
double average_plaquette(const G& group, const LatticeGeometry& geom, const GaugeConfig<G>& cfg) {
  double sum = 0.0;
  for (int p = 0; p < geom.num_plaquettes(); ++p) sum += group.re(plaquette_element(group, geom, cfg, p));
  return sum / geom.num_plaquettes();
}

/// U_l -> g_x U_l g_y^-1 for the link l = <x, y>.
template <class G>
GaugeConfig<G> gauge_transform(const G& group, const LatticeGeometry& geom, const GaugeConfig<G>& cfg,
                               const std::vector<typename G::element>& g) {
  GaugeConfig<G> out(cfg.size());
  for (int l = 0; l < geom.num_links(); ++l) {
    auto e = group.accumulate(cfg[l], g[geom.link(l).site], 1);
    out[l] = group.normalize(group.accumulate(e, g[geom.link_head(l)], -1));
  }
  return out;
}

/// The configuration seen through the mirror: (Theta U)_l = U along the
/// reflected path of l, which is the inverse of the canonical link whenever
/// the reflection reverses it.
template <class G>
GaugeConfig<G> reflect_config(const G& group, const LatticeGeometry& geom, const GaugeConfig<G>& cfg) {
  GaugeConfig<G> out(cfg.size());
  for (int l = 0; l < geom.num_links(); ++l) {
    const Reflected r = geom.reflect_link(l);
    out[l] = r.flipped ? group.inverse(cfg[r.index]) : cfg[r.index];
  }
  return out;
}

template <class G>
GaugeConfig<G> conjugate_config(const G& group, const GaugeConfig<G>& cfg) {
  GaugeConfig<G> out(cfg.size());
  for (std::size_t l = 0; l < cfg.size(); ++l) out[l] = group.inverse(cfg[l]);
  return out;
}

/// Change of the Wilson action when link `l` moves from cfg[l] to `proposal`.
template <class G>
double link_action_change(const GaugeModel<G>& model, const LatticeGeometry& geom, const GaugeConfig<G>& cfg, int l,
                          typename G::element proposal) {
  const G& group = model.group;
  double delta = 0.0;
  for (const auto& [p, sign] : geom.link_plaquettes(l)) {
    const auto old_e = plaquette_element(group, geom, cfg, p);
    // remove the old link, insert the new one
    const auto new_e = group.normalize(group.accumulate(group.accumulate(old_e, cfg[l], -sign), proposal, sign));
    delta += group.re(new_e) - group.re(old_e);
  }
  return -model.inverse_coupling * delta;
}

/// Link-by-link Metropolis sweep in canonical link order. For Z_N the
/// proposal is a uniformly random different element and `proposal_width`
/// is ignored. Returns the acceptance rate.
template <class G>
double gauge_metropolis_sweep(const GaugeModel<G>& model, const LatticeGeometry& geom, GaugeConfig<G>& cfg, Rng& rng,
                              double proposal_width) {
  if constexpr (std::is_same_v<G, U1Group>) {
    if (!(proposal_width > 0.0)) throw ModelError("proposal_width must be positive");
  }
  int accepted = 0;
  for (int l = 0; l < geom.num_links(); ++l) {
    const auto proposal = model.group.propose(cfg[l], rng, proposal_width);
    const double ds = link_action_change(model, geom, cfg, l, proposal);
    if (ds <= 0.0 || rng.uniform() < std::exp(-ds)) {
      cfg[l] = proposal;
      ++accepted;
    }
  }
  return static_cast<double>(accepted) / geom.num_links();
}

// --- functionals -----------------------------------------------------------

enum class GaugeVar { link, plaquette };

/// U^power of one canonical link or plaquette.
struct GaugeFactor {
  GaugeVar kind;
  int index;
  int power;
};

struct GaugeMonomial {
  cplx coeff;
  std::vector<GaugeFactor> factors;
};

/// Complex polynomial in link and plaquette variables with integer windings.
struct GaugeFunctional {
  std::vector<GaugeMonomial> terms;

  static GaugeFunctional constant(cplx c) { return {{{c, {}}}}; }
};

inline Region classify_factor(const LatticeGeometry& geom, const GaugeFactor& f) {
  return f.kind == GaugeVar::link ? geom.classify_link(f.index) : geom.classify_plaquette(f.index);
}

inline bool supported_in(const LatticeGeometry& geom, const GaugeFunctional& f, Region r) {
  for (const auto& m : f.terms)
    for (const auto& fac : m.factors)
      if (classify_factor(geom, fac) != r) return false;
  return true;
}

template <class G>
cplx evaluate_functional(const G& group, const LatticeGeometry& geom, const GaugeFunctional& f,
                         const GaugeConfig<G>& cfg) {
  cplx total{0.0, 0.0};
  for (const auto& m : f.terms) {
    auto e = group.identity();
    for (const auto& fac : m.factors) {
      const auto v = fac.kind == GaugeVar::link ? cfg[fac.index] : plaquette_element(group, geom, cfg, fac.index);
      e = group.accumulate(e, v, fac.power);
    }
    total += m.coeff * group.phase(group.normalize(e));
  }
  return total;
}

/// Theta(f)(U) = conj(f(U along reflected paths)). Every index is reflected and
/// every coefficient conjugated; the complex conjugation of U^p gives U^-p,
/// which a reversed (flipped) image undoes, so the stored power is negated
/// exactly for the images that keep their orientation.
inline GaugeFunctional theta_gauge_functional(const LatticeGeometry& geom, const GaugeFunctional& f) {
  if (!supported_in(geom, f, Region::plus) && !supported_in(geom, f, Region::minus))
    throw SupportError("theta_gauge_functional: functional is not supported strictly on one side of the mirror");
  GaugeFunctional out;
  for (const auto& m : f.terms) {
    GaugeMonomial r{std::conj(m.coeff), {}};
    for (const auto& fac : m.factors) {
      const Reflected img = fac.kind == GaugeVar::link ? geom.reflect_link(fac.index) : geom.reflect_plaquette(fac.index);
      r.factors.push_back({fac.kind, img.index, img.flipped ? fac.power : -fac.power});
    }
    out.terms.push_back(std::move(r));
  }
  return out;
}

}  // namespace rplab
