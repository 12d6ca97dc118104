#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "rplab/error.hpp"
#include "rplab/lattice.hpp"
#include "rplab/rng.hpp"

namespace rplab {

using cplx = std::complex<double>;

/// Single-site potential V(phi) = c2 phi^2 + c4 phi^4.
struct ScalarModel {
  double c2 = 0.5;
  double c4 = 0.0;

  double potential(double phi) const {
    const double p2 = phi * phi;
    return c2 * p2 + c4 * p2 * p2;
  }

  void validate() const {
    if (!std::isfinite(c2) || !std::isfinite(c4)) throw ModelError("potential coefficients must be finite");
    if (c4 < 0.0) throw ModelError("c4 must be non-negative");
    if (c4 == 0.0 && c2 <= 0.0) throw ModelError("with c4 = 0 the weight exp(-V) needs c2 > 0");
  }
};

/// One real field value per site.
using ScalarConfig = std::vector<double>;

/// S = sum_links (phi_x - phi_y)^2 / 2 + sum_sites V(phi_x).
inline double scalar_action(const ScalarModel& model, const LatticeGeometry& geom, std::span<const double> phi) {
  if (static_cast<int>(phi.size()) != geom.num_sites()) throw GeometryError("config size does not match lattice");
  double kinetic = 0.0;
  for (int l = 0; l < geom.num_links(); ++l) {
    const double diff = phi[geom.link(l).site] - phi[geom.link_head(l)];
    kinetic += 0.5 * diff * diff;
  }
  double pot = 0.0;
  for (double v : phi) pot += model.potential(v);
  return kinetic + pot;
}

/// Sum of field values over the far ends of every link incident on `site`
/// (counted with multiplicity), plus the number of such links.
struct SiteEnvironment {
  double neighbor_sum = 0.0;
  int degree = 0;
};

inline SiteEnvironment site_environment(const LatticeGeometry& geom, std::span<const double> phi, int site) {
  SiteEnvironment env;
  for (int l : geom.site_links(site)) {
    const int other = geom.link(l).site == site ? geom.link_head(l) : geom.link(l).site;
    env.neighbor_sum += phi[other];
    ++env.degree;
  }
  return env;
}

/// Action change when the field at one site moves from `from` to `to`.
inline double local_action_change(const ScalarModel& model, const SiteEnvironment& env, double from, double to) {
  // sum_y [(to - y)^2 - (from - y)^2] / 2 = degree (to^2 - from^2)/2 - (to - from) sum_y
  const double kin = 0.5 * env.degree * (to * to - from * from) - (to - from) * env.neighbor_sum;
  return kin + model.potential(to) - model.potential(from);
}

/// One Metropolis hit on an isolated value with a uniform proposal of
/// half-width `width`. Returns true if accepted.
inline bool metropolis_update(const ScalarModel& model, const SiteEnvironment& env, double& value, Rng& rng,
                              double width) {
  const double proposal = value + rng.uniform(-width, width);
  const double ds = local_action_change(model, env, value, proposal);
  if (ds <= 0.0 || rng.uniform() < std::exp(-ds)) {
    value = proposal;
    return true;
  }
  return false;
}

/// Sequential single-site Metropolis sweep over the continuum measure.
/// Returns the acceptance rate.
inline double metropolis_sweep(const ScalarModel& model, const LatticeGeometry& geom, ScalarConfig& phi, Rng& rng,
                               double proposal_width) {
  if (!(proposal_width > 0.0)) throw ModelError("proposal_width must be positive");
  int accepted = 0;
  for (int s = 0; s < geom.num_sites(); ++s) {
    const SiteEnvironment env = site_environment(geom, phi, s);
    accepted += metropolis_update(model, env, phi[s], rng, proposal_width) ? 1 : 0;
  }
  return static_cast<double>(accepted) / geom.num_sites();
}

/// Discretized single-site measure: field restricted to `nodes` with positive
/// weights. The weights replace exp(-V); only the hopping term remains.
struct QuadratureMeasure {
  std::vector<double> nodes;
  std::vector<double> weights;

  int levels() const { return static_cast<int>(nodes.size()); }
};

/// Metropolis sweep for the discretized measure: each site proposes a
/// uniformly random different level. Configs hold level indices.
inline double metropolis_sweep_levels(const QuadratureMeasure& measure, const LatticeGeometry& geom,
                                      std::vector<int>& level, Rng& rng) {
  const int n = measure.levels();
  if (n < 2) throw ModelError("need at least two quadrature levels");
  int accepted = 0;
  for (int s = 0; s < geom.num_sites(); ++s) {
    int proposal = static_cast<int>(rng.below(n - 1));
    if (proposal >= level[s]) ++proposal;
    const double from = measure.nodes[level[s]];
    const double to = measure.nodes[proposal];
    double nsum = 0.0;
    int degree = 0;
    for (int l : geom.site_links(s)) {
      const int other = geom.link(l).site == s ? geom.link_head(l) : geom.link(l).site;
      nsum += measure.nodes[level[other]];
      ++degree;
    }
    const double dkin = 0.5 * degree * (to * to - from * from) - (to - from) * nsum;
    const double ratio = measure.weights[proposal] / measure.weights[level[s]] * std::exp(-dkin);
    if (ratio >= 1.0 || rng.uniform() < ratio) {
      level[s] = proposal;
      ++accepted;
    }
  }
  return static_cast<double>(accepted) / geom.num_sites();
}

// --- functionals -----------------------------------------------------------

struct SitePower {
  int site;
  int power;
};

struct ScalarMonomial {
  cplx coeff;
  std::vector<SitePower> factors;
};

/// Complex-coefficient polynomial in site variables.
struct ScalarFunctional {
  std::vector<ScalarMonomial> terms;

  static ScalarFunctional constant(cplx c) { return {{{c, {}}}}; }
};

inline cplx evaluate_functional(const ScalarFunctional& f, std::span<const double> phi) {
  cplx total{0.0, 0.0};
  for (const auto& m : f.terms) {
    double prod = 1.0;
    for (const auto& fp : m.factors) prod *= std::pow(phi[fp.site], fp.power);
    total += m.coeff * prod;
  }
  return total;
}

inline bool supported_in(const LatticeGeometry& geom, const ScalarFunctional& f, Region r) {
  for (const auto& m : f.terms)
    for (const auto& fp : m.factors)
      if (geom.classify_site(fp.site) != r) return false;
  return true;
}

/// Theta(f)(phi) = f*(phi_Theta): sites reflected, coefficients conjugated.
/// f must live strictly on one side of the mirror (normally the positive one;
/// the negative side is accepted so that Theta can be applied twice).
inline ScalarFunctional theta_functional(const LatticeGeometry& geom, const ScalarFunctional& f) {
  if (!supported_in(geom, f, Region::plus) && !supported_in(geom, f, Region::minus))
    throw SupportError("theta_functional: functional is not supported strictly on one side of the mirror");
  ScalarFunctional out;
  out.terms.reserve(f.terms.size());
  for (const auto& m : f.terms) {
    ScalarMonomial r{std::conj(m.coeff), {}};
    for (const auto& fp : m.factors) r.factors.push_back({geom.reflect_site(fp.site), fp.power});
    out.terms.push_back(std::move(r));
  }
  return out;
}

}  // namespace rplab
