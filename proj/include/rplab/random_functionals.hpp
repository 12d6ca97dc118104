#pragma once

#include <vector>

#include "rplab/error.hpp"
#include "rplab/gauge.hpp"
#include "rplab/lattice.hpp"
#include "rplab/rng.hpp"
#include "rplab/scalar.hpp"

namespace rplab {

/// Shape of the random polynomials used by property checks.
struct RandomPolynomialParams {
  int max_terms = 4;
  int max_factors = 3;
  int max_power = 2;
};

inline cplx random_coefficient(Rng& rng) { return {rng.normal(), rng.normal()}; }

/// Random complex polynomial in the fields of sites in region `r`. The
/// constant term is included with probability one half.
inline ScalarFunctional random_scalar_functional(const LatticeGeometry& geom, Region r, Rng& rng,
                                                 const RandomPolynomialParams& p = {}) {
  const std::vector<int> sites = geom.sites_in(r);
  if (sites.empty()) throw SupportError("region has no sites");
  ScalarFunctional f;
  const int n_terms = 1 + static_cast<int>(rng.below(p.max_terms));
  for (int t = 0; t < n_terms; ++t) {
    ScalarMonomial m{random_coefficient(rng), {}};
    const int n_fac = 1 + static_cast<int>(rng.below(p.max_factors));
    for (int k = 0; k < n_fac; ++k)
      m.factors.push_back({sites[rng.below(sites.size())], 1 + static_cast<int>(rng.below(p.max_power))});
    f.terms.push_back(std::move(m));
  }
  if (rng.below(2) == 0) f.terms.push_back({random_coefficient(rng), {}});
  return f;
}

/// Random complex polynomial in link and plaquette variables of region `r`,
/// with nonzero integer windings in [-max_power, max_power].
inline GaugeFunctional random_gauge_functional(const LatticeGeometry& geom, Region r, Rng& rng,
                                               const RandomPolynomialParams& p = {}) {
  const std::vector<int> links = geom.links_in(r);
  const std::vector<int> plaqs = geom.plaquettes_in(r);
  if (links.empty()) throw SupportError("region has no links");
  GaugeFunctional f;
  const int n_terms = 1 + static_cast<int>(rng.below(p.max_terms));
  for (int t = 0; t < n_terms; ++t) {
    GaugeMonomial m{random_coefficient(rng), {}};
    const int n_fac = 1 + static_cast<int>(rng.below(p.max_factors));
    for (int k = 0; k < n_fac; ++k) {
      int power = 1 + static_cast<int>(rng.below(p.max_power));
      if (rng.below(2) == 0) power = -power;
      if (!plaqs.empty() && rng.below(2) == 0)
        m.factors.push_back({GaugeVar::plaquette, plaqs[rng.below(plaqs.size())], power});
      else
        m.factors.push_back({GaugeVar::link, links[rng.below(links.size())], power});
    }
    f.terms.push_back(std::move(m));
  }
  if (rng.below(2) == 0) f.terms.push_back({random_coefficient(rng), {}});
  return f;
}

}  // namespace rplab
