#pragma once

#include <vector>

#include "rplab/gauge_mc.hpp"
#include "rplab/lattice.hpp"
#include "rplab/parallel.hpp"
#include "rplab/rng.hpp"
#include "rplab/scalar.hpp"
#include "rplab/statistics.hpp"

namespace rplab {

namespace detail {

template <class Sweep, class Field>
std::vector<std::vector<cplx>> scalar_chain_blocks(const std::vector<ScalarFunctional>& factors,
                                                   const std::vector<std::vector<int>>& products, const McParams& p,
                                                   int chain, Field field, Sweep sweep) {
  Rng rng(derive_seed(p.seed, static_cast<std::uint64_t>(chain)));
  for (int s = 0; s < p.therm_sweeps; ++s) sweep(rng);
  const int per_block = p.measure_sweeps / p.n_blocks;
  std::vector<std::vector<cplx>> blocks(products.size(), std::vector<cplx>(p.n_blocks, cplx{0.0, 0.0}));
  std::vector<cplx> values(factors.size());
  for (int b = 0; b < p.n_blocks; ++b) {
    for (int s = 0; s < per_block; ++s) {
      sweep(rng);
      const std::vector<double>& phi = field();
      for (std::size_t i = 0; i < factors.size(); ++i) values[i] = evaluate_functional(factors[i], phi);
      for (std::size_t k = 0; k < products.size(); ++k) {
        cplx v{1.0, 0.0};
        for (int i : products[k]) v *= values[i];
        blocks[k][b] += v;
      }
    }
    for (auto& pb : blocks) pb[b] /= static_cast<double>(per_block);
  }
  return blocks;
}

}  // namespace detail

/// Monte Carlo expectations of products of scalar functionals under the
/// continuum measure exp(-S).
inline std::vector<Estimate> scalar_mc_expectations(const ScalarModel& model, const LatticeGeometry& geom,
                                                    const std::vector<ScalarFunctional>& factors,
                                                    const std::vector<std::vector<int>>& products,
                                                    const McParams& p) {
  model.validate();
  p.validate();
  std::vector<std::vector<std::vector<cplx>>> per_chain(p.chains);
  parallel_for(
      p.chains,
      [&](int c) {
        ScalarConfig phi(geom.num_sites(), 0.0);
        per_chain[c] = detail::scalar_chain_blocks(
            factors, products, p, c, [&]() -> const std::vector<double>& { return phi; },
            [&](Rng& rng) { metropolis_sweep(model, geom, phi, rng, p.proposal_width); });
      },
      p.workers);
  return detail::merge_chains(per_chain, products.size(), p);
}

/// Same, for the discretized measure used by the exact oracle, so the two can
/// be compared directly.
inline std::vector<Estimate> scalar_mc_expectations(const QuadratureMeasure& measure, const LatticeGeometry& geom,
                                                    const std::vector<ScalarFunctional>& factors,
                                                    const std::vector<std::vector<int>>& products,
                                                    const McParams& p) {
  p.validate();
  std::vector<std::vector<std::vector<cplx>>> per_chain(p.chains);
  parallel_for(
      p.chains,
      [&](int c) {
        std::vector<int> level(geom.num_sites(), 0);
        std::vector<double> phi(geom.num_sites());
        per_chain[c] = detail::scalar_chain_blocks(
            factors, products, p, c,
            [&]() -> const std::vector<double>& {
              for (int s = 0; s < geom.num_sites(); ++s) phi[s] = measure.nodes[level[s]];
              return phi;
            },
            [&](Rng& rng) { metropolis_sweep_levels(measure, geom, level, rng); });
      },
      p.workers);
  return detail::merge_chains(per_chain, products.size(), p);
}

}  // namespace rplab
