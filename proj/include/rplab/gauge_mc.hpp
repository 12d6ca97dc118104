#pragma once

#include <cstdint>
#include <vector>

#include "rplab/error.hpp"
#include "rplab/gauge.hpp"
#include "rplab/lattice.hpp"
#include "rplab/observable.hpp"
#include "rplab/parallel.hpp"
#include "rplab/rng.hpp"
#include "rplab/statistics.hpp"

namespace rplab {

struct McParams {
  std::uint64_t seed = 0;
  int therm_sweeps = 200;
  int measure_sweeps = 10000;
  int n_blocks = 20;          ///< per chain
  double proposal_width = 1.0;
  int chains = 1;
  double overlap_threshold = 0.5;
  int workers = 0;

  void validate() const {
    if (therm_sweeps < 1) throw Error("therm_sweeps must be at least 1");
    if (n_blocks < 1 || chains * n_blocks < 2) throw Error("need at least two jackknife blocks in total");
    if (measure_sweeps < n_blocks) throw Error("measure_sweeps must be at least n_blocks");
    if (chains < 1) throw Error("chains must be positive");
    if (!(proposal_width > 0.0)) throw Error("proposal_width must be positive");
  }
};

namespace detail {

inline std::vector<Estimate> merge_chains(const std::vector<std::vector<std::vector<cplx>>>& per_chain,
                                          std::size_t n_products, const McParams& p) {
  const long n_samples = static_cast<long>(p.measure_sweeps / p.n_blocks) * p.n_blocks * p.chains;
  std::vector<Estimate> out;
  for (std::size_t k = 0; k < n_products; ++k) {
    std::vector<cplx> blocks;
    for (const auto& chain : per_chain) blocks.insert(blocks.end(), chain[k].begin(), chain[k].end());
    out.push_back(from_block_means(blocks, n_samples));
  }
  return out;
}

}  // namespace detail

/// Block means of every product in `set`, one chain. Blocks are equal-sized;
/// trailing sweeps that do not fill a block are discarded.
template <class G>
std::vector<std::vector<cplx>> gauge_chain_blocks(const GaugeModel<G>& model, const LatticeGeometry& geom,
                                                  const ObservableSet& set, const McParams& p, int chain) {
  Rng rng(derive_seed(p.seed, static_cast<std::uint64_t>(chain)));
  GaugeConfig<G> cfg = identity_config(model.group, geom);
  for (int s = 0; s < p.therm_sweeps; ++s) gauge_metropolis_sweep(model, geom, cfg, rng, p.proposal_width);

  const auto& factors = set.factors();
  const auto& products = set.products();
  const int per_block = p.measure_sweeps / p.n_blocks;
  std::vector<std::vector<cplx>> blocks(products.size(), std::vector<cplx>(p.n_blocks, cplx{0.0, 0.0}));
  std::vector<typename G::element> plaqs(geom.num_plaquettes());
  std::vector<cplx> values(factors.size());
  for (int b = 0; b < p.n_blocks; ++b) {
    for (int s = 0; s < per_block; ++s) {
      gauge_metropolis_sweep(model, geom, cfg, rng, p.proposal_width);
      for (int q = 0; q < geom.num_plaquettes(); ++q) plaqs[q] = plaquette_element(model.group, geom, cfg, q);
      for (std::size_t i = 0; i < factors.size(); ++i)
        values[i] = evaluate<G>(model.group, factors[i], cfg, plaqs);
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

/// Monte Carlo expectations of every product in `set` under the probe-free
/// Wilson measure. Chains run independently (seed derived from the chain
/// index) and are merged in chain order.
template <class G>
std::vector<Estimate> mc_expectations(const GaugeModel<G>& model, const LatticeGeometry& geom, const ObservableSet& set,
                                      const McParams& p) {
  model.validate();
  p.validate();
  std::vector<std::vector<std::vector<cplx>>> per_chain(p.chains);
  parallel_for(
      p.chains, [&](int c) { per_chain[c] = gauge_chain_blocks(model, geom, set, p, c); }, p.workers);

  return detail::merge_chains(per_chain, set.products().size(), p);
}

}  // namespace rplab
