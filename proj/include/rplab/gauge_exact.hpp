#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <string>
#include <vector>

#include "rplab/error.hpp"
#include "rplab/gauge.hpp"
#include "rplab/lattice.hpp"
#include "rplab/observable.hpp"
#include "rplab/parallel.hpp"
#include "rplab/scalar_exact.hpp"

namespace rplab {

/// Exact symmetry reductions applied before enumeration.
///
/// `gauge` fixes a maximal tree of links to the identity: every gauge orbit
/// meets that slice exactly once, so gauge-invariant expectations are
/// unchanged. `gauge_and_center` additionally fixes the Polyakov loop through
/// the origin, valid for observables invariant under center transformations
/// of one time slice. Both are checked against every observable.
enum class SymmetryReduction { none, gauge, gauge_and_center };

struct EnumerationOptions {
  std::uint64_t budget = kEnumerationBudget;
  SymmetryReduction reduction = SymmetryReduction::none;
  int workers = 0;  ///< 0 = hardware concurrency
};

/// Links pinned to the identity by the reduction, as a per-link flag.
inline std::vector<bool> fixed_links(const LatticeGeometry& geom, SymmetryReduction reduction) {
  std::vector<bool> fixed(geom.num_links(), false);
  if (reduction == SymmetryReduction::none) return fixed;

  // tree seeded with the time line through the origin, so the remaining
  // time link on that line carries the Polyakov loop
  std::vector<bool> reached(geom.num_sites(), false);
  std::deque<int> queue;
  const int lt = geom.extent(0);
  Coord origin{};
  int site = geom.site(origin);
  reached[site] = true;
  queue.push_back(site);
  for (int t = 0; t + 1 < lt; ++t) {
    const int l = geom.link_id(site, 0);
    fixed[l] = true;
    site = geom.link_head(l);
    reached[site] = true;
    queue.push_back(site);
  }
  const int polyakov_link = geom.link_id(site, 0);
  while (!queue.empty()) {
    const int s = queue.front();
    queue.pop_front();
    for (int l : geom.site_links(s)) {
      const int other = geom.link(l).site == s ? geom.link_head(l) : geom.link(l).site;
      if (reached[other]) continue;
      reached[other] = true;
      fixed[l] = true;
      queue.push_back(other);
    }
  }
  if (reduction == SymmetryReduction::gauge_and_center) fixed[polyakov_link] = true;
  return fixed;
}

namespace detail {

inline void check_reduction(const LatticeGeometry& geom, const ObservableSet& set, SymmetryReduction reduction,
                            int n) {
  if (reduction == SymmetryReduction::none) return;
  // a product is what gets averaged; its factors need not be invariant one by one
  for (const auto& prod : set.products()) {
    CompiledObservable o;
    for (int i : prod) o = multiply(o, set.factors()[i]);
    if (!gauge_invariant(geom, o, n))
      throw SupportError("gauge fixing requested for an observable that is not gauge invariant");
    if (reduction == SymmetryReduction::gauge_and_center && !center_invariant(geom, o, n, geom.extent(0) - 1))
      throw SupportError("center fixing requested for an observable that is not center invariant");
  }
}

}  // namespace detail

/// Exact expectations <prod factors> for every requested product, by
/// exhaustive summation over Z_N link configurations weighted with
/// exp(-S_Wilson). Enumeration is partitioned over the slowest digits and
/// reduced in a fixed order, so results are independent of the worker count.
inline std::vector<cplx> exact_gauge_expectations(const GaugeModel<ZnGroup>& model, const LatticeGeometry& geom,
                                                  const ObservableSet& set, const EnumerationOptions& opts = {}) {
  model.validate();
  const ZnGroup& group = model.group;
  const int n = group.n;
  detail::check_reduction(geom, set, opts.reduction, n);

  const std::vector<bool> fixed = fixed_links(geom, opts.reduction);
  // digit order: positive-side links slowest, negative-side links fastest
  std::vector<int> digits;
  for (Region r : {Region::plus, Region::zero, Region::minus})
    for (int l = 0; l < geom.num_links(); ++l)
      if (!fixed[l] && geom.classify_link(l) == r) digits.push_back(l);
  const int n_digits = static_cast<int>(digits.size());
  checked_config_count(n, n_digits, opts.budget, "exact_gauge_correlator");

  const auto& factors = set.factors();
  const auto& products = set.products();
  const int n_factors = static_cast<int>(factors.size());
  const int n_plaq = geom.num_plaquettes();

  std::vector<std::vector<int>> dependents(geom.num_links());
  for (int i = 0; i < n_factors; ++i)
    for (int l : factors[i].support(geom)) dependents[l].push_back(i);

  const bool z2_fast = n == 2 && geom.num_links() <= 64 && n_plaq <= 64;
  std::vector<Z2Observable> z2;
  if (z2_fast)
    for (const auto& f : factors) z2.emplace_back(f);

  // weight exp(beta * sum_P (Re U_P - 1)) from the histogram of plaquette values
  const double beta = model.inverse_coupling;
  std::vector<double> z2_weight;
  if (z2_fast)
    for (int odd = 0; odd <= n_plaq; ++odd) z2_weight.push_back(std::exp(-2.0 * beta * odd));

  int lead = 0;
  std::uint64_t chunks = 1;
  while (lead < n_digits && chunks < 256) {
    chunks *= n;
    ++lead;
  }

  std::vector<detail::ExactSums> partial(chunks);

  parallel_for(
      static_cast<int>(chunks),
      [&](int chunk) {
        std::vector<int> links(geom.num_links(), 0);
        {
          int c = chunk;
          for (int d = lead - 1; d >= 0; --d) {
            links[digits[d]] = c % n;
            c /= n;
          }
        }
        std::vector<int> plaqs(n_plaq);
        std::vector<long> hist(n, 0);
        std::uint64_t link_bits = 0, plaq_bits = 0;
        for (int p = 0; p < n_plaq; ++p) {
          plaqs[p] = plaquette_element(group, geom, links, p);
          ++hist[plaqs[p]];
          if (plaqs[p]) plaq_bits |= std::uint64_t{1} << p;
        }
        if (z2_fast)
          for (int l = 0; l < geom.num_links(); ++l)
            if (links[l]) link_bits |= std::uint64_t{1} << l;

        std::vector<cplx> values(n_factors);
        auto eval_factor = [&](int i) {
          values[i] = z2_fast ? z2[i].eval(link_bits, plaq_bits)
                              : evaluate<ZnGroup>(group, factors[i], links, plaqs);
        };
        for (int i = 0; i < n_factors; ++i) eval_factor(i);

        std::vector<int> stamp(n_factors, -1);
        std::vector<int> dirty;
        int step = 0;

        auto set_link = [&](int l, int value) {
          const int delta = value - links[l];
          links[l] = value;
          for (const auto& [p, sign] : geom.link_plaquettes(l)) {
            --hist[plaqs[p]];
            plaqs[p] = group.normalize(static_cast<long>(plaqs[p]) + static_cast<long>(sign) * delta);
            ++hist[plaqs[p]];
            if (z2_fast) plaq_bits ^= std::uint64_t{1} << p;
          }
          if (z2_fast) link_bits ^= std::uint64_t{1} << l;
          for (int i : dependents[l])
            if (stamp[i] != step) {
              stamp[i] = step;
              dirty.push_back(i);
            }
        };

        detail::ExactSums acc(products.size());
        while (true) {
          double w;
          if (z2_fast) {
            w = z2_weight[hist[1]];
          } else {
            double s = 0.0;
            for (int v = 1; v < n; ++v) s += hist[v] * (group.re(v) - 1.0);
            w = std::exp(beta * s);
          }
          acc.z += w;
          for (std::size_t k = 0; k < products.size(); ++k) {
            cplx v{w, 0.0};
            for (int i : products[k]) v *= values[i];
            acc.add(k, v);
          }

          ++step;
          dirty.clear();
          int d = n_digits - 1;
          for (; d >= lead; --d) {
            const int l = digits[d];
            if (links[l] + 1 < n) {
              set_link(l, links[l] + 1);
              break;
            }
            set_link(l, 0);
          }
          if (d < lead) break;
          for (int i : dirty) eval_factor(i);
        }
        partial[chunk] = std::move(acc);
      },
      opts.workers);

  detail::ExactSums total(products.size());
  for (const auto& p : partial) total.merge(p);
  return total.normalized();
}

/// U(1) has a continuous configuration space and cannot be enumerated.
inline std::vector<cplx> exact_gauge_expectations(const GaugeModel<U1Group>&, const LatticeGeometry&,
                                                  const ObservableSet&, const EnumerationOptions& = {}) {
  throw ModelError("exact enumeration is only available for Z_N; use Monte Carlo for U(1)");
}

/// <f g> by exhaustive enumeration.
template <class G>
cplx exact_gauge_correlator(const GaugeModel<G>& model, const LatticeGeometry& geom, const GaugeFunctional& f,
                            const GaugeFunctional& g, const EnumerationOptions& opts = {}) {
  ObservableSet set;
  const int a = set.add_factor(compile(geom, f));
  const int b = set.add_factor(compile(geom, g));
  set.add_product({a, b});
  return exact_gauge_expectations(model, geom, set, opts)[0];
}

}  // namespace rplab
