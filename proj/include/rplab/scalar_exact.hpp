#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "rplab/error.hpp"
#include "rplab/lattice.hpp"
#include "rplab/parallel.hpp"
#include "rplab/quadrature.hpp"
#include "rplab/scalar.hpp"

namespace rplab {

/// Default cap on the number of configurations an exact sum may visit.
inline constexpr std::uint64_t kEnumerationBudget = std::uint64_t{1} << 26;

/// levels^count, or an error if it exceeds `budget`.
inline std::uint64_t checked_config_count(std::uint64_t levels, int count, std::uint64_t budget,
                                          const char* what) {
  std::uint64_t total = 1;
  for (int i = 0; i < count; ++i) {
    if (total > budget / levels) {
      throw BudgetError(std::string(what) + ": " + std::to_string(levels) + "^" + std::to_string(count) +
                        " configurations exceed the enumeration budget of " + std::to_string(budget));
    }
    total *= levels;
  }
  return total;
}

namespace detail {

/// Running sums of an exact enumeration, kept in extended precision: the
/// terms cancel heavily and a plain double sum over millions of them loses
/// the last few digits.
struct ExactSums {
  long double z = 0.0;
  std::vector<long double> re, im;

  explicit ExactSums(std::size_t n = 0) : re(n, 0.0), im(n, 0.0) {}

  void add(std::size_t k, cplx v) {
    re[k] += v.real();
    im[k] += v.imag();
  }

  void merge(const ExactSums& o) {
    z += o.z;
    for (std::size_t k = 0; k < re.size(); ++k) {
      re[k] += o.re[k];
      im[k] += o.im[k];
    }
  }

  std::vector<cplx> normalized() const {
    std::vector<cplx> out;
    for (std::size_t k = 0; k < re.size(); ++k)
      out.emplace_back(static_cast<double>(re[k] / z), static_cast<double>(im[k] / z));
    return out;
  }
};

/// Functional compiled against the level grid: powers are looked up.
struct CompiledScalarFunctional {
  struct Term {
    cplx coeff;
    std::vector<SitePower> factors;
  };
  std::vector<Term> terms;

  cplx eval(const std::vector<int>& level, const std::vector<std::vector<double>>& powers) const {
    cplx total{0.0, 0.0};
    for (const auto& t : terms) {
      double prod = 1.0;
      for (const auto& fp : t.factors) prod *= powers[level[fp.site]][fp.power];
      total += t.coeff * prod;
    }
    return total;
  }
};

inline std::vector<std::vector<double>> power_table(const QuadratureMeasure& q, int max_power) {
  std::vector<std::vector<double>> table(q.levels(), std::vector<double>(max_power + 1, 1.0));
  for (int l = 0; l < q.levels(); ++l)
    for (int p = 1; p <= max_power; ++p) table[l][p] = std::pow(q.nodes[l], p);
  return table;
}

inline int max_power(const std::vector<ScalarFunctional>& fs) {
  int m = 0;
  for (const auto& f : fs)
    for (const auto& t : f.terms)
      for (const auto& fp : t.factors) {
        if (fp.power < 0) throw ModelError("scalar functionals must have non-negative powers");
        m = std::max(m, fp.power);
      }
  return m;
}

}  // namespace detail

/// Exact expectations of products of scalar functionals under the
/// discretized measure  prod_x w(phi_x) exp(-sum_links (phi_x - phi_y)^2 / 2).
///
/// `products[k]` lists indices into `factors`; the result holds
/// <prod_{i in products[k]} factors[i]> for every k. The sum is exhaustive,
/// partitioned over the leading sites with a fixed reduction order.
inline std::vector<cplx> exact_scalar_expectations(const QuadratureMeasure& measure, const LatticeGeometry& geom,
                                                   const std::vector<ScalarFunctional>& factors,
                                                   const std::vector<std::vector<int>>& products,
                                                   std::uint64_t budget = kEnumerationBudget) {
  const int n_sites = geom.num_sites();
  const int levels = measure.levels();
  if (levels < 2) throw ModelError("exact enumeration needs at least two levels");
  checked_config_count(levels, n_sites, budget, "exact_correlator");
  for (const auto& f : factors)
    for (const auto& t : f.terms)
      for (const auto& fp : t.factors)
        if (fp.site < 0 || fp.site >= n_sites) throw GeometryError("functional references a site outside the lattice");
  for (const auto& p : products)
    for (int i : p)
      if (i < 0 || i >= static_cast<int>(factors.size())) throw Error("product references an unknown factor");

  const auto powers = detail::power_table(measure, detail::max_power(factors));
  std::vector<detail::CompiledScalarFunctional> compiled;
  for (const auto& f : factors) {
    detail::CompiledScalarFunctional c;
    for (const auto& t : f.terms) c.terms.push_back({t.coeff, t.factors});
    compiled.push_back(std::move(c));
  }

  // partition over the leading `lead` sites
  int lead = 0;
  std::uint64_t chunks = 1;
  while (lead < n_sites && chunks < 64) {
    chunks *= levels;
    ++lead;
  }

  std::vector<detail::ExactSums> partial(chunks);

  parallel_for(static_cast<int>(chunks), [&](int chunk) {
    std::vector<int> level(n_sites, 0);
    int c = chunk;
    for (int s = lead - 1; s >= 0; --s) {
      level[s] = c % levels;
      c /= levels;
    }
    std::vector<double> phi(n_sites);
    std::vector<cplx> values(compiled.size());
    detail::ExactSums acc(products.size());
    while (true) {
      double logw = 0.0;
      double qw = 1.0;
      for (int s = 0; s < n_sites; ++s) {
        phi[s] = measure.nodes[level[s]];
        qw *= measure.weights[level[s]];
      }
      for (int l = 0; l < geom.num_links(); ++l) {
        const double d = phi[geom.link(l).site] - phi[geom.link_head(l)];
        logw -= 0.5 * d * d;
      }
      const double w = qw * std::exp(logw);
      acc.z += w;
      for (std::size_t i = 0; i < compiled.size(); ++i) values[i] = compiled[i].eval(level, powers);
      for (std::size_t k = 0; k < products.size(); ++k) {
        cplx v{w, 0.0};
        for (int i : products[k]) v *= values[i];
        acc.add(k, v);
      }
      // odometer over the tail sites
      int s = n_sites - 1;
      for (; s >= lead; --s) {
        if (++level[s] < levels) break;
        level[s] = 0;
      }
      if (s < lead) break;
    }
    partial[chunk] = std::move(acc);
  });

  detail::ExactSums total(products.size());
  for (const auto& p : partial) total.merge(p);
  return total.normalized();
}

/// <f g> by exhaustive enumeration on `levels` Gauss nodes of exp(-V).
inline cplx exact_correlator(const ScalarModel& model, const LatticeGeometry& geom, const ScalarFunctional& f,
                             const ScalarFunctional& g, int levels, std::uint64_t budget = kEnumerationBudget) {
  checked_config_count(levels, geom.num_sites(), budget, "exact_correlator");
  const QuadratureMeasure q = gauss_quadrature(model, levels);
  return exact_scalar_expectations(q, geom, {f, g}, {{0, 1}}, budget)[0];
}

struct FactorizationResult {
  cplx lhs;    ///< <f Theta(f)> by full enumeration
  double rhs;  ///< int dmu_0 |int dmu_+ f|^2 / int dmu_0 |int dmu_+ 1|^2
};

/// int dmu_0 |int dmu_+ f|^2 / int dmu_0 |int dmu_+ 1|^2: for every
/// configuration of the fixed plane the positive half is summed first and
/// squared. The mirror half contributes the same sum conjugated, since the
/// measure is reflection symmetric.
inline double factorization_rhs(const QuadratureMeasure& measure, const LatticeGeometry& geom,
                                const ScalarFunctional& f, std::uint64_t budget = kEnumerationBudget) {
  if (!supported_in(geom, f, Region::plus))
    throw SupportError("factorization_check: functional is not supported in the positive half-lattice");
  const int levels = measure.levels();
  checked_config_count(levels, geom.num_sites(), budget, "factorization_check");

  const std::vector<int> zero_sites = geom.sites_in(Region::zero);
  const std::vector<int> plus_sites = geom.sites_in(Region::plus);
  const std::vector<int> zero_links = geom.links_in(Region::zero);
  const std::vector<int> plus_links = geom.links_in(Region::plus);

  const auto powers = detail::power_table(measure, detail::max_power({f}));
  detail::CompiledScalarFunctional cf;
  for (const auto& t : f.terms) cf.terms.push_back({t.coeff, t.factors});

  std::vector<int> level(geom.num_sites(), 0);
  auto hop = [&](const std::vector<int>& links) {
    double s = 0.0;
    for (int l : links) {
      const double d = measure.nodes[level[geom.link(l).site]] - measure.nodes[level[geom.link_head(l)]];
      s += 0.5 * d * d;
    }
    return s;
  };
  auto advance = [&](const std::vector<int>& sites) {
    for (int i = static_cast<int>(sites.size()) - 1; i >= 0; --i) {
      if (++level[sites[i]] < levels) return true;
      level[sites[i]] = 0;
    }
    return false;
  };

  double num = 0.0, den = 0.0;
  do {
    double w0 = std::exp(-hop(zero_links));
    for (int s : zero_sites) w0 *= measure.weights[level[s]];
    cplx a{0.0, 0.0};
    double b = 0.0;
    do {
      double wp = std::exp(-hop(plus_links));
      for (int s : plus_sites) wp *= measure.weights[level[s]];
      a += wp * cf.eval(level, powers);
      b += wp;
    } while (advance(plus_sites));
    num += w0 * std::norm(a);
    den += w0 * b * b;
  } while (advance(zero_sites));
  return num / den;
}

/// Evaluates <f Theta f> two ways: the plain exhaustive sum, and the split
/// over the mirror plane.
inline FactorizationResult factorization_check(const QuadratureMeasure& measure, const LatticeGeometry& geom,
                                               const ScalarFunctional& f,
                                               std::uint64_t budget = kEnumerationBudget) {
  FactorizationResult out;
  out.rhs = factorization_rhs(measure, geom, f, budget);
  out.lhs = exact_scalar_expectations(measure, geom, {f, theta_functional(geom, f)}, {{0, 1}}, budget)[0];
  return out;
}

inline FactorizationResult factorization_check(const ScalarModel& model, const LatticeGeometry& geom,
                                               const ScalarFunctional& f, int levels,
                                               std::uint64_t budget = kEnumerationBudget) {
  return factorization_check(gauss_quadrature(model, levels), geom, f, budget);
}

}  // namespace rplab
