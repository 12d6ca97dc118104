#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "rplab/error.hpp"
#include "rplab/gauge.hpp"
#include "rplab/gauge_exact.hpp"
#include "rplab/gauge_mc.hpp"
#include "rplab/lattice.hpp"
#include "rplab/observable.hpp"
#include "rplab/probes.hpp"
#include "rplab/statistics.hpp"

namespace rplab {

enum class EvalMode { exact, mc };

/// How single-probe self-energies are removed from E_int.
/// `automatic` divides by <f1><f2> for neutral pairs only: a charged probe
/// has <f> = 0 by center symmetry, so its pair correlator is used as is.
enum class SelfEnergy { automatic, subtract, none };

struct EnergyOptions {
  EvalMode mode = EvalMode::exact;
  EnumerationOptions enumeration;
  McParams mc;
  SelfEnergy self_energy = SelfEnergy::automatic;
  /// Monte Carlo only: average every correlator over all translations of the
  /// probe pair along the reflection direction (which must be periodic).
  bool translation_average = false;
};

/// Expectations of every product in `set`, exact or sampled.
template <class G>
std::vector<Estimate> expectations(const GaugeModel<G>& model, const LatticeGeometry& geom, const ObservableSet& set,
                                   const EnergyOptions& opts) {
  if (opts.mode == EvalMode::exact) {
    std::vector<Estimate> out;
    for (const cplx& v : exact_gauge_expectations(model, geom, set, opts.enumeration))
      out.push_back(Estimate::exact_value(v));
    return out;
  }
  auto out = mc_expectations(model, geom, set, opts.mc);
  for (auto& e : out) flag_overlap(e, opts.mc.overlap_threshold);
  return out;
}

/// <f> for one probe.
template <class G>
Estimate correlator(const GaugeModel<G>& model, const LatticeGeometry& geom, const std::vector<Probe>& probes,
                    const EnergyOptions& opts) {
  ObservableSet set;
  std::vector<int> ids;
  for (const auto& p : probes) {
    require_supported(model.group, p);
    ids.push_back(set.add_factor(compile(geom, p)));
  }
  set.add_product(ids);
  return expectations(model, geom, set, opts)[0];
}

/// Monte Carlo estimate of the product of probe weights.
template <class G>
Estimate correlator_mc(const GaugeModel<G>& model, const LatticeGeometry& geom, const std::vector<Probe>& probes,
                       const McParams& params) {
  EnergyOptions opts;
  opts.mode = EvalMode::mc;
  opts.mc = params;
  return correlator(model, geom, probes, opts);
}

namespace detail {

inline bool disjoint(const Probe& a, const Probe& b) {
  const auto* ca = std::get_if<PointCharge>(&a);
  const auto* cb = std::get_if<PointCharge>(&b);
  if (ca && cb) return ca->site != cb->site;
  if (ca || cb) return true;
  auto plaqs = [](const Probe& p) {
    return std::holds_alternative<Dielectric>(p) ? std::get<Dielectric>(p).plaquettes
                                                 : std::get<Conductor>(p).plaquettes;
  };
  const auto pa = plaqs(a), pb = plaqs(b);
  for (int p : pa)
    if (std::find(pb.begin(), pb.end(), p) != pb.end()) return false;
  return true;
}

inline bool subtracts(SelfEnergy mode, const Probe& a, const Probe& b) {
  if (mode == SelfEnergy::automatic) return is_neutral(a) && is_neutral(b);
  return mode == SelfEnergy::subtract;
}

// Exact correlators are normalized to |c| <= 1, so summation rounding sits
// near 1e-19; anything below this floor is a zero that cancelled inexactly.
inline constexpr double kExactZeroFloor = 1e-14;

inline double checked_log(double c, bool exact, const char* what) {
  if (c > (exact ? kExactZeroFloor : 0.0)) return std::log(c);
  if (exact) throw ZeroCorrelatorError(std::string(what) + " is not positive; the probes over-constrain the field");
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace detail

/// E_int = -(1/beta) [ln <f1 f2> - ln <f1> - ln <f2>] for every pair, from one
/// shared enumeration or ensemble. Errors of Monte Carlo energies come from
/// the jackknife replicas of the three correlators, so correlations are kept.
template <class G>
std::vector<Estimate> pair_energies(const GaugeModel<G>& model, const LatticeGeometry& geom,
                                    const std::vector<std::pair<Probe, Probe>>& pairs, const EnergyOptions& opts) {
  const bool exact = opts.mode == EvalMode::exact;
  const bool shift = !exact && opts.translation_average;
  const int r = geom.reflection_dim();
  if (shift && geom.boundary(r) != Boundary::periodic)
    throw GeometryError("translation averaging needs a periodic reflection direction");
  const int n_shift = shift ? geom.extent(r) : 1;

  ObservableSet set;
  struct Ids {
    std::vector<int> both, first, second;
  };
  std::vector<Ids> ids(pairs.size());
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto& [a, b] = pairs[k];
    require_supported(model.group, a);
    require_supported(model.group, b);
    if (!detail::disjoint(a, b)) throw GeometryError("interaction_energy needs disjoint probe worldvolumes");
    for (int t = 0; t < n_shift; ++t) {
      const Probe sa = t == 0 ? a : shift_probe(geom, a, r, t);
      const Probe sb = t == 0 ? b : shift_probe(geom, b, r, t);
      const int fa = set.add_factor(compile(geom, sa));
      const int fb = set.add_factor(compile(geom, sb));
      ids[k].both.push_back(set.add_product({fa, fb}));
      // single-probe products are only formed when needed: a lone charge is
      // not center invariant and would defeat center fixing
      if (detail::subtracts(opts.self_energy, a, b)) {
        ids[k].first.push_back(set.add_product({fa}));
        ids[k].second.push_back(set.add_product({fb}));
      }
    }
  }
  const std::vector<Estimate> values = expectations(model, geom, set, opts);
  auto pick = [&](const std::vector<int>& which) {
    std::vector<Estimate> xs;
    for (int i : which) xs.push_back(values[i]);
    return xs.size() == 1 ? xs.front() : average(xs);
  };

  const double beta = geom.beta();
  std::vector<Estimate> out;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto& [a, b] = pairs[k];
    const bool subtract = detail::subtracts(opts.self_energy, a, b);
    const Estimate c12 = pick(ids[k].both);
    Estimate c1, c2;
    std::vector<const Estimate*> in{&c12};
    if (subtract) {
      c1 = pick(ids[k].first);
      c2 = pick(ids[k].second);
      in.insert(in.end(), {&c1, &c2});
    }
    Estimate e = derive(in, [&](const std::vector<cplx>& v) {
      double s = detail::checked_log(v[0].real(), exact, "pair correlator");
      if (subtract) {
        s -= detail::checked_log(v[1].real(), exact, "single-probe correlator");
        s -= detail::checked_log(v[2].real(), exact, "single-probe correlator");
      }
      return cplx{-s / beta, 0.0};
    });
    if (!std::isfinite(e.mean.real()) || !std::isfinite(e.std_error)) {
      e.flagged = true;
      e.flag_reason = "correlator estimate not positive; logarithm undefined";
    }
    out.push_back(std::move(e));
  }
  return out;
}

template <class G>
Estimate interaction_energy(const GaugeModel<G>& model, const LatticeGeometry& geom, const Probe& p1, const Probe& p2,
                            const EnergyOptions& opts) {
  return pair_energies(model, geom, {{p1, p2}}, opts)[0];
}

/// E_mir(z) on a grid of probe/mirror separations.
struct EnergyCurve {
  std::vector<int> separations;
  std::vector<Estimate> energies;
};

/// Places the probe with its centroid z/2 from the mirror plane for every z
/// and pairs it with its conjugate image. `anchor` fixes the coordinates
/// transverse to the mirror.
template <class G>
EnergyCurve energy_scan(const GaugeModel<G>& model, const LatticeGeometry& geom, const ProbeSpec& spec,
                        const std::vector<int>& separations, const EnergyOptions& opts, Coord anchor = {},
                        const Rotation& rot = Rotation{}) {
  if (separations.empty()) throw Error("energy_scan needs at least one separation");
  for (std::size_t i = 1; i < separations.size(); ++i)
    if (separations[i] <= separations[i - 1]) throw Error("separations must be strictly increasing");
  std::vector<std::pair<Probe, Probe>> pairs;
  for (int z : separations) {
    anchor[geom.reflection_dim()] = anchor_for_separation(geom, spec, rot, z);
    const Probe p = place(geom, spec, anchor, rot);
    if (probe_region(geom, p) != Region::plus)
      throw SupportError("separation " + std::to_string(z) + " does not keep the probe strictly in the positive half");
    pairs.emplace_back(p, mirror_probe(geom, p));
  }
  return {separations, pair_energies(model, geom, pairs, opts)};
}

/// M[i][j] = E(R_i probe, Theta(R_j probe)) for one anchor.
template <class G>
std::vector<std::vector<Estimate>> orientation_matrix(const GaugeModel<G>& model, const LatticeGeometry& geom,
                                                      const ProbeSpec& spec, const Coord& anchor,
                                                      const std::vector<Rotation>& rotations,
                                                      const EnergyOptions& opts) {
  if (rotations.empty()) throw Error("orientation scan needs at least one rotation");
  std::vector<Probe> probes;
  for (const auto& rot : rotations) {
    Probe p = place(geom, spec, anchor, rot);
    if (probe_region(geom, p) != Region::plus)
      throw SupportError("rotation " + rot.name + " does not keep the probe strictly in the positive half");
    probes.push_back(std::move(p));
  }
  std::vector<std::pair<Probe, Probe>> pairs;
  for (const auto& pi : probes)
    for (const auto& pj : probes) pairs.emplace_back(pi, mirror_probe(geom, pj));
  const auto flat = pair_energies(model, geom, pairs, opts);
  const std::size_t n = probes.size();
  std::vector<std::vector<Estimate>> m(n);
  for (std::size_t i = 0; i < n; ++i) m[i].assign(flat.begin() + i * n, flat.begin() + (i + 1) * n);
  return m;
}

}  // namespace rplab
