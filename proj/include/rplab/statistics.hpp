#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "rplab/error.hpp"

namespace rplab {

using cplx = std::complex<double>;

/// A measured quantity. Exact results carry no replicas and zero error.
/// Monte Carlo results keep their leave-one-block-out replicas so that any
/// derived quantity can be re-estimated with correlations intact.
struct Estimate {
  cplx mean{0.0, 0.0};
  double std_error = 0.0;
  long n_samples = 0;
  int n_blocks = 0;
  std::vector<cplx> replicas;
  /// Set when the estimate should not be trusted (e.g. reweighting overlap
  /// too poor, or a logarithm of a non-positive value was needed).
  bool flagged = false;
  std::string flag_reason;

  bool exact() const { return replicas.empty(); }

  static Estimate exact_value(cplx v, long n = 1) {
    Estimate e;
    e.mean = v;
    e.n_samples = n;
    return e;
  }
};

/// Jackknife error from replicas around `mean`: sqrt((n-1)/n sum |r - mean|^2).
inline double jackknife_error(const std::vector<cplx>& replicas, cplx mean) {
  const double n = static_cast<double>(replicas.size());
  if (n < 2) return 0.0;
  double s = 0.0;
  for (const auto& r : replicas) s += std::norm(r - mean);
  return std::sqrt((n - 1.0) / n * s);
}

/// Estimate from per-block means (equal block sizes).
inline Estimate from_block_means(const std::vector<cplx>& blocks, long n_samples) {
  const int nb = static_cast<int>(blocks.size());
  if (nb < 2) throw Error("jackknife needs at least two blocks");
  cplx total{0.0, 0.0};
  for (const auto& b : blocks) total += b;
  Estimate e;
  e.mean = total / static_cast<double>(nb);
  e.n_samples = n_samples;
  e.n_blocks = nb;
  e.replicas.reserve(nb);
  for (const auto& b : blocks) e.replicas.push_back((total - b) / static_cast<double>(nb - 1));
  e.std_error = jackknife_error(e.replicas, e.mean);
  return e;
}

/// f applied to the means and, replica by replica, to the jackknife samples.
/// All Monte Carlo inputs must share one block structure; exact inputs enter
/// every replica unchanged. Flags propagate.
inline Estimate derive(const std::vector<const Estimate*>& in, const std::function<cplx(const std::vector<cplx>&)>& f) {
  int nb = 0;
  long ns = 0;
  for (const auto* e : in) {
    if (!e->exact()) {
      if (nb != 0 && static_cast<int>(e->replicas.size()) != nb) throw Error("estimates have different block counts");
      nb = static_cast<int>(e->replicas.size());
    }
    ns = std::max(ns, e->n_samples);
  }
  std::vector<cplx> args(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) args[i] = in[i]->mean;
  Estimate out;
  out.mean = f(args);
  out.n_samples = ns;
  out.n_blocks = nb;
  for (const auto* e : in)
    if (e->flagged) {
      out.flagged = true;
      if (out.flag_reason.empty()) out.flag_reason = e->flag_reason;
    }
  if (nb == 0) return out;
  out.replicas.resize(nb);
  for (int b = 0; b < nb; ++b) {
    for (std::size_t i = 0; i < in.size(); ++i) args[i] = in[i]->exact() ? in[i]->mean : in[i]->replicas[b];
    out.replicas[b] = f(args);
  }
  out.std_error = jackknife_error(out.replicas, out.mean);
  return out;
}

/// Arithmetic mean of estimates sharing a block structure.
inline Estimate average(const std::vector<Estimate>& xs) {
  if (xs.empty()) throw Error("average of no estimates");
  std::vector<const Estimate*> ptrs;
  for (const auto& x : xs) ptrs.push_back(&x);
  return derive(ptrs, [](const std::vector<cplx>& v) {
    cplx s{0.0, 0.0};
    for (const auto& x : v) s += x;
    return s / static_cast<double>(v.size());
  });
}

/// Marks an estimate whose relative error of |mean| exceeds `threshold`,
/// the usual sign that the probe-free ensemble rarely visits the
/// configurations the observable is sensitive to.
inline void flag_overlap(Estimate& e, double threshold) {
  if (e.exact()) return;
  const double m = std::abs(e.mean);
  if (!(m > 0.0) || e.std_error / m > threshold) {
    e.flagged = true;
    if (e.flag_reason.empty()) e.flag_reason = "overlap pathology: relative error above threshold";
  }
}

}  // namespace rplab
