#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include "rplab/energy.hpp"
#include "rplab/error.hpp"
#include "rplab/statistics.hpp"

namespace rplab {

enum class Status { pass, fail, inconclusive };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::pass: return "pass";
    case Status::fail: return "fail";
    case Status::inconclusive: return "inconclusive";
  }
  return "?";
}

/// Outcome of one inequality check. `margin` is the slack of the inequality
/// written as margin >= 0; in Monte Carlo mode `z_score` = margin / sigma.
struct Verdict {
  std::string check;
  Status status = Status::pass;
  double margin = 0.0;
  double z_score = std::numeric_limits<double>::quiet_NaN();
  bool exact = true;
  std::string details;
};

inline constexpr double kExactTolerance = 1e-12;
inline constexpr double kSigmaLevel = 3.0;

/// Verdict for "x >= 0". Exact: pass iff x >= -tol. Sampled: fail only below
/// -k sigma; a flagged or non-finite estimate is inconclusive.
inline Verdict verdict_nonnegative(std::string check, const Estimate& x, std::string details = {},
                                   double tol = kExactTolerance, double k = kSigmaLevel) {
  Verdict v;
  v.check = std::move(check);
  v.details = std::move(details);
  v.margin = x.mean.real();
  v.exact = x.exact();
  if (v.exact) {
    v.status = v.margin >= -tol ? Status::pass : Status::fail;
    return v;
  }
  const double sigma = x.std_error;
  v.z_score = sigma > 0.0 ? v.margin / sigma : (v.margin >= 0.0 ? 0.0 : -std::numeric_limits<double>::infinity());
  if (x.flagged || !std::isfinite(v.margin) || !std::isfinite(sigma)) {
    v.status = Status::inconclusive;
    if (x.flagged && !x.flag_reason.empty()) v.details += (v.details.empty() ? "" : "; ") + x.flag_reason;
    return v;
  }
  v.status = v.margin < -k * sigma ? Status::fail : Status::pass;
  return v;
}

/// Worst of several verdicts: fail beats inconclusive beats pass; the margin
/// and z-score are the smallest seen.
inline Verdict combine(std::string check, const std::vector<Verdict>& parts, std::string details = {}) {
  if (parts.empty()) throw Error("nothing to combine");
  Verdict v;
  v.check = std::move(check);
  v.details = std::move(details);
  v.margin = std::numeric_limits<double>::infinity();
  v.z_score = std::numeric_limits<double>::quiet_NaN();
  v.exact = true;
  bool any_inconclusive = false, any_fail = false;
  for (const auto& p : parts) {
    v.margin = std::min(v.margin, p.margin);
    if (!p.exact) {
      v.exact = false;
      if (std::isnan(v.z_score) || p.z_score < v.z_score) v.z_score = p.z_score;
    }
    any_fail |= p.status == Status::fail;
    any_inconclusive |= p.status == Status::inconclusive;
  }
  v.status = any_fail ? Status::fail : (any_inconclusive ? Status::inconclusive : Status::pass);
  return v;
}

// --- positivity and Schwarz -------------------------------------------------

/// <f Theta f> >= 0 for an exact value: Re >= -tol and |Im| <= tol.
inline Verdict check_rp(cplx value, std::string details = {}) {
  Verdict v = verdict_nonnegative("reflection_positivity", Estimate::exact_value(value), std::move(details));
  if (std::abs(value.imag()) > kExactTolerance) {
    v.status = Status::fail;
    v.details += (v.details.empty() ? "" : "; ") + std::string("imaginary part exceeds tolerance");
  }
  return v;
}

/// Sampled version: fail if Re < -3 sigma or |Im| > 3 sigma.
inline Verdict check_rp(const Estimate& value, std::string details = {}) {
  if (value.exact()) return check_rp(value.mean, std::move(details));
  Verdict v = verdict_nonnegative("reflection_positivity", value, std::move(details));
  if (v.status != Status::inconclusive && std::abs(value.mean.imag()) > kSigmaLevel * value.std_error) {
    v.status = Status::fail;
    v.details += (v.details.empty() ? "" : "; ") + std::string("imaginary part beyond 3 sigma");
  }
  return v;
}

/// |c12|^2 <= c11 c22 with c_ij = <f_i Theta f_j>. A failure of positivity in
/// c11 or c22 is reported as a failure of this check.
inline Verdict check_schwarz(const Estimate& c12, const Estimate& c11, const Estimate& c22, std::string details = {}) {
  const Verdict r11 = check_rp(c11);
  const Verdict r22 = check_rp(c22);
  Estimate slack = derive({&c12, &c11, &c22}, [](const std::vector<cplx>& v) {
    return cplx{v[1].real() * v[2].real() - std::norm(v[0]), 0.0};
  });
  Verdict v = verdict_nonnegative("schwarz", slack, std::move(details));
  if (r11.status == Status::fail || r22.status == Status::fail) {
    v.status = Status::fail;
    v.details += (v.details.empty() ? "" : "; ") + std::string("diagonal correlator violates positivity");
  }
  return v;
}

inline Verdict check_schwarz(cplx c12, cplx c11, cplx c22, std::string details = {}) {
  return check_schwarz(Estimate::exact_value(c12), Estimate::exact_value(c11), Estimate::exact_value(c22),
                       std::move(details));
}

// --- energy curves ------------------------------------------------------------

namespace detail {

inline std::string sep_label(int a, int b, int c) {
  return "z=" + std::to_string(a) + "," + std::to_string(b) + "," + std::to_string(c);
}

inline int index_of(const std::vector<int>& xs, int x) {
  auto it = std::find(xs.begin(), xs.end(), x);
  return it == xs.end() ? -1 : static_cast<int>(it - xs.begin());
}

}  // namespace detail

/// Midpoint concavity 2E((a+b)/2) >= E(a) + E(b) for every admissible pair of
/// grid separations a < b, then the second difference
/// E(z-h) - 2E(z) + E(z+h) <= 0 at every interior point of the uniform grid.
inline std::vector<Verdict> concavity_scan(const EnergyCurve& curve) {
  const auto& z = curve.separations;
  const auto& e = curve.energies;
  if (z.size() < 3) throw Error("concavity_scan needs at least three separations");
  if (e.size() != z.size()) throw Error("energy curve is inconsistent");
  const int h = z[1] - z[0];
  for (std::size_t i = 1; i < z.size(); ++i)
    if (z[i] - z[i - 1] != h) throw Error("concavity_scan needs a uniform separation grid");

  std::vector<Verdict> out;
  auto slack = [](const Estimate& lo, const Estimate& mid, const Estimate& hi) {
    return derive({&lo, &mid, &hi},
                  [](const std::vector<cplx>& v) { return cplx{2.0 * v[1].real() - v[0].real() - v[2].real(), 0.0}; });
  };
  for (std::size_t i = 0; i < z.size(); ++i)
    for (std::size_t j = i + 1; j < z.size(); ++j) {
      if ((z[i] + z[j]) % 2 != 0) continue;
      const int m = detail::index_of(z, (z[i] + z[j]) / 2);
      if (m < 0 || m == static_cast<int>(i)) continue;
      out.push_back(verdict_nonnegative("concavity_midpoint", slack(e[i], e[m], e[j]),
                                        detail::sep_label(z[i], z[m], z[j])));
    }
  for (std::size_t i = 1; i + 1 < z.size(); ++i)
    out.push_back(verdict_nonnegative("concavity_second_difference", slack(e[i - 1], e[i], e[i + 1]),
                                      detail::sep_label(z[i - 1], z[i], z[i + 1])));
  return out;
}

/// E non-decreasing in z (attraction) over the separations not exceeding
/// `max_separation`. One verdict for the whole range.
inline Verdict monotonicity_check(const EnergyCurve& curve, int max_separation = std::numeric_limits<int>::max()) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < curve.separations.size(); ++i)
    if (curve.separations[i] <= max_separation) idx.push_back(i);
  if (idx.size() < 2) throw Error("monotonicity_check needs at least two separations in range");
  std::vector<Verdict> steps;
  for (std::size_t k = 1; k < idx.size(); ++k) {
    const Estimate& lo = curve.energies[idx[k - 1]];
    const Estimate& hi = curve.energies[idx[k]];
    steps.push_back(verdict_nonnegative(
        "step", derive({&lo, &hi}, [](const std::vector<cplx>& v) { return cplx{v[1].real() - v[0].real(), 0.0}; })));
  }
  std::string range = "z<=" + std::to_string(curve.separations[idx.back()]);
  return combine("monotonicity", steps, range);
}

/// Convenience for plain value lists (exact curves).
inline EnergyCurve exact_curve(const std::vector<int>& separations, const std::vector<double>& energies) {
  EnergyCurve c;
  c.separations = separations;
  for (double x : energies) c.energies.push_back(Estimate::exact_value(x));
  return c;
}

// --- torque -------------------------------------------------------------------

/// 2 M[i][j] >= M[i][i] + M[j][j] for every ordered pair i != j, and the global
/// minimum of M attained on the diagonal (margin = min off-diagonal entry minus
/// min diagonal entry).
inline std::vector<Verdict> torque_verdicts(const std::vector<std::vector<Estimate>>& m) {
  const std::size_t n = m.size();
  for (const auto& row : m)
    if (row.size() != n) throw Error("orientation matrix must be square");
  std::vector<Verdict> out;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const Estimate slack = derive({&m[i][j], &m[i][i], &m[j][j]}, [](const std::vector<cplx>& v) {
        return cplx{2.0 * v[0].real() - v[1].real() - v[2].real(), 0.0};
      });
      out.push_back(verdict_nonnegative("torque_pair", slack, "i=" + std::to_string(i) + ",j=" + std::to_string(j)));
    }
  if (n == 1) {
    out.push_back(verdict_nonnegative("torque_min_on_diagonal", Estimate::exact_value(0.0), "single orientation"));
    return out;
  }
  std::vector<const Estimate*> all;
  for (const auto& row : m)
    for (const auto& x : row) all.push_back(&x);
  const Estimate gap = derive(all, [n](const std::vector<cplx>& v) {
    double diag = std::numeric_limits<double>::infinity(), off = diag;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double& target = i == j ? diag : off;
        target = std::min(target, v[i * n + j].real());
      }
    return cplx{off - diag, 0.0};
  });
  out.push_back(verdict_nonnegative("torque_min_on_diagonal", gap));
  return out;
}

struct TorqueResult {
  std::vector<std::vector<Estimate>> matrix;
  std::vector<Verdict> verdicts;
};

template <class G>
TorqueResult torque_scan(const GaugeModel<G>& model, const LatticeGeometry& geom, const ProbeSpec& spec,
                         const Coord& anchor, const std::vector<Rotation>& rotations, const EnergyOptions& opts) {
  TorqueResult r;
  r.matrix = orientation_matrix(model, geom, spec, anchor, rotations, opts);
  r.verdicts = torque_verdicts(r.matrix);
  return r;
}

}  // namespace rplab
