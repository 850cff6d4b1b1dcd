#pragma once

// Completeness proxies and other geometric summaries of numerical flows.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "rfcusp/charts.hpp"
#include "rfcusp/errors.hpp"
#include "rfcusp/report.hpp"
#include "rfcusp/solver.hpp"
#include "rfcusp/verify.hpp"

namespace rfcusp {

namespace detail {

/// Trapezoid integral of f(value) d(coord) over [a, b] within a profile,
/// with linear interpolation at cut points.
template <class F>
double integrate_profile(const RadialProfile& p, double a, double b, F&& f) {
  const auto& x = p.coords;
  a = std::max(a, x.front());
  b = std::min(b, x.back());
  if (!(b > a)) return 0.0;
  double sum = 0.0;
  double xl = a, yl = f(xl, interpolate(p, a));
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] <= a) continue;
    const double xr = std::min(x[i], b);
    const double yr = f(xr, xr == x[i] ? p.values[i] : interpolate(p, xr));
    sum += 0.5 * (xr - xl) * (yl + yr);
    xl = xr;
    yl = yr;
    if (x[i] >= b) break;
  }
  return sum;
}

}  // namespace detail

/// Radial distance from the circle s = s0 to the origin (or to the end of the
/// grid when there is no cap): int e^u ds on the LogPolar part plus
/// int e^v dr over the cap.
inline double cusp_length(const Snapshot& snap, double s0) {
  const auto& s = snap.outer.coords;
  if (s0 < s.front() - 1e-12 || s0 > s.back() + 1e-12) {
    throw DomainError("cusp_length: s0 = " + std::to_string(s0) + " outside the LogPolar grid");
  }
  double len = detail::integrate_profile(snap.outer, s0, s.back(),
                                         [](double, double u) { return std::exp(u); });
  if (snap.has_cap()) {
    len += detail::integrate_profile(snap.cap, 0.0, snap.cap.coords.back(),
                                     [](double, double v) { return std::exp(v); });
  }
  return len;
}

/// Area of the annular region s in [s_lo, s_hi]; s_hi = +inf includes the
/// whole cap. 2 pi int e^{2u} ds on LogPolar parts, 2 pi int e^{2v} r dr on
/// the cap.
inline double area(const Snapshot& snap, double s_lo, double s_hi) {
  if (!(s_hi > s_lo)) return 0.0;
  const double two_pi = 2.0 * std::numbers::pi;
  double a = two_pi * detail::integrate_profile(snap.outer, s_lo, s_hi,
                                                [](double, double u) { return std::exp(2.0 * u); });
  if (snap.has_cap() && s_hi > snap.outer.coords.back()) {
    const double r_hi = std::min(snap.cap.coords.back(), std::exp(-std::max(s_lo, snap.outer.coords.back())));
    const double r_lo = std::isfinite(s_hi) ? std::exp(-s_hi) : 0.0;
    a += two_pi * detail::integrate_profile(snap.cap, r_lo, r_hi,
                                            [](double r, double v) { return std::exp(2.0 * v) * r; });
  }
  return a;
}

/// Area of a single profile over its coordinate interval [lo, hi].
inline double profile_area(const RadialProfile& p, double lo, double hi) {
  const double two_pi = 2.0 * std::numbers::pi;
  if (p.chart == Chart::LogPolar) {
    return two_pi * detail::integrate_profile(p, lo, hi, [](double, double u) { return std::exp(2.0 * u); });
  }
  return two_pi * detail::integrate_profile(p, lo, hi, [](double r, double v) { return std::exp(2.0 * v) * r; });
}

/// sup |K| over resolved nodes with LogPolar coordinate in [s_lo, s_hi]
/// (cap nodes, including r = 0, count as s = -ln r). NaN when no node in the
/// range is resolved.
inline double sup_abs_curvature(const Snapshot& snap, double s_lo, double s_hi) {
  double sup = std::numeric_limits<double>::quiet_NaN();
  auto fold = [&](const CurvatureSamples& K, bool cap) {
    for (std::size_t i = 0; i < K.size(); ++i) {
      const double s = cap ? (K.coords[i] > 0.0 ? -std::log(K.coords[i]) : std::numeric_limits<double>::infinity())
                           : K.coords[i];
      if (s < s_lo || s > s_hi || !K.resolved(i)) continue;
      sup = std::isnan(sup) ? std::abs(K.values[i]) : std::max(sup, std::abs(K.values[i]));
    }
  };
  fold(gauss_curvature(snap.outer), false);
  if (snap.has_cap() && snap.cap.size() >= 3) fold(gauss_curvature(snap.cap), true);
  return sup;
}

/// sup over s in [lo, hi] of |u - (-ln s + 1/2 ln(1+2t))|.
inline double hyperbolic_deviation(const Snapshot& snap, double lo = 1.0, double hi = 2.0) {
  double dev = 0.0;
  const double lift = 0.5 * std::log1p(2.0 * snap.time());
  for (std::size_t i = 0; i < snap.outer.size(); ++i) {
    const double s = snap.outer.coords[i];
    if (s < lo - 1e-12 || s > hi + 1e-12) continue;
    dev = std::max(dev, std::abs(snap.outer.values[i] - (-std::log(s) + lift)));
  }
  return dev;
}

struct DiagnosticsRecord {
  double t = 0.0;
  /// Radial distance from s = 1 to the origin.
  double length = 0.0;
  /// Area of the cap r <= e^{-s_switch}.
  double cap_area = 0.0;
  /// sup |K| over s in [ln(1/(1-eps_hat)), -ln eps_hat].
  double sup_k_annulus = 0.0;
  /// sup |K| over resolved nodes of the inner disc r <= 1 - eps_hat, which
  /// contains the cap; NaN if none is resolved.
  double sup_k_inner = 0.0;
  /// Deviation from the dilating hyperbolic factor on s in [1, 2].
  double hyp_deviation = 0.0;
};

inline DiagnosticsRecord diagnose(const Snapshot& snap, double eps_hat = 0.2) {
  if (!(eps_hat > 0.0 && eps_hat < 0.5)) throw DomainError("diagnose: eps_hat must lie in (0, 1/2)");
  DiagnosticsRecord d;
  d.t = snap.time();
  d.length = cusp_length(snap, 1.0);
  d.cap_area = snap.has_cap() ? profile_area(snap.cap, 0.0, snap.cap.coords.back()) : 0.0;
  const double s_in = -std::log1p(-eps_hat);
  d.sup_k_annulus = sup_abs_curvature(snap, s_in, -std::log(eps_hat));
  d.sup_k_inner = sup_abs_curvature(snap, s_in, std::numeric_limits<double>::infinity());
  d.hyp_deviation = hyperbolic_deviation(snap);
  return d;
}

inline std::vector<DiagnosticsRecord> diagnose(const FlowTrajectory& tr, double eps_hat = 0.2) {
  std::vector<DiagnosticsRecord> out;
  for (const auto& s : tr.snapshots) out.push_back(diagnose(s, eps_hat));
  return out;
}

/// First recorded time with L(t) < L(0) / 2, or NaN if the length never halves.
inline double contraction_onset(const FlowTrajectory& tr) {
  if (tr.snapshots.empty()) throw PreconditionError("contraction_onset: empty trajectory");
  const double l0 = cusp_length(tr.snapshots.front(), 1.0);
  for (const auto& s : tr.snapshots) {
    if (cusp_length(s, 1.0) < 0.5 * l0) return s.time();
  }
  return std::numeric_limits<double>::quiet_NaN();
}

/// sup over an annulus of |u_k - reference| per (time, k).
struct ConvergenceTable {
  std::vector<int> ks;
  std::vector<double> times;
  /// [time][k]: deviation from -ln s + 1/2 ln(1+2t).
  std::vector<std::vector<double>> hyperbolic;
  /// [time][k]: deviation from the largest k in the table.
  std::vector<std::vector<double>> pairwise;
};

inline ConvergenceTable convergence_table(const std::map<int, const FlowTrajectory*>& runs,
                                          double s_lo = 1.0, double s_hi = 2.0) {
  if (runs.empty()) throw PreconditionError("convergence_table: no trajectories");
  ConvergenceTable tab;
  const auto& ref = *runs.rbegin()->second;
  tab.times = ref.times();
  for (const auto& [k, tr] : runs) {
    const auto t = tr->times();
    if (t.size() != tab.times.size() ||
        !std::equal(t.begin(), t.end(), tab.times.begin(), [](double a, double b) { return std::abs(a - b) <= 1e-12; })) {
      throw PreconditionError("convergence_table: k = " + std::to_string(k) + " has different snapshot times");
    }
    tab.ks.push_back(k);
  }
  for (std::size_t n = 0; n < tab.times.size(); ++n) {
    const auto& snap_ref = ref.snapshots[n];
    std::vector<double> hyp, pair;
    for (const auto& [k, tr] : runs) {
      const auto& snap = tr->snapshots[n];
      hyp.push_back(hyperbolic_deviation(snap, s_lo, s_hi));
      double dev = 0.0;
      for (std::size_t i = 0; i < snap.outer.size(); ++i) {
        const double s = snap.outer.coords[i];
        if (s < s_lo - 1e-12 || s > s_hi + 1e-12) continue;
        dev = std::max(dev, std::abs(snap.outer.values[i] - interpolate(snap_ref.outer, s)));
      }
      pair.push_back(dev);
    }
    tab.hyperbolic.push_back(std::move(hyp));
    tab.pairwise.push_back(std::move(pair));
  }
  return tab;
}

/// Length of the radial segment s in [s_a, s_b] in the metric of a snapshot.
inline double segment_length(const Snapshot& snap, double s_a, double s_b) {
  return detail::integrate_profile(snap.outer, s_a, s_b, [](double, double u) { return std::exp(u); });
}

/// Checks L_{g(0)}(gamma) <= e^{2 M t0} L_{g(t0)}(gamma) for the radial segment
/// s in [s_a, s_b]. Marked not applicable when some recorded snapshot up to t0
/// has sup |K| > M on the segment (with 1e-10 of slack for rounding in K).
inline ReportEntry distance_distortion_check(const FlowTrajectory& tr, double t0, double s_a, double s_b,
                                             double m_bar) {
  ReportEntry e{"distance_distortion", "s in [" + std::to_string(s_a) + ", " + std::to_string(s_b) + "]",
                {0.0, t0}};
  const auto& first = tr.snapshots.front();
  const auto& last = tr.at(t0);
  const double l0 = segment_length(first, s_a, s_b);
  e.tolerance = 1e-9 * l0;
  for (const auto& snap : tr.snapshots) {
    if (snap.time() > t0 + 1e-12) break;
    const double sup = sup_abs_curvature(snap, s_a, s_b);
    if (std::isnan(sup) || sup > m_bar + 1e-10) {
      e.applicable = false;
      e.region += " (sup|K| above M at t = " + std::to_string(snap.time()) + ")";
      return e;
    }
  }
  e.record(l0 - std::exp(2.0 * m_bar * t0) * segment_length(last, s_a, s_b), s_a, t0);
  return e;
}

}  // namespace rfcusp
