#pragma once

// Flow residuals, the epsilon-stretch supersolution, pointwise ordering checks
// and the inequality suite evaluated on numerical trajectories.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rfcusp/charts.hpp"
#include "rfcusp/closed_forms.hpp"
#include "rfcusp/errors.hpp"
#include "rfcusp/report.hpp"
#include "rfcusp/solver.hpp"

namespace rfcusp {

// ---- residuals ---------------------------------------------------------------

/// Samples of a conformal factor on a fixed grid at several times.
struct SpaceTimeField {
  Chart chart = Chart::LogPolar;
  std::vector<double> coords;
  std::vector<double> times;
  /// values[n][i] at (coords[i], times[n]).
  std::vector<std::vector<double>> values;
};

inline SpaceTimeField sample_field(const ClosedFormMetric& m, const std::vector<double>& coords,
                                   const std::vector<double>& times) {
  SpaceTimeField f{chart_of(m), coords, times, {}};
  for (double t : times) f.values.push_back(sample(m, coords, t).values);
  return f;
}

/// d_t u - e^{-2u} Lap(u) from a jet, with Lap = d_xx (LogPolar) or
/// d_xx + d_x / x (CartesianRadial; at x = 0 the regular limit 2 d_xx).
inline double residual_of_jet(const Jet& j, Chart chart, double x) {
  double lap = j.d_xx;
  if (chart == Chart::CartesianRadial) lap = x == 0.0 ? 2.0 * j.d_xx : j.d_xx + j.d_x / x;
  return j.d_t - std::exp(-2.0 * j.value) * lap;
}

/// Residual of a closed form using its analytic derivatives.
inline double rf_residual(const ClosedFormMetric& m, double x, double t) {
  return residual_of_jet(jet(m, x, t), chart_of(m), x);
}

/// Residual of a sampled field at interior times (central differences in t)
/// and interior nodes (three-point Laplacian; the origin uses the reflected
/// stencil). Result has times[1..n-2] and the nodes where the stencil exists.
inline SpaceTimeField rf_residual(const SpaceTimeField& f) {
  if (f.times.size() < 3 || f.coords.size() < 3) {
    throw DomainError("rf_residual: need at least 3 time levels and 3 grid points");
  }
  if (f.values.size() != f.times.size()) throw DomainError("rf_residual: values/times mismatch");
  SpaceTimeField out;
  out.chart = f.chart;
  const auto& x = f.coords;
  const bool origin = f.chart == Chart::CartesianRadial && x.front() == 0.0;
  if (origin) out.coords.push_back(0.0);
  for (std::size_t i = 1; i + 1 < x.size(); ++i) out.coords.push_back(x[i]);
  for (std::size_t n = 1; n + 1 < f.times.size(); ++n) {
    const double tm = f.times[n - 1], t0 = f.times[n], tp = f.times[n + 1];
    const auto& um = f.values[n - 1];
    const auto& u0 = f.values[n];
    const auto& up = f.values[n + 1];
    std::vector<double> row;
    auto push = [&](std::size_t i, const fd::Stencil& w, double a, double b, double c) {
      const double ut = fd::first_derivative(t0 - tm, tp - t0, um[i], u0[i], up[i]);
      row.push_back(ut - std::exp(-2.0 * b) * (w.minus * a + w.zero * b + w.plus * c));
    };
    if (origin) push(0, fd::radial_laplacian_origin(x[1]), u0[1], u0[0], u0[1]);
    for (std::size_t i = 1; i + 1 < x.size(); ++i) {
      const double hm = x[i] - x[i - 1], hp = x[i + 1] - x[i];
      const auto w = f.chart == Chart::LogPolar ? fd::log_polar_laplacian(hm, hp)
                                                : fd::radial_laplacian(x[i], hm, hp);
      push(i, w, u0[i - 1], u0[i], u0[i + 1]);
    }
    out.times.push_back(t0);
    out.values.push_back(std::move(row));
  }
  return out;
}

// ---- epsilon stretch ---------------------------------------------------------

using JetField = std::function<Jet(double x, double t)>;

/// v_eps(x, t) = v(x, ln(eps t + 1) / eps) + 1/2 ln(eps t + 1). If v solves the
/// flow exactly, v_eps has residual eps / (2 (eps t + 1)).
inline JetField epsilon_stretch(JetField v, double eps) {
  if (!(eps > 0.0)) throw DomainError("epsilon_stretch: eps must be > 0");
  return [v = std::move(v), eps](double x, double t) {
    const double a = eps * t + 1.0;
    const double tau = std::log1p(eps * t) / eps;
    Jet j = v(x, tau);
    j.value += 0.5 * std::log(a);
    j.d_t = j.d_t / a + eps / (2.0 * a);
    return j;
  };
}

inline JetField epsilon_stretch(const ClosedFormMetric& m, double eps) {
  return epsilon_stretch([m](double x, double t) { return jet(m, x, t); }, eps);
}

/// Sampled stretch on new times, interpolating v linearly in time.
inline SpaceTimeField epsilon_stretch(const SpaceTimeField& v, double eps,
                                      const std::vector<double>& out_times) {
  if (!(eps > 0.0)) throw DomainError("epsilon_stretch: eps must be > 0");
  if (v.times.empty()) throw DomainError("epsilon_stretch: empty field");
  SpaceTimeField out{v.chart, v.coords, out_times, {}};
  for (double t : out_times) {
    const double tau = std::log1p(eps * t) / eps;
    if (tau < v.times.front() - 1e-12 || tau > v.times.back() + 1e-12) {
      throw DomainError("epsilon_stretch: field does not cover stretched time " + std::to_string(tau));
    }
    auto it = std::upper_bound(v.times.begin(), v.times.end(), tau);
    std::size_t n = it == v.times.end() ? v.times.size() - 1 : static_cast<std::size_t>(it - v.times.begin());
    if (n == 0) n = 1;
    const double w = v.times.size() == 1 ? 0.0 : (tau - v.times[n - 1]) / (v.times[n] - v.times[n - 1]);
    std::vector<double> row(v.coords.size());
    for (std::size_t i = 0; i < row.size(); ++i) {
      const double a = v.values[n - 1][i], b = v.times.size() == 1 ? a : v.values[n][i];
      row[i] = (1.0 - w) * a + w * b + 0.5 * std::log1p(eps * t);
    }
    out.values.push_back(std::move(row));
  }
  return out;
}

// ---- ordering ----------------------------------------------------------------

/// LogPolar coordinate interval; hi = +inf reaches into the cap (r > 0 nodes).
struct Region {
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  /// Samples used when neither side is a trajectory.
  std::size_t samples = 401;

  [[nodiscard]] bool contains(double s) const { return s >= lo - 1e-12 && s <= hi + 1e-12; }
};

/// Something that has a LogPolar conformal factor at (s, t).
using FieldRef = std::variant<ClosedFormMetric, const FlowTrajectory*>;

namespace detail {

/// LogPolar nodes of a snapshot inside the region: outer nodes, then cap nodes
/// with r > 0 mapped to s = -ln r.
inline std::vector<std::pair<double, double>> nodes_in(const Snapshot& snap, const Region& reg) {
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 0; i < snap.outer.size(); ++i) {
    if (reg.contains(snap.outer.coords[i])) out.emplace_back(snap.outer.coords[i], snap.outer.values[i]);
  }
  if (snap.has_cap()) {
    for (std::size_t j = snap.cap.size() - 1; j-- > 1;) {
      const double s = -std::log(snap.cap.coords[j]);
      if (reg.contains(s)) out.emplace_back(s, snap.cap.values[j] - s);
    }
  }
  return out;
}

/// u at LogPolar s from a snapshot, interpolating in whichever chart holds s.
inline double snapshot_value(const Snapshot& snap, double s) {
  if (s <= snap.outer.coords.back()) return interpolate(snap.outer, s);
  if (!snap.has_cap()) throw DomainError("point beyond the grid of a cap-less snapshot");
  return interpolate(snap.cap, std::exp(-s)) - s;
}

inline double field_value(const FieldRef& f, double s, double t) {
  if (const auto* m = std::get_if<ClosedFormMetric>(&f)) return eval(*m, s, t);
  return snapshot_value(std::get<const FlowTrajectory*>(f)->at(t), s);
}

}  // namespace detail

/// Entry whose max_violation is max(B - A) over region x times; it passes when
/// A >= B holds to within the tolerance. Sample points come from the first
/// trajectory operand, so swapping a and b can sample different points.
inline ReportEntry check_ordering(const FieldRef& a, const FieldRef& b, const Region& region,
                                  const std::vector<double>& times, double tolerance,
                                  std::string name = "ordering") {
  ReportEntry e{std::move(name), "s in [" + std::to_string(region.lo) + ", " + std::to_string(region.hi) + "]",
                times};
  e.tolerance = tolerance;
  const FlowTrajectory* grid_src = nullptr;
  if (const auto* p = std::get_if<const FlowTrajectory*>(&a)) grid_src = *p;
  else if (const auto* q = std::get_if<const FlowTrajectory*>(&b)) grid_src = *q;
  for (double t : times) {
    std::vector<double> xs;
    if (grid_src) {
      for (const auto& [s, u] : detail::nodes_in(grid_src->at(t), region)) xs.push_back(s);
    } else {
      if (!std::isfinite(region.hi)) throw DomainError("check_ordering: closed forms need a bounded region");
      xs = uniform_grid(region.lo, region.hi, std::max<std::size_t>(region.samples, 2));
    }
    for (double s : xs) e.record(detail::field_value(b, s, t) - detail::field_value(a, s, t), s, t);
  }
  return e;
}

// ---- inequality suite --------------------------------------------------------

/// Constants the origin-control entries need; the paper's lemmas assert they
/// exist independently of k but do not give values.
struct OriginConstants {
  double alpha_hat = 1.0;
  double c = 0.0;
};

namespace detail {

/// sup of v over r <= radius (s >= -ln radius) across both charts.
inline double sup_v_inside(const Snapshot& snap, double radius) {
  const double s_cut = -std::log(radius);
  double sup = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < snap.outer.size(); ++i) {
    if (snap.outer.coords[i] >= s_cut) sup = std::max(sup, snap.outer.values[i] + snap.outer.coords[i]);
  }
  if (snap.has_cap()) {
    for (double v : snap.cap.values) sup = std::max(sup, v);
  }
  return sup;
}

/// Times of the trajectory with t in [lo, hi].
inline std::vector<double> times_between(const FlowTrajectory& tr, double lo, double hi) {
  std::vector<double> out;
  for (double t : tr.times()) {
    if (t >= lo - 1e-12 && t <= hi + 1e-12) out.push_back(t);
  }
  return out;
}

}  // namespace detail

/// Relative grid scale h_hat = max_i h_i / min(1, s_i) of a LogPolar grid;
/// three-point truncation errors of -ln s scale like h_hat^2.
inline double relative_spacing(const std::vector<double>& s) {
  double h = 0.0;
  for (std::size_t i = 1; i < s.size(); ++i) h = std::max(h, (s[i] - s[i - 1]) / std::min(1.0, s[i - 1]));
  return h;
}

/// Fit alpha_hat so that sup_{r<=1/4} v(t) <= ln(16/3) + 1/2 ln(alpha_hat + 2t)
/// for every recorded t >= 3/4 (alpha_hat >= 1), and c so that the rescaled
/// factor sup_{r<=1/2} v(1/2 + 10 tau) - 1/2 ln 10 stays below c / tau.
inline OriginConstants fit_origin_constants(const FlowTrajectory& tr) {
  OriginConstants oc;
  for (const auto& snap : tr.snapshots) {
    const double t = snap.time();
    if (t >= 0.75 - 1e-12) {
      const double sup = detail::sup_v_inside(snap, 0.25);
      oc.alpha_hat = std::max(oc.alpha_hat, std::exp(2.0 * (sup - std::log(16.0 / 3.0))) - 2.0 * t);
    }
    const double tau = (t - 0.5) / 10.0;
    if (tau > 1e-12 && tau <= 1.0) {
      const double sup = detail::sup_v_inside(snap, 0.5) - 0.5 * std::log(10.0);
      oc.c = std::max(oc.c, tau * sup);
    }
  }
  return oc;
}

struct InequalityOptions {
  /// k-independent absolute tolerance in conformal-factor units.
  double base_tolerance = 0.05;
  OriginConstants origin;
};

/// The named inequalities a_upper .. i on a trajectory of the k-th flow.
/// Entries whose time window lies past the last snapshot are marked not
/// applicable; a named time inside the covered span that was not recorded is a
/// precondition error.
inline VerificationReport check_named_inequalities(const FlowTrajectory& tr, int k,
                                                   const InequalityOptions& opt = {}) {
  if (tr.snapshots.empty()) throw PreconditionError("check_named_inequalities: empty trajectory");
  const double t_last = tr.snapshots.back().time();
  for (double t : {0.0, 0.01, 0.5, 0.75, 1.0}) {
    if (t <= t_last + 1e-12 && !tr.has_time(t)) {
      throw PreconditionError("check_named_inequalities: missing snapshot at t = " + std::to_string(t));
    }
  }
  const auto bp = make_barrier_pair(k);
  const double kk = k;
  const double hhat = relative_spacing(tr.snapshots.front().outer.coords);
  const double tol = opt.base_tolerance + hhat * hhat;
  const double tol_k = 10.0 * hhat * hhat;
  const double ln10 = std::log(10.0);
  const auto early = detail::times_between(tr, 0.0, 0.5);

  VerificationReport rep;
  rep.provenance = "k=" + std::to_string(k);
  auto entry = [&](std::string name, std::string region, std::vector<double> times, double tolerance) {
    ReportEntry e{std::move(name), std::move(region), std::move(times)};
    e.tolerance = tolerance;
    e.applicable = !e.times.empty();
    return e;
  };
  // Apply bound(s, t) - u >= 0 (upper bounds) or u - bound >= 0 (lower bounds)
  // on the outer grid and cap nodes inside [lo, hi].
  auto sweep = [&](ReportEntry& e, double lo, double hi, auto&& violation) {
    for (double t : e.times) {
      for (const auto& [s, u] : detail::nodes_in(tr.at(t), Region{lo, hi})) e.record(violation(s, t, u), s, t);
    }
  };

  auto a_up = entry("a_upper", "s >= k, t in [0, 1/2]", early, tol);
  sweep(a_up, kk, std::numeric_limits<double>::infinity(),
        [&](double s, double t, double u) { return u - bp.upper_at(s, t); });
  auto a_lo = entry("a_lower", "s >= k, t in [0, 1/2]", early, tol);
  sweep(a_lo, kk, std::numeric_limits<double>::infinity(),
        [&](double s, double t, double u) { return bp.lower_at(s, t) - u; });

  const double insul = 0.5 * std::log(std::numbers::pi * std::numbers::pi / 2.0);
  auto b = entry("b", "s in (0, k], t in [0, 1/2]", early, tol);
  sweep(b, 0.0, kk, [&](double s, double, double u) { return u - (insul - std::log(s)); });

  auto c1 = entry("c1", "s = k, t in [0, 1/2]", early, tol);
  for (double t : c1.times) {
    const double u = detail::snapshot_value(tr.at(t), kk);
    c1.record(u - (0.5 * std::log(5.0) - std::log(kk)), kk, t);
  }
  const std::vector<double> half = tr.has_time(0.5) ? std::vector<double>{0.5} : std::vector<double>{};
  auto c2 = entry("c2", "s in (0, k], t = 1/2", half, tol);
  sweep(c2, 0.0, kk, [&](double s, double, double u) { return u - (0.5 * ln10 - std::log(s)); });

  auto d = entry("d", "all s, t = 1/2", half, tol);
  sweep(d, 0.0, std::numeric_limits<double>::infinity(),
        [&](double s, double, double u) { return u - (0.5 * ln10 - std::log(s)); });

  auto e = entry("e", "s in (0, k], t in [0, 1/100]", detail::times_between(tr, 0.0, 0.01), tol);
  sweep(e, 0.0, kk, [&](double s, double, double u) { return (-std::log(s) - 0.5 * ln10) - u; });

  const metric::HyperbolicAnnulus ann{std::exp(-2.0 * kk)};
  auto f = entry("f", "s in (0, 2k), all t", tr.times(), tol);
  sweep(f, 0.0, 2.0 * kk - 1e-9, [&](double s, double t, double u) {
    return u - (eval(ann, s, 0.0) + 0.5 * std::log1p(2.0 * t));
  });

  auto g = entry("g", "all resolved nodes, all t", tr.times(), tol_k);
  for (const auto& snap : tr.snapshots) {
    const double t = snap.time();
    const double bound = -1.0 / (1.0 + 2.0 * t);
    for (const RadialProfile* p : {&snap.outer, &snap.cap}) {
      if (p->size() < 3) continue;
      const auto K = gauss_curvature(*p);
      for (std::size_t i = 0; i < K.size(); ++i) {
        if (K.resolved(i)) g.record(bound - K.values[i], K.coords[i], t);
      }
    }
  }

  auto h = entry("h", "r <= 1/4, t >= 3/4", detail::times_between(tr, 0.75, t_last), tol);
  for (double t : h.times) {
    const double sup = detail::sup_v_inside(tr.at(t), 0.25);
    h.record(sup - (std::log(16.0 / 3.0) + 0.5 * std::log(opt.origin.alpha_hat + 2.0 * t)), 0.25, t);
  }

  std::vector<double> itimes;
  for (double t : tr.times()) {
    const double tau = (t - 0.5) / 10.0;
    if (tau > 1e-12 && tau <= 1.0) itimes.push_back(t);
  }
  auto i = entry("i", "r <= 1/2, rescaled tau = (t - 1/2) / 10 in (0, 1]", itimes, tol);
  for (double t : i.times) {
    const double tau = (t - 0.5) / 10.0;
    const double sup = detail::sup_v_inside(tr.at(t), 0.5) - 0.5 * ln10;
    i.record(sup - opt.origin.c / tau, 0.5, t);
  }

  rep.entries = {a_up, a_lo, b, c1, c2, d, e, f, g, h, i};
  return rep;
}

}  // namespace rfcusp
