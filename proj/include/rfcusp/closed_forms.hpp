#pragma once

// Exact conformal factors used as initial data, barriers and solver oracles.

#include <cmath>
#include <memory>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

#include "rfcusp/charts.hpp"
#include "rfcusp/errors.hpp"
#include "rfcusp/report.hpp"

namespace rfcusp {

/// Value and the derivatives a flow residual needs, at one space-time point.
struct Jet {
  double value = 0.0;
  double d_t = 0.0;
  double d_x = 0.0;
  double d_xx = 0.0;
};

namespace detail {

/// ln(1 + e^y) without overflow.
inline double softplus(double y) {
  return y > 0.0 ? y + std::log1p(std::exp(-y)) : std::log1p(std::exp(y));
}

/// 1 / (1 + e^{-y}).
inline double logistic(double y) {
  if (y >= 0.0) return 1.0 / (1.0 + std::exp(-y));
  const double e = std::exp(y);
  return e / (1.0 + e);
}

}  // namespace detail

/// Hamilton's cigar C(x) = -1/2 ln(1 + e^{2x}).
inline double cigar_profile(double x) { return -0.5 * detail::softplus(2.0 * x); }

namespace metric {

/// Complete hyperbolic metric on D: u = -ln sinh s.
struct Poincare {};

/// Complete hyperbolic metric on D \ {0}: u = -ln s.
struct HyperbolicPunctured {};

/// Complete hyperbolic metric on the annulus D \ D_eps.
struct HyperbolicAnnulus {
  double eps = 0.5;
};

/// Translating cigar u(s,t) = -1/2 ln(lambda) + C(s - shift + 2 lambda t).
struct CigarSoliton {
  double lambda = 1.0;
  double shift = 0.0;
};

/// Homothetically expanding disc w(r,t) = -ln(rho^2 - r^2) + 1/2 ln(alpha + 2t),
/// in the CartesianRadial chart.
struct ExpandingDiscBarrier {
  double rho = 0.5;
  double alpha = 1.0;
};

/// Static subsolution l(s) = -ln(s + delta) - 1/2 ln 10.
struct ShiftedLogSubsolution {
  double delta = 1.0;
};

/// Flat plane u = c - s, i.e. v = c in the CartesianRadial chart.
struct Flat {
  double c = 0.0;
};

struct Scaled;

}  // namespace metric

using ClosedFormMetric =
    std::variant<metric::Poincare, metric::HyperbolicPunctured, metric::HyperbolicAnnulus,
                 metric::CigarSoliton, metric::ExpandingDiscBarrier,
                 metric::ShiftedLogSubsolution, metric::Flat, metric::Scaled>;

namespace metric {

/// Base metric multiplied by a constant c or by the dilation factor 1 + 2t.
/// The factor is kept symbolic so d/dt of 1/2 ln c(t) is exact.
struct Scaled {
  std::shared_ptr<const ClosedFormMetric> base;
  bool dilation = true;
  double constant = 1.0;

  [[nodiscard]] double factor(double t) const { return dilation ? 1.0 + 2.0 * t : constant; }
};

}  // namespace metric

inline ClosedFormMetric make_scaled(ClosedFormMetric base, bool dilation = true,
                                    double constant = 1.0) {
  if (!dilation && !(constant > 0.0)) throw ConstructionError("Scaled: factor must be > 0");
  return metric::Scaled{std::make_shared<const ClosedFormMetric>(std::move(base)), dilation,
                        constant};
}

inline ClosedFormMetric make_annulus(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) {
    throw ConstructionError("hyp_annulus: eps must lie in (0,1), got " + std::to_string(eps));
  }
  return metric::HyperbolicAnnulus{eps};
}

inline ClosedFormMetric make_cigar(double lambda, double shift) {
  if (!(lambda > 0.0)) throw ConstructionError("cigar: lambda must be > 0");
  return metric::CigarSoliton{lambda, shift};
}

inline ClosedFormMetric make_expanding_disc(double rho, double alpha) {
  if (!(rho > 0.0) || !(alpha >= 1.0)) {
    throw ConstructionError("expanding_disc: need rho > 0 and alpha >= 1");
  }
  return metric::ExpandingDiscBarrier{rho, alpha};
}

inline ClosedFormMetric make_shifted_log(double delta) {
  if (!(delta > 0.0)) throw ConstructionError("shifted_log: delta must be > 0");
  return metric::ShiftedLogSubsolution{delta};
}

/// Chart in which the metric's coordinate is expressed.
inline Chart chart_of(const ClosedFormMetric& m) {
  if (std::holds_alternative<metric::ExpandingDiscBarrier>(m)) return Chart::CartesianRadial;
  if (const auto* sc = std::get_if<metric::Scaled>(&m)) return chart_of(*sc->base);
  return Chart::LogPolar;
}

namespace detail {

[[noreturn]] inline void outside(const char* name, double x) {
  throw DomainError(std::string(name) + ": coordinate " + std::to_string(x) +
                    " outside the metric's domain");
}

inline Jet jet_of(const metric::Poincare&, double s, double) {
  if (!(s > 0.0)) outside("poincare", s);
  const double sh = std::sinh(s);
  return {-std::log(sh), 0.0, -std::cosh(s) / sh, 1.0 / (sh * sh)};
}

inline Jet jet_of(const metric::HyperbolicPunctured&, double s, double) {
  if (!(s > 0.0)) outside("hyp_punctured", s);
  return {-std::log(s), 0.0, -1.0 / s, 1.0 / (s * s)};
}

inline Jet jet_of(const metric::HyperbolicAnnulus& a, double s, double) {
  if (!(a.eps > 0.0 && a.eps < 1.0)) throw ConstructionError("hyp_annulus: eps must lie in (0,1)");
  const double width = -std::log(a.eps);
  if (!(s > 0.0 && s < width)) outside("hyp_annulus", s);
  const double w = std::numbers::pi / width;
  const double sn = std::sin(s * w);
  return {-std::log(sn / w), 0.0, -w * std::cos(s * w) / sn, w * w / (sn * sn)};
}

inline Jet jet_of(const metric::CigarSoliton& c, double s, double t) {
  const double x = s - c.shift + 2.0 * c.lambda * t;
  const double sig = logistic(2.0 * x);
  const double d1 = -sig;
  return {-0.5 * std::log(c.lambda) + cigar_profile(x), 2.0 * c.lambda * d1, d1,
          -2.0 * sig * logistic(-2.0 * x)};
}

inline Jet jet_of(const metric::ExpandingDiscBarrier& b, double r, double t) {
  if (!(r >= 0.0 && r < b.rho)) outside("expanding_disc", r);
  const double q = b.rho * b.rho - r * r;
  return {-std::log(q) + 0.5 * std::log(b.alpha + 2.0 * t), 1.0 / (b.alpha + 2.0 * t),
          2.0 * r / q, 2.0 / q + 4.0 * r * r / (q * q)};
}

inline Jet jet_of(const metric::ShiftedLogSubsolution& l, double s, double) {
  const double y = s + l.delta;
  if (!(y > 0.0)) outside("shifted_log", s);
  return {-std::log(y) - 0.5 * std::log(10.0), 0.0, -1.0 / y, 1.0 / (y * y)};
}

inline Jet jet_of(const metric::Flat& f, double s, double) { return {f.c - s, 0.0, -1.0, 0.0}; }

inline Jet jet_of(const metric::Scaled& sc, double x, double t);

}  // namespace detail

/// Value and analytic derivatives of the metric's conformal factor.
inline Jet jet(const ClosedFormMetric& m, double x, double t) {
  if (!(t >= 0.0)) throw DomainError("closed form evaluated at negative time");
  return std::visit([&](const auto& alt) { return detail::jet_of(alt, x, t); }, m);
}

inline Jet detail::jet_of(const metric::Scaled& sc, double x, double t) {
  Jet j = jet(*sc.base, x, t);
  j.value += 0.5 * std::log(sc.factor(t));
  if (sc.dilation) j.d_t += 1.0 / (1.0 + 2.0 * t);
  return j;
}

/// Conformal factor of the metric at coordinate x and time t.
inline double eval(const ClosedFormMetric& m, double x, double t) { return jet(m, x, t).value; }

/// Sample a closed form on a grid as a profile in its own chart.
inline RadialProfile sample(const ClosedFormMetric& m, const std::vector<double>& coords,
                            double t) {
  RadialProfile p{chart_of(m), coords, {}, t};
  p.values.reserve(coords.size());
  for (double x : coords) p.values.push_back(eval(m, x, t));
  return p;
}

/// Lower/upper cigar barriers for the k-th flow. Both are centred at
/// k + k^2/10 at t = 0; the upper one (curvature scale k^2/10) is centred at
/// s = k at t = 1/2, the lower one (5k^2) sits below -ln(2k).
struct BarrierPair {
  int k = 10;
  metric::CigarSoliton upper;
  metric::CigarSoliton lower;

  /// sup_s of the lower barrier at t = 0; attained only as s -> -inf.
  [[nodiscard]] double lower_supremum() const { return -0.5 * std::log(lower.lambda); }
  [[nodiscard]] double upper_at(double s, double t) const { return eval(upper, s, t); }
  [[nodiscard]] double lower_at(double s, double t) const { return eval(lower, s, t); }
};

inline BarrierPair make_barrier_pair(int k) {
  if (k < 1) throw ConstructionError("make_barrier_pair: k must be >= 1");
  const double kk = static_cast<double>(k);
  const double shift = kk + kk * kk / 10.0;
  return {k, {kk * kk / 10.0, shift}, {5.0 * kk * kk, shift}};
}

/// Sampled checks of the elementary cigar properties for
/// C_lambda(s - shift) = -1/2 ln(lambda) + C(s - shift):
/// bounded above by -1/2 ln(lambda), decreasing, below -1/2 ln(lambda) - x,
/// and above -1/2 ln(lambda) - 1/2 ln 2 - x for x = s - shift >= 0.
inline VerificationReport cigar_properties_check(double lambda, double shift,
                                                 const std::vector<double>& grid,
                                                 double tolerance = 1e-12) {
  if (grid.size() < 2) throw DomainError("cigar_properties_check: need at least two samples");
  const metric::CigarSoliton c{lambda, shift};
  const double top = -0.5 * std::log(lambda);
  ReportEntry sup{"cigar_sup", "grid", {0.0}};
  ReportEntry mono{"cigar_decreasing", "grid", {0.0}};
  ReportEntry below{"cigar_below_minus_x", "grid", {0.0}};
  ReportEntry above{"cigar_above_minus_x_shifted", "grid, x >= 0", {0.0}};
  for (auto* e : {&sup, &mono, &below, &above}) e->tolerance = tolerance;
  double prev = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double s = grid[i];
    const double x = s - shift;
    const double u = eval(c, s, 0.0);
    sup.record(u - top, s, 0.0);
    below.record(u - (top - x), s, 0.0);
    if (x >= 0.0) above.record((top - 0.5 * std::log(2.0) - x) - u, s, 0.0);
    if (i > 0) mono.record(u - prev, s, 0.0);
    prev = u;
  }
  VerificationReport r;
  r.provenance = "cigar lambda=" + std::to_string(lambda) + " shift=" + std::to_string(shift);
  r.entries = {sup, mono, below, above};
  return r;
}

}  // namespace rfcusp
