#pragma once

// Glued initial conformal factor u_k(., 0): hyperbolic cusp on (0, 2k], a blend
// inside the cigar barrier band on [2k, 3k], the lower cigar from 3k on, and a
// Cartesian cap past s_switch carrying the lower cigar's tail.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "rfcusp/charts.hpp"
#include "rfcusp/closed_forms.hpp"
#include "rfcusp/errors.hpp"
#include "rfcusp/report.hpp"

namespace rfcusp {

enum class Blend { Smoothstep, ClippedLinear };

inline std::string_view to_string(Blend b) {
  return b == Blend::Smoothstep ? "smoothstep" : "clipped_linear";
}

inline Blend parse_blend(std::string_view name) {
  if (name == "smoothstep") return Blend::Smoothstep;
  if (name == "clipped_linear" || name == "linear") return Blend::ClippedLinear;
  throw ConfigError("unknown blend '" + std::string(name) +
                    "' (expected smoothstep or clipped_linear)");
}

/// Default chart interface: at least 3k + 5, and far enough past the lower
/// cigar's centre k + k^2/10 that the cap only sees the cigar's smooth tip.
inline double default_s_switch(int k) {
  const double kk = k;
  return std::max(3.0 * kk + 5.0, std::ceil(kk + kk * kk / 10.0) + 10.0);
}

struct InitialDataSpec {
  int k = 10;
  Blend blend = Blend::Smoothstep;
  double s_min = 0.05;
  /// <= 0 selects default_s_switch(k).
  double s_switch = 0.0;
  /// Uniform spacing away from the disc boundary.
  double ds = 0.05;
  /// Ratio of consecutive spacings in the geometric zone next to s_min.
  double grading = 1.02;
  /// Cells of the Cartesian cap grid; 0 selects round(1/ds), matching the
  /// LogPolar spacing at the interface.
  std::size_t n_cap = 0;

  [[nodiscard]] double interface() const { return s_switch > 0.0 ? s_switch : default_s_switch(k); }
  [[nodiscard]] std::size_t cap_cells() const {
    return n_cap > 0 ? n_cap : static_cast<std::size_t>(std::max(4.0, std::round(1.0 / ds)));
  }

  void validate() const {
    if (k < 10) {
      throw ConstructionError("k = " + std::to_string(k) +
                              " rejected: the Poincare lower bound on the initial data requires k >= 10");
    }
    const double sw = interface();
    if (!(s_min > 0.0 && s_min < 1.0)) throw ConstructionError("s_min must lie in (0, 1)");
    if (!(sw >= 3.0 * k + 2.0)) {
      throw ConstructionError("s_switch must be >= 3k + 2 so the cap lies in the pure-cigar region");
    }
    if (!(ds > 0.0 && ds <= 0.5)) throw ConstructionError("ds must lie in (0, 0.5]");
    if (!(grading > 1.0 && grading < 2.0)) throw ConstructionError("grading must lie in (1, 2)");
  }
};

/// Initial data split across the two charts. The last LogPolar node and the
/// last cap node are the same circle r = e^{-s_switch}.
struct InitialProfile {
  RadialProfile outer;
  RadialProfile cap;
  /// Blend samples that left the barrier band and were clipped back into it.
  std::size_t clipped = 0;
};

namespace detail {

inline double blend_weight(Blend b, double tau) {
  tau = std::clamp(tau, 0.0, 1.0);
  return b == Blend::Smoothstep ? tau * tau * (3.0 - 2.0 * tau) : tau;
}

/// v(r) of the lower cigar at t = 0, stable for r far below e^{-shift}.
inline double lower_cap_value(const metric::CigarSoliton& c, double r) {
  if (r == 0.0) return -0.5 * std::log(c.lambda) + c.shift;
  const double y = std::log(r) + c.shift;  // ln(r e^{shift})
  return -0.5 * std::log(c.lambda) + c.shift - 0.5 * softplus(2.0 * y);
}

}  // namespace detail

/// Sup over the k-th lower barrier at t = 0 minus u_hyp(2k): non-positive means
/// the lower cigar sits below the cusp where the blend starts.
inline double lower_barrier_gap(int k) {
  const auto bp = make_barrier_pair(k);
  return bp.lower_supremum() + std::log(2.0 * k);
}

/// Margins of the initial-data conditions on a LogPolar profile.
inline VerificationReport verify_initial_constraints(const RadialProfile& p, int k,
                                                     double tolerance = 1e-12) {
  if (p.chart != Chart::LogPolar) throw PreconditionError("verify_initial_constraints: LogPolar profile expected");
  const auto bp = make_barrier_pair(k);
  const double kk = k;
  ReportEntry hyp{"initial_hyperbolic_equality", "s in (0, 2k]", {p.time}};
  ReportEntry band_lo{"initial_band_lower", "s in [2k, 3k]", {p.time}};
  ReportEntry band_hi{"initial_band_upper", "s in [2k, 3k]", {p.time}};
  ReportEntry tail{"initial_lower_cigar_equality", "s in [3k, s_switch]", {p.time}};
  ReportEntry poin{"initial_poincare_bound", "all s", {p.time}};
  for (auto* e : {&hyp, &band_lo, &band_hi, &tail, &poin}) e->tolerance = tolerance;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double s = p.coords[i];
    const double u = p.values[i];
    if (s <= 2.0 * kk) hyp.record(std::abs(u + std::log(s)), s, p.time);
    if (s >= 2.0 * kk && s <= 3.0 * kk) {
      band_lo.record(bp.lower_at(s, 0.0) - u, s, p.time);
      band_hi.record(u - bp.upper_at(s, 0.0), s, p.time);
    }
    if (s >= 3.0 * kk) tail.record(std::abs(u - bp.lower_at(s, 0.0)), s, p.time);
    // -ln sinh s = -s - ln((1 - e^{-2s}) / 2)
    const double poincare = -s - std::log(-std::expm1(-2.0 * s) / 2.0);
    poin.record(poincare - u, s, p.time);
  }
  VerificationReport r;
  r.provenance = "initial data k=" + std::to_string(k);
  r.entries = {hyp, band_lo, band_hi, tail, poin};
  return r;
}

/// Build u_k(., 0) on the graded LogPolar grid plus the Cartesian cap.
/// Throws ConstructionError (naming the worst check) if the result violates
/// any initial-data condition.
inline InitialProfile build_initial_profile(const InitialDataSpec& spec) {
  spec.validate();
  const auto bp = make_barrier_pair(spec.k);
  const double kk = spec.k;
  const double sw = spec.interface();

  InitialProfile out;
  out.outer.chart = Chart::LogPolar;
  out.outer.coords = graded_grid(spec.s_min, sw, spec.ds, spec.grading);
  out.outer.values.reserve(out.outer.coords.size());
  for (double s : out.outer.coords) {
    double u = 0.0;
    if (s <= 2.0 * kk) {
      u = -std::log(s);
    } else if (s >= 3.0 * kk) {
      u = bp.lower_at(s, 0.0);
    } else {
      const double phi = detail::blend_weight(spec.blend, (s - 2.0 * kk) / kk);
      const double lo = bp.lower_at(s, 0.0);
      const double hi = bp.upper_at(s, 0.0);
      u = (1.0 - phi) * (-std::log(s)) + phi * lo;
      if (u < lo || u > hi) {
        u = std::clamp(u, lo, hi);
        ++out.clipped;
      }
    }
    out.outer.values.push_back(u);
  }

  out.cap.chart = Chart::CartesianRadial;
  out.cap.coords = uniform_radial_grid(std::exp(-sw), spec.cap_cells());
  out.cap.values.reserve(out.cap.coords.size());
  for (double r : out.cap.coords) out.cap.values.push_back(detail::lower_cap_value(bp.lower, r));
  out.cap.values.back() = out.outer.values.back() + out.outer.coords.back();

  const auto report = verify_initial_constraints(out.outer, spec.k);
  for (const auto& e : report.entries) {
    if (!e.passed()) {
      throw ConstructionError("initial data violates " + e.name + " by " +
                              std::to_string(e.max_violation) + " at s = " +
                              std::to_string(e.worst_coord));
    }
  }
  return out;
}

}  // namespace rfcusp
