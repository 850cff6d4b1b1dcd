#pragma once

// Coordinate charts on the disc and punctured disc, radial profiles of a
// conformal factor, and the finite-difference primitives that act on them.
//
// LogPolar:        z = exp(-(s + i theta)), s in (0, inf), metric e^{2u}(ds^2 + dtheta^2)
// CartesianRadial: r = |z| in [0, 1),      metric e^{2v}|dz|^2
// The two factors are related by u(s) = v(r) - s at r = e^{-s}.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "rfcusp/errors.hpp"

namespace rfcusp {

enum class Chart { LogPolar, CartesianRadial };

inline std::string_view to_string(Chart c) {
  return c == Chart::LogPolar ? "LogPolar" : "CartesianRadial";
}

inline Chart parse_chart(std::string_view name) {
  if (name == "LogPolar") return Chart::LogPolar;
  if (name == "CartesianRadial") return Chart::CartesianRadial;
  throw DomainError("unknown chart '" + std::string(name) + "'");
}

/// Log-polar coordinate of the circle |z| = r.
inline double s_from_r(double r) {
  if (!(r > 0.0) || r > 1.0) {
    throw DomainError("s_from_r: radius must lie in (0, 1], got " + std::to_string(r));
  }
  return -std::log(r);
}

inline double r_from_s(double s) {
  if (!(s >= 0.0) || !std::isfinite(s)) {
    throw DomainError("r_from_s: s must be finite and >= 0, got " + std::to_string(s));
  }
  return std::exp(-s);
}

/// Sampled conformal factor on a radial grid at a fixed time.
struct RadialProfile {
  Chart chart = Chart::LogPolar;
  std::vector<double> coords;
  std::vector<double> values;
  double time = 0.0;

  [[nodiscard]] std::size_t size() const noexcept { return coords.size(); }
  [[nodiscard]] bool empty() const noexcept { return coords.empty(); }

  /// Throws DomainError unless coords are strictly increasing, values finite
  /// and of matching length, and time >= 0.
  void validate() const {
    if (coords.size() != values.size()) {
      throw DomainError("RadialProfile: coords/values length mismatch");
    }
    if (!(time >= 0.0)) throw DomainError("RadialProfile: negative time");
    for (std::size_t i = 0; i < coords.size(); ++i) {
      if (!std::isfinite(coords[i]) || !std::isfinite(values[i])) {
        throw DomainError("RadialProfile: non-finite sample at index " + std::to_string(i));
      }
      if (i > 0 && !(coords[i] > coords[i - 1])) {
        throw DomainError("RadialProfile: coords not strictly increasing at index " +
                          std::to_string(i));
      }
    }
    if (chart == Chart::CartesianRadial && !coords.empty() && coords.front() < 0.0) {
      throw DomainError("RadialProfile: negative radius");
    }
  }
};

/// Re-express a profile in the other chart. Values shift by +/- s and the grid
/// is mapped (and reversed, so coords stay increasing).
inline RadialProfile convert_profile(const RadialProfile& p, Chart target) {
  if (p.chart == target) throw DomainError("convert_profile: target chart equals source chart");
  RadialProfile out;
  out.chart = target;
  out.time = p.time;
  const std::size_t n = p.size();
  out.coords.resize(n);
  out.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = n - 1 - i;
    if (target == Chart::CartesianRadial) {
      const double s = p.coords[i];
      if (!(s > 0.0)) throw DomainError("convert_profile: LogPolar coordinate must be > 0");
      out.coords[j] = r_from_s(s);
      out.values[j] = p.values[i] + s;
    } else {
      const double r = p.coords[i];
      if (!(r > 0.0)) {
        throw DomainError("convert_profile: grid contains r = 0, which has no LogPolar image");
      }
      const double s = s_from_r(r);
      out.coords[j] = s;
      out.values[j] = p.values[i] - s;
    }
  }
  return out;
}

namespace fd {

/// Three-point second derivative on an unequally spaced stencil.
inline double second_derivative(double hm, double hp, double um, double u0, double up) {
  return 2.0 * ((up - u0) / hp - (u0 - um) / hm) / (hp + hm);
}

/// Three-point central first derivative on an unequally spaced stencil.
inline double first_derivative(double hm, double hp, double um, double u0, double up) {
  return (hm * hm * up - hp * hp * um + (hp * hp - hm * hm) * u0) / (hp * hm * (hp + hm));
}

/// Weights (a_minus, a_zero, a_plus) of the LogPolar Laplacian d^2/ds^2.
struct Stencil {
  double minus = 0.0;
  double zero = 0.0;
  double plus = 0.0;
};

inline Stencil log_polar_laplacian(double hm, double hp) {
  const double sum = hm + hp;
  return {2.0 / (hm * sum), -2.0 / (hm * hp), 2.0 / (hp * sum)};
}

/// Weights of v_rr + v_r / r at an interior node r > 0.
inline Stencil radial_laplacian(double r, double hm, double hp) {
  const double sum = hm + hp;
  const Stencil d2{2.0 / (hm * sum), -2.0 / (hm * hp), 2.0 / (hp * sum)};
  const Stencil d1{-hp / (hm * sum), (hp - hm) / (hm * hp), hm / (hp * sum)};
  return {d2.minus + d1.minus / r, d2.zero + d1.zero / r, d2.plus + d1.plus / r};
}

/// Weights of the axisymmetric Laplacian at r = 0 using the reflected ghost
/// v(-h) = v(h): Laplacian = 2 v_rr = 4 (v_1 - v_0) / h^2.
inline Stencil radial_laplacian_origin(double h) {
  return {0.0, -4.0 / (h * h), 4.0 / (h * h)};
}

}  // namespace fd

/// Gauss curvature samples with an estimate of their floating-point noise.
struct CurvatureSamples {
  std::vector<double> coords;
  std::vector<double> values;
  /// Rounding-error bound of each sample: e^{-2u} times the cancellation error
  /// of the three-point Laplacian.
  std::vector<double> noise;

  [[nodiscard]] std::size_t size() const noexcept { return coords.size(); }
  /// True when the sample is not dominated by cancellation.
  [[nodiscard]] bool resolved(std::size_t i, double rel = 1e-3) const {
    return noise[i] <= rel * (1.0 + std::abs(values[i]));
  }
};

/// K = -e^{-2u} * Laplacian(u) at interior nodes (and at r = 0 for Cartesian
/// profiles whose grid starts at the origin).
inline CurvatureSamples gauss_curvature(const RadialProfile& p) {
  if (p.size() < 3) throw DomainError("gauss_curvature: need at least 3 grid points");
  constexpr double eps = std::numeric_limits<double>::epsilon();
  CurvatureSamples out;
  const auto& x = p.coords;
  const auto& u = p.values;
  const std::size_t n = p.size();
  auto push = [&](double coord, const fd::Stencil& w, double um, double u0, double up) {
    const double lap = w.minus * um + w.zero * u0 + w.plus * up;
    const double scale = std::exp(-2.0 * u0);
    const double mag = std::max({std::abs(um), std::abs(u0), std::abs(up)});
    const double cancel =
        4.0 * eps * mag * (std::abs(w.minus) + std::abs(w.zero) + std::abs(w.plus));
    out.coords.push_back(coord);
    out.values.push_back(-scale * lap);
    out.noise.push_back(scale * cancel);
  };
  if (p.chart == Chart::CartesianRadial && x.front() == 0.0) {
    push(0.0, fd::radial_laplacian_origin(x[1]), u[1], u[0], u[1]);
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double hm = x[i] - x[i - 1];
    const double hp = x[i + 1] - x[i];
    const fd::Stencil w = p.chart == Chart::LogPolar ? fd::log_polar_laplacian(hm, hp)
                                                     : fd::radial_laplacian(x[i], hm, hp);
    push(x[i], w, u[i - 1], u[i], u[i + 1]);
  }
  return out;
}

/// LogPolar grid on [s_min, s_max]. Next to the disc boundary the spacing
/// grows geometrically from s_min * (grading - 1) by the factor `grading`
/// until it reaches ds; that zone is stretched by at most one cell so it ends
/// on a multiple of ds, and from there nodes sit at integer multiples of ds
/// (so integer-valued s such as k, 2k, 3k are nodes when 1/ds is an integer).
/// The last node is exactly s_max.
inline std::vector<double> graded_grid(double s_min, double s_max, double ds, double grading) {
  if (!(s_min > 0.0) || !(s_max > s_min) || !(ds > 0.0) || !(grading > 1.0)) {
    throw ConstructionError("graded_grid: need 0 < s_min < s_max, ds > 0, grading > 1");
  }
  std::vector<double> offsets{0.0};
  for (double h = s_min * (grading - 1.0); h < ds; h *= grading) offsets.push_back(offsets.back() + h);
  const double span = offsets.back();
  auto m = static_cast<long long>(std::ceil((s_min + span) / ds - 1e-9));
  const double stretch = span > 0.0 ? (static_cast<double>(m) * ds - s_min) / span : 1.0;
  std::vector<double> s;
  for (double o : offsets) s.push_back(o == span ? static_cast<double>(m) * ds : s_min + stretch * o);
  if (span == 0.0) s.assign(1, s_min);
  for (++m;; ++m) {
    const double next = static_cast<double>(m) * ds;
    if (next > s_max) break;
    s.push_back(next);
  }
  while (s.size() > 1 && s.back() > s_max - 0.25 * std::min(ds, s.back() * (grading - 1.0))) s.pop_back();
  s.push_back(s_max);
  return s;
}

/// n + 1 equally spaced nodes on [a, b], endpoints exact.
inline std::vector<double> uniform_grid(double a, double b, std::size_t n) {
  if (!(b > a) || n < 2) throw ConstructionError("uniform_grid: need a < b and n >= 2");
  std::vector<double> x(n + 1);
  for (std::size_t i = 0; i <= n; ++i) x[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n);
  x[n] = b;
  return x;
}

/// Uniform radial grid 0 = r_0 < ... < r_n = r_max.
inline std::vector<double> uniform_radial_grid(double r_max, std::size_t n) {
  if (!(r_max > 0.0) || n < 2) throw ConstructionError("uniform_radial_grid: need r_max > 0, n >= 2");
  std::vector<double> r(n + 1);
  for (std::size_t j = 0; j <= n; ++j) r[j] = r_max * static_cast<double>(j) / static_cast<double>(n);
  r[n] = r_max;
  return r;
}

/// Index of the grid node equal to x (within a relative 1e-9), or npos.
inline std::size_t find_node(const std::vector<double>& grid, double x) {
  auto it = std::lower_bound(grid.begin(), grid.end(), x - 1e-9 * std::max(1.0, std::abs(x)));
  if (it != grid.end() && std::abs(*it - x) <= 1e-9 * std::max(1.0, std::abs(x))) {
    return static_cast<std::size_t>(it - grid.begin());
  }
  return static_cast<std::size_t>(-1);
}

/// Piecewise-linear interpolation of a profile at x (x inside the grid).
inline double interpolate(const RadialProfile& p, double x) {
  const auto& c = p.coords;
  if (c.empty() || x < c.front() || x > c.back()) {
    throw DomainError("interpolate: point outside profile grid");
  }
  auto it = std::upper_bound(c.begin(), c.end(), x);
  if (it == c.end()) return p.values.back();
  const auto i = static_cast<std::size_t>(it - c.begin());
  if (i == 0) return p.values.front();
  const double w = (x - c[i - 1]) / (c[i] - c[i - 1]);
  return (1.0 - w) * p.values[i - 1] + w * p.values[i];
}

// ---- CSV ---------------------------------------------------------------------
//
// One profile block:
//   chart,time
//   LogPolar,5.00000000000000000e-01
//   coord,value
//   <coord>,<value>      (17 significant digits)
// A file may hold several blocks back to back.

inline void write_profile_csv(std::ostream& os, const RadialProfile& p) {
  os << "chart,time\n" << to_string(p.chart) << ',' << std::setprecision(17)
     << std::scientific << p.time << "\ncoord,value\n";
  for (std::size_t i = 0; i < p.size(); ++i) {
    os << p.coords[i] << ',' << p.values[i] << '\n';
  }
  os << std::defaultfloat;
}

inline std::vector<RadialProfile> read_profile_csv(std::istream& is) {
  std::vector<RadialProfile> blocks;
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& what) {
    throw DomainError("profile csv line " + std::to_string(lineno) + ": " + what);
  };
  auto split = [](const std::string& l, std::string& a, std::string& b) {
    const auto comma = l.find(',');
    if (comma == std::string::npos) return false;
    a = l.substr(0, comma);
    b = l.substr(comma + 1);
    return true;
  };
  auto to_double = [&](const std::string& txt) {
    std::size_t used = 0;
    double val = 0.0;
    try {
      val = std::stod(txt, &used);
    } catch (const std::exception&) {
      fail("not a number: '" + txt + "'");
    }
    if (used != txt.size()) fail("trailing characters in '" + txt + "'");
    return val;
  };
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::string a, b;
    if (line == "chart,time") {
      if (!std::getline(is, line)) fail("missing chart/time row");
      ++lineno;
      if (!split(line, a, b)) fail("malformed chart/time row");
      RadialProfile p;
      p.chart = parse_chart(a);
      p.time = to_double(b);
      if (!std::getline(is, line) || (++lineno, line != "coord,value")) fail("expected 'coord,value'");
      blocks.push_back(std::move(p));
      continue;
    }
    if (blocks.empty()) fail("data before header");
    if (!split(line, a, b)) fail("malformed data row");
    blocks.back().coords.push_back(to_double(a));
    blocks.back().values.push_back(to_double(b));
  }
  for (const auto& p : blocks) p.validate();
  return blocks;
}

}  // namespace rfcusp
