#pragma once

// Implicit solver for the conformal flow u_t = e^{-2u} u_ss on a LogPolar grid,
// optionally coupled at s_switch to a Cartesian cap carrying
// v_t = e^{-2v} (v_rr + v_r / r) down to the origin.
//
// Time stepping uses the conservative form
//   (e^{2w_new} - e^{2w_old}) / (2 dt) = theta L(w_new) + (1 - theta) L(w_old),
// whose Jacobian is an M-matrix for every state and step size. With
// theta = 1 the step map is order preserving.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rfcusp/charts.hpp"
#include "rfcusp/closed_forms.hpp"
#include "rfcusp/errors.hpp"
#include "rfcusp/tridiagonal.hpp"

namespace rfcusp {

enum class Scheme { BackwardEuler, CrankNicolson };

inline std::string_view to_string(Scheme s) {
  return s == Scheme::BackwardEuler ? "backward_euler" : "crank_nicolson";
}

inline Scheme parse_scheme(std::string_view name) {
  if (name == "backward_euler" || name == "be") return Scheme::BackwardEuler;
  if (name == "crank_nicolson" || name == "cn") return Scheme::CrankNicolson;
  throw ConfigError("unknown scheme '" + std::string(name) +
                    "' (expected backward_euler or crank_nicolson)");
}

/// Dirichlet data at s_min.
///   DilatingHyperbolic: -ln s_min + 1/2 ln(1+2t), the common asymptote of the
///     two sandwich bounds;
///   PoincareSandwich / AnnulusSandwich: the lower / upper sandwich bound
///     itself, for bias studies;
///   ClosedForm: s_min, and the right grid end when there is no cap, follow
///     SolverConfig::boundary_metric (test harness).
enum class BoundaryKind { DilatingHyperbolic, PoincareSandwich, AnnulusSandwich, ClosedForm };

inline std::string_view to_string(BoundaryKind b) {
  switch (b) {
    case BoundaryKind::DilatingHyperbolic: return "dilating_hyperbolic";
    case BoundaryKind::PoincareSandwich: return "poincare_sandwich";
    case BoundaryKind::AnnulusSandwich: return "annulus_sandwich";
    case BoundaryKind::ClosedForm: return "closed_form";
  }
  return "?";
}

inline BoundaryKind parse_boundary(std::string_view name) {
  if (name == "dilating_hyperbolic") return BoundaryKind::DilatingHyperbolic;
  if (name == "poincare_sandwich") return BoundaryKind::PoincareSandwich;
  if (name == "annulus_sandwich") return BoundaryKind::AnnulusSandwich;
  if (name == "closed_form") return BoundaryKind::ClosedForm;
  throw ConfigError("unknown boundary condition '" + std::string(name) + "'");
}

struct SolverConfig {
  double s_min = 0.05;
  /// k of the flow; sets the annulus eps = e^{-2k} of the sandwich bounds.
  int k = 10;
  double dt_init = 1e-6;
  double dt_max = 0.01;
  /// Fraction of du_max a step may move any node, judged by the last rate.
  double safety = 0.5;
  double du_max = 0.05;
  /// Converged steps this short are accepted whatever they change. Non-smooth
  /// initial data relaxes on time scales near e^{2u} h^2, which can be far
  /// below any useful step where the metric is tiny.
  double dt_floor = 1e-10;
  double newton_tol = 1e-10;
  int newton_max_iter = 30;
  Scheme scheme = Scheme::BackwardEuler;
  BoundaryKind boundary = BoundaryKind::DilatingHyperbolic;
  std::optional<ClosedFormMetric> boundary_metric;

  void validate() const {
    if (!(dt_init > 0.0) || !(dt_max >= dt_init)) throw ConfigError("need 0 < dt_init <= dt_max");
    if (!(safety > 0.0) || !(du_max > 0.0)) throw ConfigError("safety and du_max must be > 0");
    if (!(dt_floor >= 1e-12) || !(dt_floor <= dt_init)) throw ConfigError("need 1e-12 <= dt_floor <= dt_init");
    if (!(newton_tol > 0.0) || newton_max_iter < 1) throw ConfigError("Newton tolerance must be > 0");
    if (boundary == BoundaryKind::ClosedForm) {
      if (!boundary_metric) throw ConfigError("closed_form boundary needs a boundary metric");
    } else {
      if (!(s_min > 0.0 && s_min <= 0.1)) throw ConfigError("s_min must lie in (0, 0.1]");
      if (k < 1) throw ConfigError("k must be >= 1");
    }
  }
};

struct BoundaryValues {
  double left = 0.0;
  /// Present only when the right end is Dirichlet (no cap).
  std::optional<double> right;
  /// Width of the sandwich between the two barrier bounds at s_min.
  double uncertainty = 0.0;
};

/// Gap between the annulus (eps = e^{-2k}) and Poincare factors at s_min. Both
/// carry the same 1/2 ln(1+2t) dilation, so the gap is time independent.
inline double bc_uncertainty(double s_min, int k) {
  const auto eps = std::exp(-2.0 * k);
  return eval(metric::HyperbolicAnnulus{eps}, s_min, 0.0) - eval(metric::Poincare{}, s_min, 0.0);
}

/// Boundary data at time t. `right_coord` is the right grid end, used only by
/// the ClosedForm harness.
inline BoundaryValues boundary_values(const SolverConfig& cfg, double t,
                                      double right_coord = std::numeric_limits<double>::quiet_NaN()) {
  if (!(t >= 0.0)) throw DomainError("boundary_values: negative time");
  BoundaryValues b;
  const double lift = 0.5 * std::log1p(2.0 * t);
  switch (cfg.boundary) {
    case BoundaryKind::DilatingHyperbolic:
      b.left = -std::log(cfg.s_min) + lift;
      break;
    case BoundaryKind::PoincareSandwich:
      b.left = eval(metric::Poincare{}, cfg.s_min, 0.0) + lift;
      break;
    case BoundaryKind::AnnulusSandwich:
      b.left = eval(metric::HyperbolicAnnulus{std::exp(-2.0 * cfg.k)}, cfg.s_min, 0.0) + lift;
      break;
    case BoundaryKind::ClosedForm:
      if (!cfg.boundary_metric) throw ConfigError("closed_form boundary needs a boundary metric");
      b.left = eval(*cfg.boundary_metric, cfg.s_min, t);
      if (!std::isnan(right_coord)) b.right = eval(*cfg.boundary_metric, right_coord, t);
      return b;
    default:
      throw ConfigError("unknown boundary condition tag");
  }
  b.uncertainty = bc_uncertainty(cfg.s_min, cfg.k);
  return b;
}

/// Solution at one time: LogPolar part on [s_min, s_switch] and, optionally,
/// the Cartesian cap on [0, e^{-s_switch}]. The two share the interface node.
struct FlowState {
  RadialProfile outer;
  RadialProfile cap;

  [[nodiscard]] double time() const { return outer.time; }
  [[nodiscard]] bool has_cap() const { return !cap.empty(); }
};

using Snapshot = FlowState;

struct StepResult {
  bool accepted = false;
  FlowState state;
  int newton_iterations = 0;
  /// max |w_new - w_old| over all unknowns.
  double max_change = 0.0;
  std::string reason;
};

namespace detail {

/// One row of the discrete operator in unknown ordering:
/// L_p(w) = lo w_{p-1} + di w_p + up w_{p+1} + offset.
struct OperatorRow {
  double lo = 0.0;
  double di = 0.0;
  double up = 0.0;
  double offset = 0.0;
  bool dirichlet = false;
};

/// Composite grid flattened to [u_0 .. u_M, vt_{N-1} .. vt_0], where
/// vt = v - s_switch lives on rho = r / r_N in [0, 1]. In these variables the
/// cap equation reads vt_t = e^{-2 vt} (vt_rr + vt_r / rho) with O(1) factors.
struct Layout {
  std::size_t m = 0;  // outer nodes
  std::size_t n = 0;  // cap cells N (cap nodes 0..N, node N is the interface)
  double s_switch = 0.0;
  std::vector<OperatorRow> rows;

  [[nodiscard]] std::size_t size() const { return rows.size(); }
};

inline Layout make_layout(const FlowState& st) {
  Layout L;
  const auto& s = st.outer.coords;
  L.m = s.size();
  if (L.m < 3) throw PreconditionError("solver: outer grid needs at least 3 nodes");
  L.s_switch = s.back();
  const bool cap = st.has_cap();
  if (cap) {
    if (st.cap.size() < 3 || st.cap.coords.front() != 0.0) {
      throw PreconditionError("solver: cap grid must start at r = 0 with at least 3 nodes");
    }
    L.n = st.cap.size() - 1;
  }
  L.rows.resize(L.m + L.n);
  L.rows[0].dirichlet = true;
  for (std::size_t i = 1; i + 1 < L.m; ++i) {
    const auto w = fd::log_polar_laplacian(s[i] - s[i - 1], s[i + 1] - s[i]);
    L.rows[i] = {w.minus, w.zero, w.plus, 0.0, false};
  }
  if (!cap) {
    L.rows[L.m - 1].dirichlet = true;
    return L;
  }
  const double rn = st.cap.coords.back();
  std::vector<double> rho(L.n + 1);
  for (std::size_t j = 0; j <= L.n; ++j) rho[j] = st.cap.coords[j] / rn;
  rho[L.n] = 1.0;
  // Interface: the right neighbour of u_M is cap node N-1 seen in s.
  {
    const double hm = s[L.m - 1] - s[L.m - 2];
    const double hp = -std::log(rho[L.n - 1]);
    const auto w = fd::log_polar_laplacian(hm, hp);
    // u at that node is vt_{N-1} + ln rho_{N-1}.
    L.rows[L.m - 1] = {w.minus, w.zero, w.plus, w.plus * std::log(rho[L.n - 1]), false};
  }
  for (std::size_t j = L.n; j-- > 0;) {
    const std::size_t p = L.m + (L.n - 1 - j);
    if (j == 0) {
      const auto w = fd::radial_laplacian_origin(rho[1]);
      L.rows[p] = {w.plus, w.zero, 0.0, 0.0, false};
    } else {
      const auto w = fd::radial_laplacian(rho[j], rho[j] - rho[j - 1], rho[j + 1] - rho[j]);
      // Unknown ordering runs outward-to-inward: p-1 is node j+1, p+1 is j-1.
      L.rows[p] = {w.plus, w.zero, w.minus, 0.0, false};
    }
  }
  return L;
}

inline std::vector<double> pack(const Layout& L, const FlowState& st) {
  std::vector<double> w(L.size());
  for (std::size_t i = 0; i < L.m; ++i) w[i] = st.outer.values[i];
  for (std::size_t j = 0; j < L.n; ++j) w[L.m + (L.n - 1 - j)] = st.cap.values[j] - L.s_switch;
  return w;
}

inline void unpack(const Layout& L, const std::vector<double>& w, FlowState& st) {
  for (std::size_t i = 0; i < L.m; ++i) st.outer.values[i] = w[i];
  if (L.n == 0) return;
  for (std::size_t j = 0; j < L.n; ++j) st.cap.values[j] = w[L.m + (L.n - 1 - j)] + L.s_switch;
  st.cap.values[L.n] = w[L.m - 1] + L.s_switch;
}

inline double apply_row(const OperatorRow& r, const std::vector<double>& w, std::size_t p) {
  double y = r.di * w[p] + r.offset;
  if (p > 0) y += r.lo * w[p - 1];
  if (p + 1 < w.size()) y += r.up * w[p + 1];
  return y;
}

}  // namespace detail

/// One implicit step of size dt. Never throws on Newton failure; the result
/// carries accepted = false and the reason instead.
inline StepResult step(const FlowState& state, double dt, const SolverConfig& cfg) {
  if (!(dt > 0.0)) throw DomainError("step: dt must be > 0");
  if (cfg.boundary != BoundaryKind::ClosedForm &&
      std::abs(state.outer.coords.front() - cfg.s_min) > 1e-12 * cfg.s_min) {
    throw PreconditionError("step: grid starts at s = " + std::to_string(state.outer.coords.front()) +
                            " but config has s_min = " + std::to_string(cfg.s_min));
  }
  const auto L = detail::make_layout(state);
  const std::size_t n = L.size();
  const double t_new = state.time() + dt;
  const double theta = cfg.scheme == Scheme::BackwardEuler ? 1.0 : 0.5;
  const auto bc = boundary_values(cfg, t_new, state.has_cap() ? std::numeric_limits<double>::quiet_NaN()
                                                               : state.outer.coords.back());

  const auto w_old = detail::pack(L, state);
  std::vector<double> rhs_old(n, 0.0);  // e^{2 w_old} / (2 dt) + (1-theta) L(w_old)
  for (std::size_t p = 0; p < n; ++p) {
    if (L.rows[p].dirichlet) continue;
    rhs_old[p] = std::exp(2.0 * w_old[p]) / (2.0 * dt);
    if (theta < 1.0) rhs_old[p] += (1.0 - theta) * detail::apply_row(L.rows[p], w_old, p);
  }

  StepResult res;
  std::vector<double> w = w_old;
  w[0] = bc.left;
  if (L.n == 0) w[L.m - 1] = bc.right.value_or(w_old[L.m - 1]);
  std::vector<double> lo(n), di(n), up(n), g(n);
  bool converged = false;
  for (int it = 0; it < cfg.newton_max_iter; ++it) {
    res.newton_iterations = it + 1;
    for (std::size_t p = 0; p < n; ++p) {
      const auto& r = L.rows[p];
      if (r.dirichlet) {
        lo[p] = up[p] = 0.0;
        di[p] = 1.0;
        g[p] = 0.0;
        continue;
      }
      const double e2w = std::exp(2.0 * w[p]);
      g[p] = -(e2w / (2.0 * dt) - theta * detail::apply_row(r, w, p) - rhs_old[p]);
      di[p] = e2w / dt - theta * r.di;
      lo[p] = -theta * r.lo;
      up[p] = -theta * r.up;
    }
    solve_tridiagonal(lo, di, up, g);
    double dmax = 0.0;
    for (double d : g) dmax = std::max(dmax, std::abs(d));
    if (!std::isfinite(dmax)) {
      res.reason = "Newton update not finite";
      return res;
    }
    // Damp large corrections; the exponential nonlinearity overshoots from above.
    const double scale = dmax > 1.0 ? 1.0 / dmax : 1.0;
    for (std::size_t p = 0; p < n; ++p) w[p] += scale * g[p];
    if (dmax <= cfg.newton_tol) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    res.reason = "Newton did not converge in " + std::to_string(cfg.newton_max_iter) + " iterations";
    return res;
  }
  for (std::size_t p = 0; p < n; ++p) {
    if (!std::isfinite(w[p])) {
      res.reason = "non-finite value after Newton";
      return res;
    }
    res.max_change = std::max(res.max_change, std::abs(w[p] - w_old[p]));
  }
  res.state = state;
  res.state.outer.time = t_new;
  if (state.has_cap()) res.state.cap.time = t_new;
  detail::unpack(L, w, res.state);
  res.accepted = true;
  return res;
}

struct SolverStats {
  long long steps = 0;
  long long newton_iterations = 0;
  long long rejected_steps = 0;
  double min_dt = std::numeric_limits<double>::infinity();
  double max_dt = 0.0;
  double bc_uncertainty = 0.0;
};

struct FlowTrajectory {
  std::vector<Snapshot> snapshots;
  SolverStats stats;

  [[nodiscard]] std::vector<double> times() const {
    std::vector<double> t;
    t.reserve(snapshots.size());
    for (const auto& s : snapshots) t.push_back(s.time());
    return t;
  }

  [[nodiscard]] bool has_time(double t) const {
    return std::any_of(snapshots.begin(), snapshots.end(),
                       [&](const auto& s) { return std::abs(s.time() - t) <= 1e-12; });
  }

  /// Snapshot at exactly time t; PreconditionError if it was not recorded.
  [[nodiscard]] const Snapshot& at(double t) const {
    for (const auto& s : snapshots) {
      if (std::abs(s.time() - t) <= 1e-12) return s;
    }
    throw PreconditionError("trajectory has no snapshot at t = " + std::to_string(t));
  }
};

/// Hard solver failure. Carries the trajectory recorded so far and the last
/// accepted state.
class SolverFailure : public std::runtime_error {
 public:
  SolverFailure(const std::string& what, FlowTrajectory partial, FlowState last_good)
      : std::runtime_error(what), partial_(std::move(partial)), last_good_(std::move(last_good)) {}

  [[nodiscard]] const FlowTrajectory& partial() const { return partial_; }
  [[nodiscard]] const FlowState& last_good() const { return last_good_; }

 private:
  FlowTrajectory partial_;
  FlowState last_good_;
};

/// Times every cusp run records: {0, 1/100, 1/2, 3/4, 1, t_end} merged with
/// `extra`, clipped to [0, t_end], sorted and deduplicated.
inline std::vector<double> standard_snapshot_times(double t_end, const std::vector<double>& extra = {}) {
  std::vector<double> t{0.0, 0.01, 0.5, 0.75, 1.0, t_end};
  t.insert(t.end(), extra.begin(), extra.end());
  std::erase_if(t, [&](double x) { return x < 0.0 || x > t_end; });
  std::sort(t.begin(), t.end());
  t.erase(std::unique(t.begin(), t.end(), [](double a, double b) { return std::abs(a - b) <= 1e-12; }),
          t.end());
  return t;
}

/// Adaptive integration from initial.time() to t_end, landing exactly on each
/// snapshot time.
inline FlowTrajectory evolve(const FlowState& initial, const SolverConfig& cfg, double t_end,
                             std::vector<double> snapshot_times) {
  cfg.validate();
  initial.outer.validate();
  if (initial.has_cap()) initial.cap.validate();
  const double t0 = initial.time();
  if (!(t_end >= t0)) throw PreconditionError("evolve: t_end before initial time");
  if (!std::is_sorted(snapshot_times.begin(), snapshot_times.end())) {
    throw PreconditionError("evolve: snapshot times must be sorted");
  }
  for (double t : snapshot_times) {
    if (t < t0 - 1e-12 || t > t_end + 1e-12) {
      throw PreconditionError("evolve: snapshot time " + std::to_string(t) + " outside [t0, t_end]");
    }
  }

  FlowTrajectory traj;
  if (cfg.boundary != BoundaryKind::ClosedForm) traj.stats.bc_uncertainty = bc_uncertainty(cfg.s_min, cfg.k);
  FlowState cur = initial;
  std::size_t next = 0;
  auto record_due = [&]() {
    while (next < snapshot_times.size() && std::abs(snapshot_times[next] - cur.time()) <= 1e-12) {
      if (traj.snapshots.empty() || traj.snapshots.back().time() < cur.time()) {
        FlowState snap = cur;
        snap.outer.time = snapshot_times[next];
        if (snap.has_cap()) snap.cap.time = snapshot_times[next];
        traj.snapshots.push_back(std::move(snap));
      }
      ++next;
    }
  };
  record_due();

  double dt = cfg.dt_init;
  while (next < snapshot_times.size()) {
    const double target = snapshot_times[next];
    const double remaining = target - cur.time();
    // Land on the snapshot rather than leave a sliver shorter than dt / 10.
    const bool landing = remaining - dt < 0.1 * dt;
    const double h = landing ? remaining : dt;
    const auto r = step(cur, h, cfg);
    traj.stats.newton_iterations += r.newton_iterations;
    if (!r.accepted || (r.max_change > 2.0 * cfg.du_max && h > cfg.dt_floor)) {
      ++traj.stats.rejected_steps;
      dt = r.accepted ? std::max(0.5 * h, cfg.dt_floor) : 0.5 * h;
      if (dt < 1e-12) {
        throw SolverFailure("time step fell below 1e-12 at t = " + std::to_string(cur.time()) +
                                (r.accepted ? " (change limit)" : " (" + r.reason + ")"),
                            traj, cur);
      }
      continue;
    }
    ++traj.stats.steps;
    traj.stats.min_dt = std::min(traj.stats.min_dt, h);
    traj.stats.max_dt = std::max(traj.stats.max_dt, h);
    const double rate = r.max_change / h;
    double grown = std::min(1.5 * h, cfg.dt_max);
    if (rate > 0.0) grown = std::min(grown, cfg.safety * cfg.du_max / rate);
    cur = r.state;
    if (landing) {
      // Snap to the exact snapshot time; do not let a short landing step
      // throttle the next one.
      cur.outer.time = target;
      if (cur.has_cap()) cur.cap.time = target;
      dt = std::max(grown, std::min(dt, cfg.dt_max));
      if (rate > 0.0) dt = std::min(dt, cfg.safety * cfg.du_max / rate);
    } else {
      dt = grown;
    }
    dt = std::max(dt, cfg.dt_floor);
    record_due();
  }
  if (traj.stats.steps == 0) traj.stats.min_dt = 0.0;
  return traj;
}

}  // namespace rfcusp
