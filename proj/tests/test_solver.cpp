#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "rfcusp/closed_forms.hpp"
#include "rfcusp/initial_data.hpp"
#include "rfcusp/solver.hpp"

using namespace rfcusp;

namespace {

SolverConfig closed_form_config(const ClosedFormMetric& m, double s_lo, Scheme scheme = Scheme::CrankNicolson) {
  SolverConfig cfg;
  cfg.boundary = BoundaryKind::ClosedForm;
  cfg.boundary_metric = m;
  cfg.scheme = scheme;
  cfg.s_min = s_lo;
  return cfg;
}

// Fixed steps dt = c h: du_max is large enough that the change limiter never acts.
SolverConfig fixed_step(SolverConfig cfg, double dt) {
  cfg.dt_init = cfg.dt_max = dt;
  cfg.dt_floor = std::min(cfg.dt_floor, dt);
  cfg.du_max = 1e9;
  return cfg;
}

double sup_error(const Snapshot& snap, const std::function<double(double)>& exact) {
  double e = 0.0;
  for (std::size_t i = 0; i < snap.outer.size(); ++i) {
    e = std::max(e, std::abs(snap.outer.values[i] - exact(snap.outer.coords[i])));
  }
  return e;
}

double dilation_error(std::size_t cells, double dt, double t_end) {
  const auto m = make_scaled(metric::HyperbolicPunctured{});
  const auto cfg = fixed_step(closed_form_config(m, 0.1), dt);
  const auto grid = uniform_grid(0.1, 5.0, cells);
  const auto tr = evolve(FlowState{sample(m, grid, 0.0), {}}, cfg, t_end, {0.0, t_end});
  return sup_error(tr.snapshots.back(), [&](double s) { return -std::log(s) + 0.5 * std::log1p(2.0 * t_end); });
}

}  // namespace

TEST(Solver, SolitonTranslates) {
  const auto m = make_cigar(1.0, 0.0);
  const auto grid = uniform_grid(-10.0, 10.0, 800);
  const auto tr = evolve(FlowState{sample(m, grid, 0.0), {}}, closed_form_config(m, -10.0), 0.1, {0.0, 0.1});
  ASSERT_EQ(tr.snapshots.size(), 2u);
  const double err = sup_error(tr.snapshots.back(), [](double s) { return cigar_profile(s + 0.2); });
  EXPECT_LE(err, 1e-3);
}

TEST(Solver, DilatingHyperbolicOracle) {
  const auto m = make_scaled(metric::HyperbolicPunctured{});
  // d/dt of 1/2 ln(1+2t) equals e^{2 ln s} / s^2 / (1+2t): the closed form solves the flow.
  for (double s : {0.1, 1.0, 4.0}) {
    const double t = 0.3;
    const double u = -std::log(s) + 0.5 * std::log1p(2 * t);
    EXPECT_NEAR(1.0 / (1.0 + 2.0 * t), std::exp(-2.0 * u) / (s * s), 1e-14);
  }
  const auto grid = uniform_grid(0.1, 5.0, 400);
  for (Scheme sc : {Scheme::CrankNicolson, Scheme::BackwardEuler}) {
    auto cfg = closed_form_config(m, 0.1, sc);
    if (sc == Scheme::BackwardEuler) cfg.du_max = 0.002;
    const auto tr = evolve(FlowState{sample(m, grid, 0.0), {}}, cfg, 0.5, {0.0, 0.5});
    const double err = sup_error(tr.snapshots.back(), [](double s) { return -std::log(s) + 0.5 * std::log(2.0); });
    EXPECT_LE(err, 1e-3) << to_string(sc);
  }
}

TEST(Solver, SecondOrderUnderRefinement) {
  const double e1 = dilation_error(200, 0.2 * 4.9 / 200, 0.5);
  const double e2 = dilation_error(400, 0.2 * 4.9 / 400, 0.5);
  const double e3 = dilation_error(800, 0.2 * 4.9 / 800, 0.5);
  EXPECT_NEAR(e1 / e2, 4.0, 0.5);
  EXPECT_NEAR(e2 / e3, 4.0, 0.3);
}

TEST(Solver, ConstantCapIsStationary) {
  const double c = -0.75;
  const metric::Flat flat{c};
  const auto outer = sample(flat, uniform_grid(1.0, 3.0, 40), 0.0);
  RadialProfile cap{Chart::CartesianRadial, uniform_radial_grid(std::exp(-3.0), 20), {}, 0.0};
  cap.values.assign(cap.size(), c);
  cap.coords.back() = std::exp(-outer.coords.back());
  const FlowState st{outer, cap};
  for (Scheme sc : {Scheme::BackwardEuler, Scheme::CrankNicolson}) {
    const auto tr = evolve(st, closed_form_config(flat, 1.0, sc), 0.5, {0.0, 0.5});
    const auto& f = tr.snapshots.back();
    for (std::size_t i = 0; i < f.outer.size(); ++i) EXPECT_NEAR(f.outer.values[i], outer.values[i], 1e-11);
    for (double v : f.cap.values) EXPECT_NEAR(v, c, 1e-11);
  }
}

TEST(Solver, CapMatchesExactCigar) {
  // Whole-plane cigar split at s = 2 into a LogPolar strip and a Cartesian cap.
  const auto m = make_cigar(1.0, 1.0);
  const auto outer = sample(m, uniform_grid(-3.0, 2.0, 200), 0.0);
  RadialProfile cap{Chart::CartesianRadial, uniform_radial_grid(std::exp(-2.0), 40), {}, 0.0};
  for (double r : cap.coords) {
    const double s = r > 0.0 ? -std::log(r) : 50.0;
    cap.values.push_back(eval(m, s, 0.0) + s);
  }
  const double t_end = 0.2;
  const auto tr = evolve(FlowState{outer, cap}, closed_form_config(m, -3.0), t_end, {0.0, t_end});
  const auto& f = tr.snapshots.back();
  EXPECT_LE(sup_error(f, [&](double s) { return eval(m, s, t_end); }), 2e-3);
  for (std::size_t j = 1; j < f.cap.size(); ++j) {
    const double s = -std::log(f.cap.coords[j]);
    EXPECT_NEAR(f.cap.values[j], eval(m, s, t_end) + s, 2e-3);
  }
}

TEST(Solver, BackwardEulerPreservesOrder) {
  const auto m = make_scaled(metric::HyperbolicPunctured{});
  const auto grid = uniform_grid(0.1, 5.0, 200);
  auto lo = sample(m, grid, 0.0);
  auto hi = lo;
  for (std::size_t i = 1; i + 1 < hi.size(); ++i) hi.values[i] += 0.3 * std::sin(std::numbers::pi * i / hi.size());
  const auto cfg = fixed_step(closed_form_config(m, 0.1, Scheme::BackwardEuler), 1e-3);
  const auto a = evolve(FlowState{lo, {}}, cfg, 0.3, {0.0, 0.1, 0.3});
  const auto b = evolve(FlowState{hi, {}}, cfg, 0.3, {0.0, 0.1, 0.3});
  for (double t : {0.1, 0.3}) {
    const auto& x = a.at(t).outer;
    const auto& y = b.at(t).outer;
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_GE(y.values[i], x.values[i] - 1e-12);
  }
}

TEST(Solver, ZeroDurationKeepsInitialSnapshot) {
  InitialDataSpec spec;
  const auto ip = build_initial_profile(spec);
  const auto tr = evolve(FlowState{ip.outer, ip.cap}, SolverConfig{}, 0.0, standard_snapshot_times(0.0));
  ASSERT_EQ(tr.snapshots.size(), 1u);
  EXPECT_EQ(tr.snapshots[0].outer.values, ip.outer.values);
  EXPECT_EQ(tr.stats.steps, 0);
}

TEST(Solver, CuspRunCompletesWithinBudget) {
  InitialDataSpec spec;
  const auto ip = build_initial_profile(spec);
  const auto times = standard_snapshot_times(1.5);
  const auto tr = evolve(FlowState{ip.outer, ip.cap}, SolverConfig{}, 1.5, times);
  EXPECT_EQ(tr.snapshots.size(), times.size());
  EXPECT_LE(tr.stats.steps, 1000000);
  EXPECT_EQ(tr.snapshots.back().time(), 1.5);
  for (const auto& s : tr.snapshots) {
    for (double u : s.outer.values) ASSERT_TRUE(std::isfinite(u));
  }
}

TEST(Boundary, DilatingHyperbolicValues) {
  SolverConfig cfg;
  EXPECT_NEAR(boundary_values(cfg, 0.0).left, -std::log(0.05), 1e-15);
  EXPECT_NEAR(boundary_values(cfg, 0.5).left, -std::log(0.05) + 0.5 * std::log(2.0), 1e-15);
  EXPECT_FALSE(boundary_values(cfg, 0.5).right.has_value());
}

TEST(Boundary, SandwichWidth) {
  const int k = 10;
  const double s = 0.05;
  const double annulus = -std::log(2.0 * k / std::numbers::pi * std::sin(s * std::numbers::pi / (2.0 * k)));
  const double poincare = -std::log(std::sinh(s));
  SolverConfig cfg;
  EXPECT_NEAR(boundary_values(cfg, 0.7).uncertainty, annulus - poincare, 1e-12);
  EXPECT_GT(annulus - poincare, 0.0);
  cfg.boundary = BoundaryKind::PoincareSandwich;
  EXPECT_NEAR(boundary_values(cfg, 0.0).left, poincare, 1e-14);
  cfg.boundary = BoundaryKind::AnnulusSandwich;
  EXPECT_NEAR(boundary_values(cfg, 0.0).left, annulus, 1e-12);
}

TEST(Solver, ConfigValidation) {
  SolverConfig cfg;
  cfg.dt_init = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.s_min = 0.2;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.boundary = BoundaryKind::ClosedForm;
  EXPECT_THROW(cfg.validate(), ConfigError);
  EXPECT_THROW(parse_scheme("rk4"), ConfigError);
  EXPECT_THROW(parse_boundary("neumann"), ConfigError);
}

TEST(Solver, SnapshotTimesOutsideRunRejected) {
  const auto m = make_scaled(metric::HyperbolicPunctured{});
  const FlowState st{sample(m, uniform_grid(0.1, 1.0, 10), 0.0), {}};
  EXPECT_THROW(evolve(st, closed_form_config(m, 0.1), 0.1, {0.0, 0.2}), PreconditionError);
  EXPECT_THROW(evolve(st, closed_form_config(m, 0.1), 0.1, {0.1, 0.0}), PreconditionError);
}

TEST(Solver, StandardTimesAlwaysPresent) {
  const auto t = standard_snapshot_times(1.5, {0.3, 2.0});
  for (double x : {0.0, 0.01, 0.3, 0.5, 0.75, 1.0, 1.5}) {
    EXPECT_NE(std::find_if(t.begin(), t.end(), [&](double y) { return std::abs(x - y) < 1e-12; }), t.end());
  }
  EXPECT_EQ(t.back(), 1.5);
}

TEST(Trajectory, MissingTimeIsPreconditionError) {
  FlowTrajectory tr;
  EXPECT_THROW(tr.at(0.5), PreconditionError);
}
