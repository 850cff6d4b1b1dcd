#include <cmath>

#include <gtest/gtest.h>

#include "rfcusp/closed_forms.hpp"
#include "rfcusp/initial_data.hpp"
#include "rfcusp/verify.hpp"

using namespace rfcusp;

namespace {

const double ln10 = std::log(10.0);

// One k = 10 cusp run shared by the inequality tests.
const FlowTrajectory& reference_run() {
  static const FlowTrajectory tr = [] {
    InitialDataSpec spec;
    const auto ip = build_initial_profile(spec);
    return evolve(FlowState{ip.outer, ip.cap}, SolverConfig{}, 1.5,
                  standard_snapshot_times(1.5, {0.001, 0.005, 0.05, 0.1, 0.2, 0.3, 0.4, 0.6, 0.9, 1.1, 1.2, 1.3, 1.4}));
  }();
  return tr;
}

}  // namespace

TEST(Residual, SolitonAnalyticDerivatives) {
  const auto m = make_cigar(3.0, 0.5);
  for (double s = -4.0; s <= 4.0; s += 0.25) {
    for (double t : {0.0, 0.1, 0.5}) EXPECT_LE(std::abs(rf_residual(m, s, t)), 1e-6);
  }
}

TEST(Residual, SolitonSampledIsSecondOrder) {
  const auto m = make_cigar(1.0, 0.0);
  auto sup_res = [&](std::size_t n) {
    const double h = 4.0 / n;
    const auto f = sample_field(m, uniform_grid(-2.0, 2.0, n), {0.2 - h, 0.2, 0.2 + h});
    const auto r = rf_residual(f);
    double sup = 0.0;
    for (double v : r.values[0]) sup = std::max(sup, std::abs(v));
    return sup;
  };
  const double a = sup_res(100), b = sup_res(200);
  EXPECT_LT(a, 2e-3);
  EXPECT_NEAR(a / b, 4.0, 0.2);
}

TEST(Residual, ConstantFieldHasZeroResidual) {
  SpaceTimeField f{Chart::LogPolar, uniform_grid(0.0, 1.0, 10), {0.0, 0.1, 0.2}, {}};
  for (int n = 0; n < 3; ++n) f.values.emplace_back(f.coords.size(), 1.25);
  const auto r = rf_residual(f);
  ASSERT_EQ(r.times.size(), 1u);
  for (double v : r.values[0]) EXPECT_NEAR(v, 0.0, 1e-12);
  EXPECT_EQ(rf_residual(metric::Flat{2.0}, 1.0, 0.0), 0.0);
}

TEST(Residual, ShiftedLogIsStrictSubsolution) {
  for (double delta : {0.5, 1.0, 3.0}) {
    for (double s : {0.1, 1.0, 7.0}) EXPECT_NEAR(rf_residual(make_shifted_log(delta), s, 0.0), -10.0, 1e-12);
  }
}

TEST(Residual, TooFewSamplesRejected) {
  SpaceTimeField f{Chart::LogPolar, {0.0, 1.0, 2.0}, {0.0, 1.0}, {{0, 0, 0}, {0, 0, 0}}};
  EXPECT_THROW(rf_residual(f), DomainError);
}

TEST(EpsilonStretch, SolitonSpotValue) {
  const auto v = epsilon_stretch(make_cigar(1.0, 0.0), 0.3);
  EXPECT_NEAR(residual_of_jet(v(0.0, 1.0), Chart::LogPolar, 0.0), 0.3 / (2.0 * 1.3), 1e-12);
}

TEST(EpsilonStretch, ResidualIdentityAcrossEps) {
  for (double eps : {0.01, 0.1, 0.3, 1.0}) {
    const auto v = epsilon_stretch(make_cigar(10.0, 1.0), eps);
    for (double s : {-1.0, 0.0, 1.5}) {
      for (double t : {0.0, 0.4, 1.0}) {
        EXPECT_NEAR(residual_of_jet(v(s, t), Chart::LogPolar, s), eps / (2.0 * (eps * t + 1.0)), 1e-9);
      }
    }
  }
}

TEST(EpsilonStretch, SmallEpsRecoversField) {
  const auto m = make_cigar(2.0, 0.0);
  const auto v = epsilon_stretch(m, 1e-9);
  for (double s : {-1.0, 0.3, 2.0}) EXPECT_NEAR(v(s, 0.7).value, eval(m, s, 0.7), 1e-8);
}

TEST(EpsilonStretch, StaticFlatField) {
  const double eps = 0.5, c = 0.25;
  const auto v = epsilon_stretch([c](double, double) { return Jet{c, 0.0, 0.0, 0.0}; }, eps);
  for (double t : {0.0, 1.0, 3.0}) {
    const Jet j = v(0.4, t);
    EXPECT_NEAR(j.value, c + 0.5 * std::log(eps * t + 1.0), 1e-15);
    EXPECT_NEAR(residual_of_jet(j, Chart::LogPolar, 0.4), eps / (2.0 * (eps * t + 1.0)), 1e-15);
  }
}

TEST(EpsilonStretch, SampledFieldShiftsAndReparametrises) {
  SpaceTimeField f{Chart::LogPolar, {0.0, 1.0}, {0.0, 1.0}, {{0.0, 0.0}, {1.0, 2.0}}};
  const double eps = 1.0, t = 1.0;
  const auto g = epsilon_stretch(f, eps, {t});
  const double tau = std::log(2.0);
  EXPECT_NEAR(g.values[0][0], tau + 0.5 * std::log(2.0), 1e-15);
  EXPECT_NEAR(g.values[0][1], 2.0 * tau + 0.5 * std::log(2.0), 1e-15);
  EXPECT_THROW(epsilon_stretch(f, eps, {5.0}), DomainError);
}

TEST(Ordering, IdenticalFieldsHaveZeroViolation) {
  const auto m = make_cigar(1.0, 0.0);
  const auto e = check_ordering(m, m, Region{-3.0, 3.0}, {0.0, 0.5}, 0.0);
  EXPECT_EQ(e.max_violation, 0.0);
  EXPECT_TRUE(e.passed());
}

TEST(Ordering, PuncturedDominatesPoincare) {
  const auto e = check_ordering(metric::HyperbolicPunctured{}, metric::Poincare{}, Region{0.1, 10.0}, {0.0}, 0.0);
  EXPECT_LT(e.max_violation, 0.0);
  // sup of (-ln sinh s) - (-ln s) is attained at the left end.
  EXPECT_NEAR(e.max_violation, std::log(0.1) - std::log(std::sinh(0.1)), 1e-12);
}

TEST(Ordering, ReversedArgumentsFail) {
  const auto e = check_ordering(metric::Poincare{}, metric::HyperbolicPunctured{}, Region{0.1, 10.0}, {0.0}, 0.0);
  EXPECT_FALSE(e.passed());
}

TEST(Ordering, TrajectoryAboveLowerBarrier) {
  const auto& tr = reference_run();
  const auto bp = make_barrier_pair(10);
  const auto e = check_ordering(&tr, bp.lower, Region{10.0}, {0.0, 0.01, 0.5}, 0.05);
  EXPECT_TRUE(e.passed()) << e.max_violation;
}

TEST(Inequalities, ReferenceRunEntries) {
  const auto& tr = reference_run();
  InequalityOptions opt;
  opt.origin = fit_origin_constants(tr);
  const auto rep = check_named_inequalities(tr, 10, opt);
  for (const auto& e : rep.entries) {
    if (e.name == "g") continue;
    EXPECT_TRUE(e.applicable) << e.name;
    EXPECT_TRUE(e.passed()) << e.name << " " << e.max_violation;
  }
}

TEST(Inequalities, CentreBoundAtHalf) {
  const auto& tr = reference_run();
  const double u = detail::snapshot_value(tr.at(0.5), 10.0);
  EXPECT_LE(u, 0.5 * std::log(5.0) - std::log(10.0));
}

TEST(Inequalities, EarlyBoundIsExactAtStart) {
  const auto& snap = reference_run().at(0.0);
  for (std::size_t i = 0; i < snap.outer.size(); ++i) {
    const double s = snap.outer.coords[i];
    if (s > 10.0) break;
    EXPECT_EQ(snap.outer.values[i], -std::log(s));
  }
  const auto rep = check_named_inequalities(reference_run(), 10);
  EXPECT_NEAR(rep.find("e")->max_violation, -0.5 * ln10, 1e-12);
}

TEST(Inequalities, CurvatureFloorHoldsAfterStart) {
  // The t = 0 blend is far below the floor; for k = 10 every later snapshot
  // respects it.
  const auto& tr = reference_run();
  const double h = relative_spacing(tr.snapshots.front().outer.coords);
  const auto rep = check_named_inequalities(tr, 10);
  const auto* g = rep.find("g");
  EXPECT_FALSE(g->passed());
  EXPECT_EQ(g->worst_time, 0.0);
  double worst = -1e300;
  for (const auto& snap : tr.snapshots) {
    if (snap.time() == 0.0) continue;
    for (const RadialProfile* p : {&snap.outer, &snap.cap}) {
      const auto K = gauss_curvature(*p);
      for (std::size_t i = 0; i < K.size(); ++i) {
        if (K.resolved(i)) worst = std::max(worst, -1.0 / (1.0 + 2.0 * snap.time()) - K.values[i]);
      }
    }
  }
  EXPECT_LE(worst, 10.0 * h * h);
}

TEST(Inequalities, MissingNamedTimeIsPreconditionError) {
  auto tr = reference_run();
  std::erase_if(tr.snapshots, [](const auto& s) { return std::abs(s.time() - 0.5) < 1e-12; });
  EXPECT_THROW(check_named_inequalities(tr, 10), PreconditionError);
}

TEST(Inequalities, FutureEntriesNotApplicable) {
  FlowTrajectory tr;
  tr.snapshots.push_back(reference_run().at(0.0));
  const auto rep = check_named_inequalities(tr, 10);
  for (const char* name : {"c2", "d", "h", "i"}) EXPECT_FALSE(rep.find(name)->applicable) << name;
  EXPECT_TRUE(rep.find("a_upper")->applicable);
}

TEST(OriginFit, ConstantsMakeEntriesTight) {
  const auto& tr = reference_run();
  const auto oc = fit_origin_constants(tr);
  EXPECT_GE(oc.alpha_hat, 1.0);
  EXPECT_GE(oc.c, 0.0);
  InequalityOptions opt;
  opt.origin = oc;
  const auto rep = check_named_inequalities(tr, 10, opt);
  EXPECT_LE(rep.find("h")->max_violation, 1e-12);
  EXPECT_LE(rep.find("i")->max_violation, 1e-12);
}
