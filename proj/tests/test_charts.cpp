#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "rfcusp/charts.hpp"
#include "rfcusp/errors.hpp"

using namespace rfcusp;

TEST(Charts, UnitCircleMapsToZero) { EXPECT_DOUBLE_EQ(s_from_r(1.0), 0.0); }

TEST(Charts, InnerCircleOfAnnulus) {
  const int k = 3;
  EXPECT_NEAR(s_from_r(std::exp(-2.0 * k)), 6.0, 1e-14);
}

TEST(Charts, OneOverE) { EXPECT_NEAR(s_from_r(std::exp(-1.0)), 1.0, 1e-15); }

TEST(Charts, RadiusOutsideDiscRejected) {
  EXPECT_THROW(s_from_r(0.0), DomainError);
  EXPECT_THROW(s_from_r(1.5), DomainError);
  EXPECT_THROW(r_from_s(-0.1), DomainError);
}

TEST(Charts, FlatCapIsMinusS) {
  RadialProfile flat{Chart::CartesianRadial, {0.1, 0.2, 0.5, 0.9}, {0.0, 0.0, 0.0, 0.0}, 0.0};
  const auto lp = convert_profile(flat, Chart::LogPolar);
  ASSERT_EQ(lp.size(), 4u);
  for (std::size_t i = 0; i < lp.size(); ++i) EXPECT_NEAR(lp.values[i], -lp.coords[i], 1e-15);
  EXPECT_LT(lp.coords.front(), lp.coords.back());
}

TEST(Charts, PuncturedHyperbolicInBothCharts) {
  // v(r) = -ln[r (-ln r)] in the Cartesian chart against u(s) = -ln s.
  RadialProfile v{Chart::CartesianRadial, {}, {}, 0.0};
  for (double r = 0.05; r < 0.95; r += 0.05) {
    v.coords.push_back(r);
    v.values.push_back(-std::log(r * -std::log(r)));
  }
  const auto u = convert_profile(v, Chart::LogPolar);
  for (std::size_t i = 0; i < u.size(); ++i) EXPECT_NEAR(u.values[i], -std::log(u.coords[i]), 1e-13);
  const double r1 = std::exp(-1.0);
  EXPECT_NEAR(-std::log(r1 * -std::log(r1)), 1.0, 1e-15);
  EXPECT_NEAR(-std::log(r1 * -std::log(r1)) - s_from_r(r1), 0.0, 1e-15);
}

TEST(Charts, RoundTripIsIdentity) {
  RadialProfile u{Chart::LogPolar, {0.3, 0.7, 1.1, 2.0, 4.5}, {1.0, -0.2, 0.3, 0.7, -2.0}, 0.25};
  const auto back = convert_profile(convert_profile(u, Chart::CartesianRadial), Chart::LogPolar);
  ASSERT_EQ(back.size(), u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    EXPECT_NEAR(back.coords[i], u.coords[i], 1e-14);
    EXPECT_NEAR(back.values[i], u.values[i], 1e-14);
  }
  EXPECT_EQ(back.time, 0.25);
}

TEST(Charts, OriginHasNoLogPolarImage) {
  RadialProfile v{Chart::CartesianRadial, {0.0, 0.5}, {0.0, 0.0}, 0.0};
  EXPECT_THROW(convert_profile(v, Chart::LogPolar), DomainError);
}

TEST(Charts, ValidateRejectsBadProfiles) {
  RadialProfile p{Chart::LogPolar, {0.1, 0.1}, {0.0, 0.0}, 0.0};
  EXPECT_THROW(p.validate(), DomainError);
  p.coords = {0.1, 0.2};
  p.values = {0.0, NAN};
  EXPECT_THROW(p.validate(), DomainError);
  p.values = {0.0};
  EXPECT_THROW(p.validate(), DomainError);
}

TEST(Curvature, ConstantFactorIsFlat) {
  RadialProfile p{Chart::LogPolar, uniform_grid(0.5, 3.0, 50), {}, 0.0};
  p.values.assign(p.size(), 0.7);
  const auto K = gauss_curvature(p);
  for (double k : K.values) EXPECT_NEAR(k, 0.0, 1e-12);
}

TEST(Curvature, PoincareIsMinusOneToSecondOrder) {
  // Error at the fixed nodes s = 1.5, 2.5 must drop fourfold per halving.
  double prev = 0.0;
  for (std::size_t n : {100u, 200u, 400u}) {
    RadialProfile p{Chart::LogPolar, uniform_grid(0.5, 4.5, n), {}, 0.0};
    for (double s : p.coords) p.values.push_back(-std::log(std::sinh(s)));
    const auto K = gauss_curvature(p);
    double err = 0.0, at_nodes = 0.0;
    for (std::size_t i = 0; i < K.size(); ++i) {
      err = std::max(err, std::abs(K.values[i] + 1.0));
      if (std::abs(K.coords[i] - 1.5) < 1e-9 || std::abs(K.coords[i] - 2.5) < 1e-9) {
        at_nodes = std::max(at_nodes, std::abs(K.values[i] + 1.0));
      }
    }
    const double h = 4.0 / n;
    EXPECT_LT(err, h * h / (0.5 * 0.5));
    if (prev > 0.0) EXPECT_NEAR(prev / at_nodes, 4.0, 0.05);
    prev = at_nodes;
  }
}

TEST(Curvature, CigarMatchesAnalyticFormula) {
  const double lambda = 3.0;
  RadialProfile p{Chart::LogPolar, uniform_grid(-4.0, 4.0, 800), {}, 0.0};
  for (double x : p.coords) p.values.push_back(-0.5 * std::log(lambda) - 0.5 * std::log1p(std::exp(2.0 * x)));
  const auto K = gauss_curvature(p);
  for (std::size_t i = 0; i < K.size(); ++i) {
    const double x = K.coords[i];
    const double exact = 2.0 * lambda * std::exp(2.0 * x) / (1.0 + std::exp(2.0 * x));
    EXPECT_NEAR(K.values[i], exact, 1e-3 * (1.0 + exact));
  }
}

TEST(Curvature, FlatCapAtOrigin) {
  RadialProfile v{Chart::CartesianRadial, uniform_radial_grid(0.5, 20), {}, 0.0};
  v.values.assign(v.size(), -1.0);
  const auto K = gauss_curvature(v);
  EXPECT_EQ(K.coords.front(), 0.0);
  for (double k : K.values) EXPECT_NEAR(k, 0.0, 1e-10);
}

TEST(Curvature, SphericalCapIncludingOrigin) {
  // v = ln(2 / (1 + r^2)) is the round sphere, K = 1.
  RadialProfile v{Chart::CartesianRadial, uniform_radial_grid(0.8, 400), {}, 0.0};
  for (double r : v.coords) v.values.push_back(std::log(2.0 / (1.0 + r * r)));
  const auto K = gauss_curvature(v);
  for (double k : K.values) EXPECT_NEAR(k, 1.0, 1e-4);
}

TEST(Grid, GradedGridShape) {
  const auto s = graded_grid(0.05, 35.0, 0.05, 1.02);
  EXPECT_DOUBLE_EQ(s.front(), 0.05);
  EXPECT_DOUBLE_EQ(s.back(), 35.0);
  for (std::size_t i = 1; i < s.size(); ++i) {
    EXPECT_GT(s[i], s[i - 1]);
    EXPECT_LE(s[i] - s[i - 1], 1.05 * 0.05);
  }
  for (double x : {10.0, 20.0, 30.0}) EXPECT_NE(find_node(s, x), static_cast<std::size_t>(-1));
}

TEST(Grid, InterpolateIsLinear) {
  RadialProfile p{Chart::LogPolar, {0.0, 1.0, 3.0}, {0.0, 2.0, 0.0}, 0.0};
  EXPECT_DOUBLE_EQ(interpolate(p, 0.5), 1.0);
  EXPECT_DOUBLE_EQ(interpolate(p, 2.0), 1.0);
  EXPECT_THROW(interpolate(p, 3.5), DomainError);
}

TEST(Csv, RoundTripTwoBlocks) {
  RadialProfile a{Chart::LogPolar, {0.1, 0.2}, {1.0 / 3.0, -2.5}, 0.125};
  RadialProfile b{Chart::CartesianRadial, {0.0, 0.01}, {std::exp(1.0), 1e-300}, 0.125};
  std::stringstream ss;
  write_profile_csv(ss, a);
  write_profile_csv(ss, b);
  const auto blocks = read_profile_csv(ss);
  ASSERT_EQ(blocks.size(), 2u);
  EXPECT_EQ(blocks[0].chart, Chart::LogPolar);
  EXPECT_EQ(blocks[1].chart, Chart::CartesianRadial);
  EXPECT_EQ(blocks[0].values, a.values);
  EXPECT_EQ(blocks[1].values, b.values);
  EXPECT_EQ(blocks[1].time, 0.125);
}

TEST(Csv, MalformedInputRejected) {
  std::stringstream ss("chart,time\nLogPolar,0\ncoord,value\n0.1,abc\n");
  EXPECT_ANY_THROW(read_profile_csv(ss));
}
