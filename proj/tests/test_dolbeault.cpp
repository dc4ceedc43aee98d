#include <gtest/gtest.h>

#include <cmath>

#include "lapleg/dolbeault.hpp"
#include "oracles.hpp"

using namespace lapleg;

TEST(Cutoff, Examples) {
  CutoffProfile p(ConvexBody::disk({0, 0}, 1.0), 1.0);
  EXPECT_EQ(cutoff_eval(p, {0, 0}), 0.0);
  EXPECT_EQ(cutoff_eval(p, {3, 0}), 1.0);
  EXPECT_NEAR(cutoff_eval(p, {1.75, 0}), 0.5, 1e-15);
  CutoffProfile c(ConvexBody::disk({0, 0}, 1.0), 1.0, Smoothstep::cubic);
  EXPECT_NEAR(cutoff_eval(c, {0, 1.75}), 0.5, 1e-15);
}

TEST(Cutoff, ExactZeroAndOneOffBand) {
  CutoffProfile p(ConvexBody({{0, 0}, {1, 0}, {0.5, 1}}, 0.1), 0.4);
  auto g = oracle::rng(8);
  for (int i = 0; i < 2000; ++i) {
    Complex z{oracle::uniform(g, -1, 2), oracle::uniform(g, -1, 2)};
    double t = p.band_coordinate(z);
    if (t <= 0) {
      EXPECT_EQ(p(z), 0.0);
      EXPECT_EQ(p.dbar(z), Complex(0, 0));
    } else if (t >= 1) {
      EXPECT_EQ(p(z), 1.0);
      EXPECT_EQ(p.dbar(z), Complex(0, 0));
    } else {
      EXPECT_GE(p(z), 0.0);
      EXPECT_LE(p(z), 1.0);
    }
  }
}

TEST(Cutoff, DbarMatchesFiniteDifferences) {
  for (Smoothstep s : {Smoothstep::cubic, Smoothstep::quintic}) {
    CutoffProfile p(ConvexBody({{0, 0}, {1, 0}, {0.5, 1}}, 0.1), 0.4, s);
    for (Complex z : {Complex{0.5, -0.35}, Complex{1.3, 0.1}, Complex{-0.2, 0.5}}) {
      ASSERT_GT(p.band_coordinate(z), 0.0);
      ASSERT_LT(p.band_coordinate(z), 1.0);
      const double h = 1e-6;
      double dx = (p(z + h) - p(z - h)) / (2 * h);
      double dy = (p(z + Complex(0, h)) - p(z - Complex(0, h))) / (2 * h);
      Complex fd = 0.5 * Complex(dx, dy);
      EXPECT_LE(std::abs(fd - p.dbar(z)), 1e-7);
    }
  }
}

TEST(Area, SelfTest) { EXPECT_TRUE(orientation_self_test()); }

TEST(Area, Examples) {
  CutoffProfile p(ConvexBody::disk({0, 0}, 1.0), 1.0);
  auto r = area_laplace(MeromorphicDatum::simple_pole(0), p, 0.0);
  EXPECT_LE(std::abs(r.value - two_pi_i), 1e-4);
  EXPECT_EQ(r.provenance, Provenance::area_oracle);
  auto r2 = area_laplace(MeromorphicDatum::simple_pole(0.3), p, 1.0);
  EXPECT_LE(std::abs(r2.value - two_pi_i * std::exp(0.3)), 1e-4);
}

TEST(Area, InvariantUnderEpsilonAndProfile) {
  MeromorphicDatum u = MeromorphicDatum::simple_pole(0.3);
  Complex w{1, 0};
  auto base = area_laplace(u, CutoffProfile(ConvexBody::disk({0, 0}, 1.0), 1.0, Smoothstep::cubic), w).value;
  auto half = area_laplace(u, CutoffProfile(ConvexBody::disk({0, 0}, 1.0), 0.5, Smoothstep::cubic), w).value;
  auto quint = area_laplace(u, CutoffProfile(ConvexBody::disk({0, 0}, 1.0), 1.0, Smoothstep::quintic), w).value;
  EXPECT_LE(std::abs(base - half), 2e-4);
  EXPECT_LE(std::abs(base - quint), 2e-4);
}

TEST(Area, MatchesContourOnPolygons) {
  MeromorphicDatum u({{{0.2, 0.1}, 2, {1, 0.5}}, {{-0.3, -0.2}, 1, 1.0}});
  ConvexBody rounded({{-0.5, -0.5}, {0.5, -0.5}, {0.5, 0.5}, {-0.5, 0.5}}, 0.1);
  ConvexBody sharp({{-0.6, -0.6}, {0.7, -0.5}, {0.1, 0.8}});
  for (const auto& k : {rounded, sharp}) {
    CutoffProfile p(k, 0.3, Smoothstep::quintic);
    AreaLaplace area(u, p);
    for (Complex w : {Complex{0, 0}, Complex{1.5, -1}, Complex{-2, 0.5}}) {
      auto a = area(w);
      Complex ref = residue_oracle(u, w);
      EXPECT_LE(std::abs(a.value - ref), std::max(a.error, 1e-12) + 1e-10) << w;
      EXPECT_LE(std::abs(a.value - ref), 1e-4);
      EXPECT_TRUE(a.resolved);
    }
  }
}

TEST(Area, SchemesAgree) {
  MeromorphicDatum u = MeromorphicDatum::simple_pole({0.1, -0.1});
  ConvexBody k({{-0.5, -0.5}, {0.5, -0.5}, {0.5, 0.5}, {-0.5, 0.5}}, 0.1);
  CutoffProfile p(k, 0.4);
  AreaOptions a, b;
  a.scheme = AreaScheme::level_set;
  b.scheme = AreaScheme::cartesian;
  Complex w{0.8, 0.3};
  EXPECT_LE(std::abs(area_laplace(u, p, w, a).value - area_laplace(u, p, w, b).value), 1e-4);
}

TEST(Area, RefinementConverges) {
  MeromorphicDatum u({{{0.2, 0.1}, 1, 1.0}});
  CutoffProfile p(ConvexBody({{-0.5, -0.5}, {0.5, -0.5}, {0.5, 0.5}, {-0.5, 0.5}}, 0.1), 0.3, Smoothstep::cubic);
  Complex w{1, 1};
  Complex ref = residue_oracle(u, w);
  double prev = std::numeric_limits<double>::infinity();
  for (int n : {32, 64, 128, 256}) {
    AreaOptions o;
    o.resolution = n;
    double err = std::abs(area_laplace(u, p, w, o).value - ref);
    EXPECT_LE(err, 2 * prev) << n;
    EXPECT_LT(err, prev) << n;
    prev = err;
  }
}

TEST(Area, Rejections) {
  CutoffProfile p(ConvexBody::disk({0, 0}, 1.0), 1.0);
  EXPECT_THROW(area_laplace(MeromorphicDatum::simple_pole(1.7), p, 0.0), std::invalid_argument);
  EXPECT_THROW(area_laplace(MeromorphicDatum::simple_pole(5.0), p, 0.0), std::invalid_argument);
  AreaOptions coarse;
  coarse.resolution = 6;
  coarse.target = 1e-12;
  auto r = area_laplace(MeromorphicDatum::simple_pole({0.9, 0}), CutoffProfile(ConvexBody::disk({0, 0}, 1.0), 1.0, Smoothstep::cubic), 2.0, coarse);
  EXPECT_FALSE(r.resolved);
}
