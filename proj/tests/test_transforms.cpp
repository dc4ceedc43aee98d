#include <gtest/gtest.h>

#include <cmath>

#include "lapleg/transforms.hpp"
#include "oracles.hpp"

using namespace lapleg;

namespace {

// Residue sum by trapezoid circles around each pole; independent of the
// library's closed form.
Complex residues_by_circles(const MeromorphicDatum& u, Complex w, double r = 0.05) {
  Complex s = 0;
  std::vector<Complex> seen;
  for (const auto& t : u.poles()) {
    bool dup = false;
    for (Complex p : seen) dup = dup || p == t.pole;
    if (dup) continue;
    seen.push_back(t.pole);
    s += oracle::trapezoid_circle([&](Complex z) { return std::exp(z * w) * u(z); }, t.pole, r, 256);
  }
  return s;
}

ConvexRegion quarter_sector() { return ConvexRegion::sector({0, 0}, 0.0, pi / 4); }

}  // namespace

TEST(Residue, Examples) {
  auto u = MeromorphicDatum::simple_pole({0, 0});
  EXPECT_NEAR(std::abs(residue_oracle(u, {1.3, -2}) - two_pi_i), 0, 1e-15);
  Complex a{0.2, -0.1};
  MeromorphicDatum cube({{a, 3, 1.0}});
  EXPECT_NEAR(std::abs(residue_oracle(cube, 2.0) - Complex(0, 4 * pi) * std::exp(2.0 * a)), 0, 1e-13);
  auto sum = MeromorphicDatum::simple_pole(0) + MeromorphicDatum::simple_pole(1);
  Complex w{0.4, 0.9};
  EXPECT_NEAR(std::abs(residue_oracle(sum, w) - two_pi_i * (1.0 + std::exp(w))), 0, 1e-14);
}

TEST(Residue, AgreesWithTrapezoidCircles) {
  MeromorphicDatum u({{{0.1, 0.2}, 1, {1, -1}}, {{-0.3, 0}, 2, {0.5, 0}}, {{0.2, -0.2}, 3, {0, 2}}});
  for (Complex w : {Complex{0, 0}, Complex{1, 1}, Complex{-2, 0.5}})
    EXPECT_LE(std::abs(residue_oracle(u, w) - residues_by_circles(u, w)), 1e-12);
}

TEST(Polya, Examples) {
  auto k = ConvexBody::disk({0, 0}, 0.5);
  auto v = polya_transform(MeromorphicDatum::simple_pole(0), k, 1.0);
  for (Complex w : {Complex{0, 0}, Complex{2, -1}, Complex{-3, 0.5}}) EXPECT_NEAR(std::abs(v(w) - two_pi_i), 0, 1e-11);
  auto v2 = polya_transform(MeromorphicDatum::simple_pole(0.3), k, 1.0);
  EXPECT_NEAR(std::abs(v2(1.0) - two_pi_i * std::exp(0.3)), 0, 1e-11);
  auto v3 = polya_transform(MeromorphicDatum({{0, 2, 1.0}}), k, 1.0);
  EXPECT_NEAR(std::abs(v3({1.5, 0.5}) - two_pi_i * Complex(1.5, 0.5)), 0, 1e-11);
  EXPECT_EQ(v.provenance, Provenance::contour);
}

TEST(Polya, Rejections) {
  auto k = ConvexBody::disk({0, 0}, 0.5);
  EXPECT_THROW(polya_transform(MeromorphicDatum::simple_pole(0.7), k, 2.0), std::invalid_argument);
  EXPECT_THROW(polya_transform(MeromorphicDatum::simple_pole(0.5), k, 2.0), std::invalid_argument);
  EXPECT_THROW(polya_transform(MeromorphicDatum::simple_pole(0), k, 0.52), std::invalid_argument);
}

TEST(Polya, RandomDataMatchesOracle) {
  auto g = oracle::rng(42);
  ConvexBody k({{-0.5, -0.5}, {0.5, -0.5}, {0.5, 0.5}, {-0.5, 0.5}}, 0.2);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<PoleTerm> terms;
    int n = 1 + static_cast<int>(oracle::uniform(g, 0, 5));
    for (int j = 0; j < n; ++j)
      terms.push_back({{oracle::uniform(g, -0.6, 0.6), oracle::uniform(g, -0.6, 0.6)},
                       1 + static_cast<int>(oracle::uniform(g, 0, 3)),
                       {oracle::uniform(g, -1, 1), oracle::uniform(g, -1, 1)}});
    MeromorphicDatum u(terms);
    auto v = polya_transform(u, k, 2.0);
    for (Complex w : {Complex{0, 0}, Complex{3, 0}, Complex{-2, 2}, Complex{0.5, -2.9}}) {
      Complex ref = residues_by_circles(u, w, 0.02);
      EXPECT_LE(std::abs(v(w) - ref), 1e-9 * (1 + std::abs(ref)));
    }
  }
}

TEST(Polya, ContourIndependenceAndLinearity) {
  auto k = ConvexBody::disk({0.1, 0}, 0.6);
  MeromorphicDatum u1({{{0.2, 0.1}, 2, {1, 0}}});
  MeromorphicDatum u2({{{-0.3, 0.2}, 1, {0, 1}}});
  auto a = polya_transform(u1, k, 2.0), b = polya_transform(u1, k, 4.0);
  for (Complex w : {Complex{1, 1}, Complex{-2, 0}}) {
    auto ea = a.evaluator(w), eb = b.evaluator(w);
    EXPECT_LE(std::abs(ea.value - eb.value), 1e-10 + ea.error + eb.error);
  }
  Complex al{0.5, -1}, be{2, 0.3};
  auto lin = polya_transform(u1.scaled(al) + u2.scaled(be), k, 2.0);
  auto v2 = polya_transform(u2, k, 2.0);
  for (Complex w : {Complex{1, 1}, Complex{-2, 0}, Complex{0, 2.5}})
    EXPECT_LE(std::abs(lin(w) - (al * a(w) + be * v2(w))), 1e-10);
}

TEST(Polya, DifferentiationLaw) {
  auto k = ConvexBody::disk({0, 0}, 0.8);
  Complex a{0.3, -0.2};
  for (int m = 1; m <= 4; ++m) {
    auto v = polya_transform(MeromorphicDatum({{a, m + 1, 1.0}}), k, 2.0);
    Complex w{1.2, 0.7};
    Complex want = two_pi_i * std::pow(w, m) * std::exp(a * w) / factorial(m);
    EXPECT_LE(std::abs(v(w) - want), 1e-10 * (1 + std::abs(want)));
  }
}

TEST(Polya, ScaledEvaluatorAgrees) {
  auto k = ConvexBody::disk({0, 0}, 0.5);
  MeromorphicDatum u({{{0.3, 0}, 1, 1.0}, {{-0.1, 0.2}, 2, {0, 1}}});
  auto v = polya_transform(u, k, 1.5);
  for (Complex w : {Complex{2, 1}, Complex{-3, 0.5}, Complex{0, 4}}) {
    Complex s = v.scaled_evaluator(w).value();
    EXPECT_LE(std::abs(s - v(w)), 1e-10 * (1 + std::abs(v(w))));
  }
  // Far out the circle integral is lost to cancellation; the scaled value
  // stays accurate in units of exp(h_{K_delta}(w)).
  for (double arg : {0.0, 2.0, -1.0}) {
    Complex w = std::polar(400.0, arg);
    auto sv = v.scaled_evaluator(w);
    auto ref = residue_form(u).scaled(w);
    Complex ref_in_sv_units = ref.mantissa * std::exp(ref.exponent - sv.exponent);
    EXPECT_LE(std::abs(sv.mantissa - ref_in_sv_units), 1e-10);
    EXPECT_NEAR(sv.exponent.real(), 0.55 * 400.0, 1e-9);
  }
}

TEST(Meril, SectorSimplePole) {
  auto s = quarter_sector();
  auto u = MeromorphicDatum::simple_pole(1.0);
  MerilTransform t(u, s, 0.1, 0.2);
  EXPECT_NEAR(std::abs(t.xi0() - Complex(-1, 0)), 0, 1e-15);
  auto ev = t.evaluate(-1.0);
  ASSERT_TRUE(ev.converged);
  EXPECT_LE(std::abs(ev.value - two_pi_i * std::exp(-1.0)), 1e-8);
  auto u2 = MeromorphicDatum({{1.0, 2, 1.0}});
  auto ev2 = MerilTransform(u2, s, 0.1, 0.2).evaluate(-1.0);
  EXPECT_LE(std::abs(ev2.value - two_pi_i * (-1.0) * std::exp(-1.0)), 1e-8);
}

TEST(Meril, EpsilonIndependence) {
  auto s = quarter_sector();
  MeromorphicDatum u({{{1, 0.1}, 1, 1.0}, {{2, -0.3}, 2, {0, 1}}});
  for (Complex w : {Complex{-1, 0.2}, Complex{-2, -1}}) {
    auto a = MerilTransform(u, s, 0.1, 0.2).evaluate(w);
    auto b = MerilTransform(u, s, 0.05, 0.2).evaluate(w);
    ASSERT_TRUE(a.converged && b.converged);
    EXPECT_LE(std::abs(a.value - b.value), 1e-8);
  }
}

TEST(Meril, TailBoundDominatesGaps) {
  MerilTransform t(MeromorphicDatum::simple_pole(1.0), quarter_sector(), 0.1, 0.2);
  auto ev = t.evaluate({-0.8, 0.3});
  ASSERT_TRUE(ev.converged);
  ASSERT_GE(ev.steps.size(), 2u);
  for (std::size_t k = 1; k < ev.steps.size(); ++k) EXPECT_TRUE(ev.steps[k].dominated) << k;
}

TEST(Meril, Rejections) {
  auto u = MeromorphicDatum::simple_pole(1.0);
  EXPECT_THROW(MerilTransform(u, ConvexRegion({{{1, 0}, 2}, {{-1, 0}, 2}, {{0, 1}, 2}, {{0, -1}, 2}}), 0.1, 0.1),
               std::invalid_argument);
  EXPECT_THROW(MerilTransform(u, ConvexRegion({{{0, 1}, 1}, {{0, -1}, 1}}), 0.1, 0.1), std::invalid_argument);
  EXPECT_THROW(MerilTransform(MeromorphicDatum::simple_pole(-1.0), quarter_sector(), 0.1, 0.1), std::invalid_argument);
  MerilTransform t(u, quarter_sector(), 0.1, 0.2);
  EXPECT_FALSE(t.in_domain(1.0));
  EXPECT_FALSE(t.in_domain(-0.1));
  EXPECT_THROW(t.evaluate(1.0), std::domain_error);
  MerilOptions bad;
  bad.radii = {10, 5};
  EXPECT_THROW(MerilTransform(u, quarter_sector(), 0.1, 0.2, bad), std::invalid_argument);
}

TEST(Meril, ExhaustedScheduleReported) {
  MerilOptions opt;
  opt.radii = {5, 5.5, 6};
  auto r = meril_transform(MeromorphicDatum::simple_pole(1.0), quarter_sector(), 0.1, 0.2, opt);
  try {
    r({-0.3, 0});
    FAIL() << "expected non-convergence";
  } catch (const MerilNonConvergence& e) {
    EXPECT_FALSE(e.partial().converged);
    EXPECT_GT(e.partial().steps.back().tail, 0.0);
  }
}

TEST(Meril, EpsilonPrimeCompatibility) {
  // u_{eps'} differs by an entire term between eps' and eps'/2.
  auto s = quarter_sector();
  double ep = 0.4;
  auto make = [&](double e) {
    return MeromorphicDatum({{1.0, 1, 1.0}}, {{0.5, 0, {e, 0}}});  // 1/(z-1) + 0.5 e^{e z}, xi0 = -1
  };
  MerilTransform a(make(ep), s, 0.1, ep), b(make(ep / 2), s, 0.1, ep / 2);
  for (Complex w : {Complex{-1, 0}, Complex{-1.5, 0.4}, Complex{-0.9, -0.2}}) {
    ASSERT_TRUE(a.in_domain(w) && b.in_domain(w));
    auto va = a.evaluate(w), vb = b.evaluate(w);
    ASSERT_TRUE(va.converged && vb.converged);
    EXPECT_LE(std::abs(va.value - vb.value), 1e-8);
    EXPECT_LE(std::abs(va.value - two_pi_i * std::exp(w)), 1e-8);
  }
}

TEST(TailBound, Examples) {
  EXPECT_NEAR(tail_bound(10, 1, 0, 1, 1), 2 * pi * 10 * std::exp(-10.0), 1e-15);
  EXPECT_LT(tail_bound(1e4, 1, 0, 1, 1), 1e-300);
  EXPECT_LT(tail_bound(40, 1, 0, 1, 1), tail_bound(20, 1, 0, 1, 1));
  EXPECT_THROW(tail_bound(10, 0, 0, 1, 1), std::invalid_argument);
  EXPECT_THROW(tail_bound(10, 1, 0, -1, 1), std::invalid_argument);
}

TEST(Borel, Examples) {
  auto u = borel_inverse(std::vector<Complex>{1.0});
  ASSERT_EQ(u.poles().size(), 1u);
  EXPECT_EQ(u.poles()[0].order, 1);
  EXPECT_EQ(u.poles()[0].coef, Complex(1, 0));
  auto u2 = borel_inverse(std::vector<Complex>{1.0, 1.0});
  EXPECT_EQ(u2.poles().size(), 2u);
  EXPECT_TRUE(borel_inverse(std::vector<Complex>{}).empty());
  EXPECT_TRUE(borel_inverse(std::vector<Complex>{0.0, 0.0}).empty());
  EXPECT_THROW(borel_inverse(std::vector<Complex>{1.0, std::numeric_limits<double>::infinity()}), std::invalid_argument);
  EXPECT_THROW(borel_inverse(std::vector<Complex>(200, 1.0)), std::invalid_argument);
}

TEST(Borel, RoundTrip) {
  std::vector<Complex> a{1.0, {0.5, -1}, 0.25, {0, 0.1}};
  auto v = polya_transform(borel_inverse(a), ConvexBody::disk({0, 0}, 0.5), 1.0);
  for (Complex w : {Complex{0, 0}, Complex{1.5, -1}, Complex{-2, 0}}) {
    Complex p = 0;
    for (std::size_t n = a.size(); n-- > 0;) p = p * w + a[n];
    EXPECT_LE(std::abs(v(w) - two_pi_i * p), 1e-9);
  }
  // a shifted group: e^{c w} (1 + w)
  auto u = borel_inverse(std::vector<ExpPolynomialGroup>{{{0.2, 0.1}, {1.0, 1.0}}});
  auto vs = polya_transform(u, ConvexBody::disk({0, 0}, 0.5), 1.0);
  Complex w{0.7, 1.2};
  EXPECT_LE(std::abs(vs(w) - two_pi_i * std::exp(Complex(0.2, 0.1) * w) * (1.0 + w)), 1e-9);
}
