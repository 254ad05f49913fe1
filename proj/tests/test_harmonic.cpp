#include "c1bench/harmonic.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace c1bench;
using c1bench::testing::error_code;

namespace {
const Vec o2 = make_vec({0.0, 0.0});

double coordinate_deviation(const HarmonicChartResult& res, const Vec& x) {
  double dev = 0.0;
  for (std::size_t k = 0; k < res.coords.size(); ++k) {
    const auto& y = res.coords[k];
    for (std::size_t i = 0; i < y.size(); ++i)
      dev = std::max(dev, std::abs(y[i] - (y.grid()->node(i)[k] - x[k])));
  }
  return dev;
}
}  // namespace

TEST(HarmonicCoords, EuclideanIsIdentity) {
  for (double r : {0.1, 0.5, 1.0}) {
    const auto res = build_harmonic_coords(euclidean(2), o2, r, r / 32);
    ASSERT_EQ(res.coords.size(), 2u);
    EXPECT_LE(coordinate_deviation(res, o2), 1e-12);
    EXPECT_LE(res.harmonic_residual, 1e-10);
    EXPECT_LE(res.center_offset, 1e-10);
  }
  const Vec x = make_vec({0.3, -0.2, 0.1});
  const auto res3 = build_harmonic_coords(euclidean(3), x, 0.5, 0.5 / 8);
  EXPECT_LE(coordinate_deviation(res3, x), 1e-12);
}

TEST(HarmonicCoords, FlatTorusIsIdentity) {
  const auto T = flat_torus(make_vec({3.0, 2.0}));
  const Vec x = make_vec({1.0, 0.5});
  const auto res = build_harmonic_coords(T, x, 0.9, 0.9 / 32);
  EXPECT_LE(coordinate_deviation(res, x), 1e-12);
}

TEST(HarmonicCoords, SphereNormalCoordinatesNearlyHarmonic) {
  const double r = 0.1;
  const auto res = build_harmonic_coords(sphere(2, 1.0), o2, r, r / 32);
  EXPECT_LE(coordinate_deviation(res, o2), 10 * r * r * r);
  EXPECT_LE(res.harmonic_residual, 1e-8);
  EXPECT_LE(res.center_offset, 1e-10);
  for (const auto& M : {sphere(2, 1.0), hyperbolic(2, 1.0), sphere(3, 2.0)}) {
    const Vec x = M.dim == 2 ? o2 : make_vec({0.1, 0.0, -0.1});
    const auto big = build_harmonic_coords(M, x, 0.8, 0.8 / (M.dim == 2 ? 32 : 10));
    EXPECT_LE(big.harmonic_residual, 1e-8) << M.name();
  }
}

TEST(CheckAccuracy, EuclideanAlwaysPasses) {
  for (double r : {0.1, 1.0, 3.0}) {
    const auto res = build_harmonic_coords(euclidean(2), o2, r, r / 16);
    for (double p : {2.5, 3.0, 8.0})
      for (double Q : {1.0001, 1.5, 4.0}) {
        const auto a = check_accuracy(res, p, Q);
        EXPECT_TRUE(a.q_metric_ok);
        EXPECT_TRUE(a.deriv_ok);
        EXPECT_NEAR(a.q_achieved, 1.0, 1e-9);
      }
  }
}

TEST(CheckAccuracy, Sphere) {
  const auto res = build_harmonic_coords(sphere(2, 1.0), o2, 0.1, 0.1 / 32);
  const auto a = check_accuracy(res, 3.0, 4.0);
  EXPECT_TRUE(a.q_metric_ok);
  EXPECT_TRUE(a.deriv_ok);
  // metric pinch grows like 1 + r^2 / 3
  EXPECT_NEAR(a.metric_pinch, 1.0 + 0.01 / 3, 5e-4);
  const auto tight = check_accuracy(res, 3.0, 1.0001);
  EXPECT_FALSE(tight.q_metric_ok);
  EXPECT_DOUBLE_EQ(tight.q_achieved, a.q_achieved);
  EXPECT_TRUE(check_accuracy(res, 3.0, a.q_achieved * (1 + 1e-12)).q_metric_ok);
}

TEST(CheckAccuracy, Errors) {
  const auto res = build_harmonic_coords(euclidean(2), o2, 0.5, 0.5 / 8);
  EXPECT_EQ(error_code([&] { check_accuracy(res, 2.0, 4.0); }), Errc::parameter);
  EXPECT_EQ(error_code([&] { check_accuracy(res, 3.0, 1.0); }), Errc::parameter);
  EXPECT_EQ(error_code([&] { check_accuracy(HarmonicChartResult{}, 3.0, 4.0); }), Errc::precondition);
  auto flat = res;
  for (auto& y : flat.coords) y = ScalarField(y.grid(), 0.0);
  EXPECT_EQ(error_code([&] { check_accuracy(flat, 3.0, 4.0); }), Errc::degeneracy);
  EXPECT_EQ(error_code([&] { build_harmonic_coords(sphere(2, 1.0), o2, 3.2, 0.1); }), Errc::chart);
}

TEST(HarmonicRadius, Examples) {
  const auto e = estimate_harmonic_radius(euclidean(2), o2, 3.0, 4.0, 1.0);
  EXPECT_DOUBLE_EQ(e.radius, 1.0);
  EXPECT_EQ(e.tested.size(), 1u);

  const auto s = estimate_harmonic_radius(sphere(2, 1.0), o2, 3.0, 4.0, 1.0);
  EXPECT_GE(s.radius, 0.5);
  EXPECT_LE(s.max_harmonic_residual, 1e-8);

  const auto tight = estimate_harmonic_radius(sphere(2, 1.0), o2, 3.0, 1.2, 1.0);
  EXPECT_EQ(tight.tested.size(), 13u);
  EXPECT_GT(tight.radius, 0.0);
  EXPECT_LT(tight.radius, 1.0);
  // the reported radius passed and the bisection bracket above it failed
  EXPECT_TRUE(harmonic_chart_passes(sphere(2, 1.0), o2, tight.radius, 3.0, 1.2, {}));
  EXPECT_FALSE(harmonic_chart_passes(sphere(2, 1.0), o2, tight.radius + 1.0 / 4096, 3.0, 1.2, {}));
}

TEST(HarmonicRadius, MonotoneInQAndRmax) {
  const auto S = sphere(2, 1.0);
  double prev = 0.0;
  for (double Q : {1.1, 1.3, 2.0, 4.0}) {
    const double r = estimate_harmonic_radius(S, o2, 3.0, Q, 2.0).radius;
    EXPECT_GE(r, prev) << Q;
    prev = r;
  }
  // in r_max the bisection brackets differ, so agreement holds up to the
  // final bracket width r_max / 2^12
  prev = 0.0;
  for (double rmax : {0.25, 0.5, 1.0, 2.0}) {
    const double r = estimate_harmonic_radius(S, o2, 3.0, 1.3, rmax).radius;
    EXPECT_GE(r, prev - rmax / 4096) << rmax;
    prev = std::max(prev, r);
  }
}

TEST(HarmonicRadius, Errors) {
  EXPECT_EQ(error_code([] { estimate_harmonic_radius(euclidean(2), o2, 2.0, 4.0, 1.0); }), Errc::parameter);
  EXPECT_EQ(error_code([] { estimate_harmonic_radius(euclidean(2), o2, 3.0, 1.0, 1.0); }), Errc::parameter);
  EXPECT_EQ(error_code([] { estimate_harmonic_radius(sphere(2, 1.0), o2, 3.0, 4.0, kPi); }), Errc::chart);
}

TEST(AndersonCheeger, Examples) {
  for (double C : {0.3, 1.0, 5.0}) {
    const auto e = anderson_cheeger_ratio(euclidean(2), o2, 3.0, 4.0, C);
    EXPECT_DOUBLE_EQ(e.numerator, 1.0);
    EXPECT_DOUBLE_EQ(e.ratio, 1.0 / std::min(1.0, C));
  }
  const auto s = anderson_cheeger_ratio(sphere(2, 1.0), o2, 3.0, 4.0, 10.0);
  EXPECT_DOUBLE_EQ(s.denominator, 1.0);
  EXPECT_NEAR(s.ricci_min, 1.0, 1e-6);
  EXPECT_GE(s.ratio, 0.5);
  const auto h = anderson_cheeger_ratio(hyperbolic(2, 1.0), o2, 3.0, 4.0, 0.5);
  EXPECT_DOUBLE_EQ(h.denominator, 0.5);
  EXPECT_NEAR(h.ricci_min, -1.0, 1e-6);
  EXPECT_GT(h.ratio, 0.0);
}

TEST(AndersonCheeger, RicciHypothesis) {
  EXPECT_EQ(error_code([] { anderson_cheeger_ratio(hyperbolic(2, 1.0), o2, 3.0, 4.0, 2.0); }), Errc::precondition);
  EXPECT_EQ(error_code([] { anderson_cheeger_ratio(euclidean(2), o2, 3.0, 4.0, 0.0); }), Errc::parameter);
}
