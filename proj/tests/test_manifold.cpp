#include "c1bench/manifold.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

using namespace c1bench;
using c1bench::testing::error_code;

namespace {

std::vector<ModelManifold> catalog() {
  return {euclidean(2),         euclidean(3),          sphere(2, 1.0),   sphere(3, 2.0),
          hyperbolic(2, 1.0),   hyperbolic(3, 0.5),    flat_torus(make_vec({1.0, 2.0})),
          warped_product(power_cusp_warp(), 1.0), warped_product(sine_warp(1.0), 1.0)};
}

Vec random_point(const ModelManifold& M, Rng& rng, double radius) {
  if (M.kind == ManifoldKind::warped_product) {
    Vec p = M.base_point;
    p[0] += rng.uniform(-0.4, 0.4);
    p[1] += rng.uniform(-3.0, 3.0);
    return p;
  }
  return rng.in_ball(M.dim, radius);
}

}  // namespace

TEST(MetricChart, SymmetricAndPositiveDefinite) {
  Rng rng(1);
  for (const auto& M : catalog()) {
    for (int s = 0; s < 50; ++s) {
      const Vec p = random_point(M, rng, 1.0);
      const Mat g = M.chart.metric(p);
      EXPECT_LE((g - g.transpose()).cwiseAbs().maxCoeff(), 1e-14) << M.name();
      Eigen::SelfAdjointEigenSolver<Mat> es(g);
      EXPECT_GT(es.eigenvalues().minCoeff(), 0.0) << M.name();
    }
  }
}

TEST(MetricChart, InjectivityRadius) {
  const Vec o = make_vec({0.0, 0.0});
  EXPECT_EQ(euclidean(2).inj_radius_at(o), kInf);
  EXPECT_EQ(hyperbolic(2, 1.0).inj_radius_at(o), kInf);
  EXPECT_DOUBLE_EQ(sphere(2, 1.5).inj_radius_at(o), kPi * 1.5);
  EXPECT_DOUBLE_EQ(flat_torus(make_vec({1.0, 0.6})).inj_radius_at(o), 0.3);
}

TEST(Christoffel, EuclideanVanishes) {
  const auto G = christoffel(euclidean(3), make_vec({0.3, -1.0, 2.0}));
  for (int k = 0; k < 3; ++k)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) EXPECT_EQ(G(k, i, j), 0.0);
}

TEST(Christoffel, SpherePolarCoordinates) {
  // dr^2 + sin^2 r dtheta^2: Gamma^r_thth = -sin r cos r, Gamma^th_rth = cot r
  const auto M = warped_product(sine_warp(1.0), 0.7);
  for (double r : {0.3, 0.7, 1.2, 2.5}) {
    const auto G = christoffel(M, make_vec({r, 0.4}));
    EXPECT_NEAR(G(0, 1, 1), -std::sin(r) * std::cos(r), 1e-14);
    EXPECT_NEAR(G(1, 0, 1), std::cos(r) / std::sin(r), 1e-13);
    EXPECT_NEAR(G(1, 1, 0), G(1, 0, 1), 0.0);
    EXPECT_NEAR(G(0, 0, 0), 0.0, 1e-15);
  }
}

TEST(Christoffel, WarpedFiniteDifferenceMatchesClosedForm) {
  const auto w = power_cusp_warp();
  const auto M = warped_product(w, 2.0);
  for (double t : {0.0, 0.5, 2.0, 7.0}) {
    const Vec p = make_vec({t, 1.0});
    const auto G = christoffel(M, p, DerivativeMode::finite_difference);
    EXPECT_NEAR(G(0, 1, 1), -w.f(t) * w.df(t), 1e-6);
    EXPECT_NEAR(G(1, 0, 1), w.df(t) / w.f(t), 1e-6);
    EXPECT_NEAR(G(0, 0, 0), 0.0, 1e-6);
  }
}

TEST(Christoffel, Errors) {
  EXPECT_EQ(error_code([] { christoffel(sphere(2, 1.0), make_vec({4.0, 0.0})); }), Errc::domain);
  Mat g(2, 2);
  g << 1.0, 0.0, 0.0, 1e-13;
  EXPECT_EQ(error_code([&] { checked_inverse(g); }), Errc::conditioning);
}

TEST(Curvature, ConstantCurvatureExamples) {
  Rng rng(2);
  for (int s = 0; s < 20; ++s) {
    const Vec u2 = rng.normal_vec(2), v2 = rng.normal_vec(2);
    const Vec u3 = rng.normal_vec(3), v3 = rng.normal_vec(3);
    EXPECT_NEAR(sectional_curvature(euclidean(2), rng.in_ball(2, 3.0), u2, v2), 0.0, 1e-14);
    EXPECT_NEAR(sectional_curvature(sphere(2, 2.0), rng.in_ball(2, 5.0), u2, v2), 0.25, 1e-9);
    EXPECT_NEAR(sectional_curvature(hyperbolic(3, 1.0), rng.in_ball(3, 2.0), u3, v3), -1.0, 1e-9);
  }
}

TEST(Curvature, SecConstMatchesAtRandomPlanes) {
  Rng rng(3);
  for (const auto& M : catalog()) {
    const auto k = M.sec_const();
    if (!k) continue;
    for (int s = 0; s < 100; ++s) {
      const Vec p = random_point(M, rng, 1.0);
      const double sec = sectional_curvature(M, p, rng.normal_vec(M.dim), rng.normal_vec(M.dim));
      EXPECT_NEAR(sec, *k, 1e-8) << M.name();
    }
  }
}

TEST(Curvature, FiniteDifferenceAgreesWithExact) {
  Rng rng(4);
  for (const auto& M : catalog()) {
    for (int s = 0; s < 100; ++s) {
      const Vec p = random_point(M, rng, 1.0);
      const Vec u = rng.normal_vec(M.dim), v = rng.normal_vec(M.dim);
      const double exact = M.kind == ManifoldKind::warped_product ? M.warp_curvature(p[0])
                                                                  : *M.sec_const();
      const double fd = sectional_curvature(M, p, u, v, DerivativeMode::finite_difference);
      EXPECT_NEAR(fd, exact, 1e-5) << M.name() << " at " << p.transpose();
    }
  }
}

TEST(Curvature, BasisInvariance) {
  Rng rng(5);
  const auto M = sphere(3, 1.3);
  const auto W = warped_product(power_cusp_warp(), 1.0);
  for (int s = 0; s < 30; ++s) {
    const Vec p = rng.in_ball(3, 1.0);
    const Vec u = rng.normal_vec(3), v = rng.normal_vec(3);
    const double a = rng.uniform(-2, 2), b = rng.uniform(-2, 2), c = rng.uniform(-2, 2),
                 d = rng.uniform(-2, 2);
    if (std::abs(a * d - b * c) < 0.1) continue;
    const auto C = curvature_tensor(M, p);
    EXPECT_NEAR(C.sectional(u, v), C.sectional(a * u + b * v, c * u + d * v), 1e-9);
    const auto CW = curvature_tensor(W, make_vec({1.0 + 0.3 * a, c}));
    const Vec u2 = rng.normal_vec(2), v2 = rng.normal_vec(2);
    EXPECT_NEAR(CW.sectional(u2, v2), CW.sectional(a * u2 + b * v2, c * u2 + d * v2), 1e-9);
  }
}

TEST(Curvature, DependentVectorsAreDegenerate) {
  const Vec u = make_vec({1.0, 2.0});
  EXPECT_EQ(error_code([&] { sectional_curvature(sphere(2), make_vec({0.1, 0.1}), u, 3.0 * u); }),
            Errc::degeneracy);
}

TEST(Curvature, RicciMinEigenvalue) {
  const Vec p3 = make_vec({0.2, -0.1, 0.3});
  EXPECT_NEAR(ricci_min_eigenvalue(euclidean(3), p3), 0.0, 1e-14);
  for (double rho : {0.5, 1.0, 2.0}) {
    EXPECT_NEAR(ricci_min_eigenvalue(sphere(3, rho), p3), 2.0 / (rho * rho), 1e-9);
    EXPECT_NEAR(ricci_min_eigenvalue(sphere(2, rho), make_vec({0.2, 0.1})), 1.0 / (rho * rho), 1e-9);
    EXPECT_NEAR(ricci_min_eigenvalue(hyperbolic(3, rho), p3), -2.0 / (rho * rho), 1e-9);
  }
}

TEST(Curvature, MetricScaling) {
  Rng rng(6);
  for (const auto& M : {sphere(3, 1.0), hyperbolic(2, 1.0), warped_product(power_cusp_warp(), 1.0)}) {
    for (double lambda : {0.5, 2.0}) {
      const auto S = with_metric_factor(M, lambda * lambda);
      const Vec p = random_point(M, rng, 0.8);
      const Vec u = rng.normal_vec(M.dim), v = rng.normal_vec(M.dim);
      EXPECT_NEAR(sectional_curvature(S, p, u, v), sectional_curvature(M, p, u, v) / (lambda * lambda), 1e-8);
      EXPECT_NEAR(ricci_min_eigenvalue(S, p), ricci_min_eigenvalue(M, p) / (lambda * lambda), 1e-8);
      // the normal-chart rescaling reaches the same metric
      const auto N = rescaled(M, lambda);
      EXPECT_NEAR(sectional_curvature(N, lambda * p, u, v), sectional_curvature(S, p, u, v), 1e-8);
    }
  }
}

TEST(CurvatureBounds, Identities) {
  for (double sigma : {-2.0, 0.0, 1e-8, 3.0})
    for (double rho : {-4.0, -1e-9, 0.0, 2.0}) {
      const auto b = make_curvature_bounds(sigma, rho, 1e-6);
      EXPECT_EQ(b.a1, std::max(std::max(sigma, 0.0), 1e-6));
      EXPECT_EQ(b.a2, -std::min(std::min(rho, 0.0), -1e-6));
      EXPECT_GE(b.a1, 1e-6);
      EXPECT_GE(b.a2, 1e-6);
    }
}

TEST(CurvatureBounds, Examples) {
  const auto e = curvature_bounds_on_ball(euclidean(2), make_vec({0.0, 0.0}), 1.0, 1e-6);
  EXPECT_EQ(e.sigma, 0.0);
  EXPECT_EQ(e.rho, 0.0);
  EXPECT_EQ(e.a1, 1e-6);
  EXPECT_EQ(e.a2, 1e-6);

  const auto s = curvature_bounds_on_ball(sphere(2, 1.0), make_vec({0.0, 0.0}), 1.0, 1e-6);
  EXPECT_NEAR(s.sigma, 1.0, 1e-9);
  EXPECT_NEAR(s.rho, 1.0, 1e-9);
  EXPECT_NEAR(s.a1, 1.0, 1e-9);
  EXPECT_EQ(s.a2, 1e-6);

  EXPECT_EQ(error_code([] { curvature_bounds_on_ball(sphere(2, 1.0), make_vec({0.0, 0.0}), kPi); }),
            Errc::chart);
}

TEST(CurvatureBounds, WarpedProductMatchesProfile) {
  const auto M = warped_product(power_cusp_warp(), 1.0);
  const Vec x = M.base_point;
  const double R0 = 1.0;
  const auto b = curvature_bounds_on_ball(M, x, R0);
  double sigma = -kInf, rho = kInf;
  for (const Vec& p : ball_sample_points(M, x, R0, CurvatureSampling{}.nodes_per_axis)) {
    sigma = std::max(sigma, M.warp_curvature(p[0]));
    rho = std::min(rho, M.warp_curvature(p[0]));
  }
  EXPECT_NEAR(b.sigma, sigma, 1e-4);
  EXPECT_NEAR(b.rho, rho, 1e-4);
  EXPECT_LT(b.sigma, 0.0);  // -f''/f = -3/(4 (1+t)^2)
}

TEST(Geodesics, EuclideanStraightLine) {
  const auto M = euclidean(3);
  const Vec x = make_vec({0.1, -0.2, 0.3}), v = make_vec({1.0, 2.0, -0.5});
  const auto path = geodesic_flow(M, x, v, 2.0, 0.01);
  for (const auto& s : path) EXPECT_LE((s.x - (x + s.t * v)).norm(), 1e-13);
  EXPECT_DOUBLE_EQ(path.back().t, 2.0);
}

TEST(Geodesics, SphereQuarterGreatCircle) {
  const auto M = sphere(2, 1.0);
  const Vec v = make_vec({0.6, 0.8});
  const Vec end = geodesic_flow(M, make_vec({0.0, 0.0}), v, kPi / 2, 1e-3).back().x;
  EXPECT_NEAR((end - (kPi / 2) * v).norm(), 0.0, 1e-10);
}

TEST(Geodesics, FourthOrderConvergence) {
  const auto M = sphere(2, 1.0);
  const Vec x = make_vec({0.4, -0.3}), v = make_vec({0.2, 1.0});
  const Vec ref = geodesic_flow(M, x, v, 1.5, 1e-3).back().x;
  const double e1 = (geodesic_flow(M, x, v, 1.5, 0.1).back().x - ref).norm();
  const double e2 = (geodesic_flow(M, x, v, 1.5, 0.05).back().x - ref).norm();
  EXPECT_GE(e1 / e2, std::pow(2.0, 3.5));
}

TEST(Geodesics, EnergyConserved) {
  for (const auto& M : {sphere(2, 1.0), hyperbolic(2, 1.0), warped_product(power_cusp_warp(), 1.0)}) {
    const Vec x = M.base_point + make_vec({0.1, 0.05});
    const Vec v = make_vec({0.3, 0.5});
    const auto path = geodesic_flow(M, x, v, kPi, 1e-3);
    const double e0 = metric_norm(M, x, v);
    for (const auto& s : path) EXPECT_NEAR(metric_norm(M, s.x, s.v) / e0, 1.0, 1e-8) << M.name();
  }
}

TEST(Geodesics, EscapeCarriesExitTime) {
  const auto M = sphere(2, 1.0);
  try {
    geodesic_flow(M, make_vec({0.0, 0.0}), make_vec({1.0, 0.0}), 4.0, 0.01);
    FAIL() << "expected an escape error";
  } catch (const EscapeError& e) {
    EXPECT_EQ(e.code(), Errc::escape);
    EXPECT_GT(e.exit_time(), 3.0);
    EXPECT_LT(e.exit_time(), kPi + 0.01);
  }
}

TEST(ExpMap, Examples) {
  const auto E = euclidean(2);
  const Vec x = make_vec({0.3, 0.2});
  EXPECT_EQ(exp_map(E, x, make_vec({0.0, 0.0})), x);
  EXPECT_LE((exp_map(E, x, make_vec({1.0, -2.0})) - make_vec({1.3, -1.8})).norm(), 1e-13);

  // normal coordinates at the origin: exp is the identity
  const auto S = sphere(2, 1.0);
  const Vec v = make_vec({1.1, -0.9});
  EXPECT_LE((exp_map(S, make_vec({0.0, 0.0}), v) - v).norm(), 1e-9);
  EXPECT_LE((exp_map(hyperbolic(3), zero_vec(3), make_vec({0.5, 1.0, -0.2})) - make_vec({0.5, 1.0, -0.2})).norm(),
            1e-9);

  Rng rng(7);
  for (int s = 0; s < 20; ++s) {
    const Vec w = rng.unit_vec(2) * rng.uniform(0.1, 1.5);
    const double len = metric_norm(S, x, w);
    EXPECT_NEAR(geodesic_distance(S, x, exp_map(S, x, w)), len, 1e-6);
  }
}

TEST(Distance, Examples) {
  for (const auto& M : catalog()) {
    if (M.kind == ManifoldKind::warped_product) continue;
    const Vec x = Vec::Constant(M.dim, 0.2);
    EXPECT_NEAR(geodesic_distance(M, x, x), 0.0, 1e-12) << M.name();
  }
  EXPECT_NEAR(geodesic_distance(flat_torus(make_vec({1.0, 1.0})), make_vec({0.1, 0.0}), make_vec({0.9, 0.0})),
              0.2, 1e-12);
  EXPECT_NEAR(geodesic_distance(sphere(2, 1.0), make_vec({kPi / 6, 0.0}), make_vec({-kPi / 6, 0.0})), kPi / 3,
              1e-12);
  EXPECT_NEAR(geodesic_distance(sphere(2, 1.0), make_vec({0.0, 0.0}), make_vec({0.0, kPi / 3})), kPi / 3, 1e-12);
  EXPECT_NEAR(geodesic_distance(hyperbolic(2, 2.0), make_vec({0.0, 0.0}), make_vec({0.0, 1.7})), 1.7, 1e-12);
  // hyperboloid model: cosh d = cosh a cosh b - sinh a sinh b cos angle
  const double a = 0.8, b = 1.3, ang = 1.1;
  const double d = std::acosh(std::cosh(a) * std::cosh(b) - std::sinh(a) * std::sinh(b) * std::cos(ang));
  EXPECT_NEAR(geodesic_distance(hyperbolic(2, 1.0), make_vec({a, 0.0}),
                                make_vec({b * std::cos(ang), b * std::sin(ang)})),
              d, 1e-12);
  EXPECT_EQ(error_code([] {
              const auto W = warped_product(power_cusp_warp());
              geodesic_distance(W, W.base_point, W.base_point);
            }),
            Errc::unsupported);
}
