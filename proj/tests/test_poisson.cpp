#include "c1bench/poisson.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace c1bench;
using c1bench::testing::error_code;

namespace {

double manufactured_error(const ModelManifold& M, const ClosedForm& psi, double r, double h) {
  const auto grid = build_ball_grid(M, M.base_point, r, h);
  const auto p = manufactured_problem(M, psi, grid);
  SolverStats st;
  const auto u = solve_dirichlet(grid, p.f, p.boundary, {}, &st);
  EXPECT_LE(st.residual, 1e-10);
  return sup_difference(u, p.psi_ref);
}

}  // namespace

TEST(Poisson, LinearBoundaryDataIsReproduced) {
  const auto g = build_ball_grid(euclidean(2), make_vec({0.0, 0.0}), 1.0, 1.0 / 32);
  const auto u = solve_dirichlet(g, ScalarField(g, 0.0), BoundaryField::sample(g, fields::coordinate(0)));
  for (std::size_t i = 0; i < g->size(); ++i) EXPECT_NEAR(u[i], g->node(i)[0], 1e-9);
}

TEST(Poisson, UnitSourceOnDisk) {
  // psi = (|x|^2 - 1) / 4 is quadratic, so Shortley-Weller reproduces it up to the solve
  const auto g = build_ball_grid(euclidean(2), make_vec({0.0, 0.0}), 1.0, 1.0 / 32);
  const auto u = solve_dirichlet(g, ScalarField(g, 1.0), BoundaryField(g, 0.0));
  EXPECT_NEAR(u[g->center_node()], -0.25, 1e-9);
}

TEST(Poisson, ManufacturedExamples) {
  const auto g = build_ball_grid(euclidean(2), make_vec({0.0, 0.0}), 1.0, 0.1);
  const auto c = manufactured_problem(euclidean(2), fields::constant(2.0), g);
  for (double v : c.f.values()) EXPECT_EQ(v, 0.0);
  for (double v : c.boundary.values()) EXPECT_EQ(v, 2.0);
  const auto sq = ClosedForm::make("x1^2", [](const auto* x, int) { return x[0] * x[0]; });
  const auto q = manufactured_problem(euclidean(2), sq, g);
  for (double v : q.f.values()) EXPECT_NEAR(v, 2.0, 1e-14);

  const auto H = hyperbolic(2, 1.0);
  const auto gh = build_ball_grid(H, make_vec({0.0, 0.0}), 1.0, 0.1);
  const auto p = manufactured_problem(H, fields::radial_cosh(), gh);
  for (std::size_t i = 0; i < gh->size(); ++i) EXPECT_NEAR(p.f[i], 2.0 * std::cosh(gh->node(i).norm()), 1e-10);
}

TEST(Poisson, SphereEigenfunctionConvergence) {
  const auto M = sphere(2, 1.0);
  const auto psi = fields::radial_cos();
  const double e1 = manufactured_error(M, psi, 1.0, 1.0 / 16);
  const double e2 = manufactured_error(M, psi, 1.0, 1.0 / 32);
  const double e3 = manufactured_error(M, psi, 1.0, 1.0 / 64);
  EXPECT_GE(std::log2(e1 / e2), 1.8);
  EXPECT_GE(std::log2(e2 / e3), 1.8);
}

TEST(Poisson, ConvergenceOrderOnCatalog) {
  for (const auto& M : {euclidean(2), hyperbolic(2, 1.0), sphere(2, 0.5), warped_product(power_cusp_warp(), 1.0)}) {
    const double r = M.kind == ManifoldKind::warped_product ? 0.5 : 1.0;
    const double e1 = manufactured_error(M, fields::trig_mix(), r, r / 16);
    const double e2 = manufactured_error(M, fields::trig_mix(), r, r / 32);
    const double e3 = manufactured_error(M, fields::trig_mix(), r, r / 64);
    EXPECT_GE(std::log2(e2 / e3), 1.8) << M.name() << ": " << e1 << " " << e2 << " " << e3;
  }
}

TEST(Poisson, MaximumPrincipleSurrogate) {
  for (const auto& M : {euclidean(2), sphere(2, 1.0), hyperbolic(2, 1.0)}) {
    const double h = 1.0 / 32;
    const auto g = build_ball_grid(M, M.base_point, 1.0, h);
    const auto b = BoundaryField::sample(g, fields::trig_mix());
    const auto u = solve_dirichlet(g, ScalarField(g, 0.0), b);
    const auto [lo, hi] = std::minmax_element(b.values().begin(), b.values().end());
    for (double v : u.values()) {
      EXPECT_GE(v, *lo - 10 * h * h) << M.name();
      EXPECT_LE(v, *hi + 10 * h * h) << M.name();
    }
  }
}

TEST(Poisson, IterativePathAndSolverError) {
  const auto g = build_ball_grid(euclidean(3), zero_vec(3), 1.0, 1.0 / 12);
  const auto p = manufactured_problem(euclidean(3), fields::trig_mix(), g);
  SolverOptions it;
  it.direct_limit = 0;
  SolverStats st;
  const auto u = solve_dirichlet(g, p.f, p.boundary, it, &st);
  EXPECT_EQ(st.method, "bicgstab_ilut");
  EXPECT_LE(st.residual, 1e-10);
  EXPECT_LT(sup_difference(u, p.psi_ref), 1e-2);

  it.max_iterations = 1;
  try {
    solve_dirichlet(g, p.f, p.boundary, it);
    FAIL() << "expected a solver error";
  } catch (const SolverError& e) {
    EXPECT_EQ(e.code(), Errc::solver);
    EXPECT_GT(e.residual(), 1e-10);
  }
}
