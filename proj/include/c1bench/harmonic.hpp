#pragma once

// Harmonic coordinates on geodesic balls and the W^{1,p} harmonic radius.
//
// Candidate coordinates y^k solve Delta_g y^k = 0 on B(x, r) with the chart
// coordinates x^k - x_0^k as boundary data and are then centred. The metric
// in the new chart is g^{kl}_y = J^k_a g^{ab} J^l_b with J = dy/dx. Its
// y-derivatives come from the chain rule d/dy^c = (J^{-1})^a_c d/dx^a, and
// the L^p norm over the image U = y(B) is computed as an integral over the
// ball with weight |det J|.

#include "c1bench/poisson.hpp"

#include <vector>

namespace c1bench {

struct HarmonicChartResult {
  std::vector<ScalarField> coords;
  double radius = 0.0;
  double h = 0.0;
  double harmonic_residual = 0.0;  // max_k sup |L y^k| over interior nodes
  double center_offset = 0.0;      // max_k |y^k(x)| after centring
  // Filled by check_accuracy:
  double p = 0.0;
  double Q = 0.0;
  bool q_metric_ok = false;
  bool deriv_ok = false;
  double q_achieved = 0.0;  // smallest Q passing both conditions
  double metric_pinch = 0.0;   // max over nodes of max(lambda_max, 1 / lambda_min)
  double deriv_measure = 0.0;  // r^{1 - m/p} max_{k,l,c} ||d_c g^{kl}||_{L^p(U)}
};

inline HarmonicChartResult build_harmonic_coords(const ModelManifold& M, const Vec& x, double r, double h,
                                                 const SolverOptions& options = {}) {
  const auto grid = build_ball_grid(M, x, r, h);
  DirichletSolver solver(assemble_laplacian(grid), options);
  HarmonicChartResult out;
  out.radius = r;
  out.h = h;
  const int m = M.dim;
  const int c = grid->center_node();
  for (int k = 0; k < m; ++k) {
    std::vector<double> b(grid->boundary_size());
    for (std::size_t j = 0; j < b.size(); ++j) b[j] = grid->boundary_point(j)[k] - x[k];
    auto y = solver.solve(ScalarField(grid, 0.0), BoundaryField(grid, b));
    const double shift = y[c];
    for (double& v : y.values()) v -= shift;
    for (double& v : b) v -= shift;
    const auto Ly = solver.op().apply(y, BoundaryField(grid, b));
    for (std::size_t i = 0; i < grid->size(); ++i)
      if (grid->is_interior(i)) out.harmonic_residual = std::max(out.harmonic_residual, std::abs(Ly[i]));
    out.center_offset = std::max(out.center_offset, std::abs(y[c]));
    out.coords.push_back(std::move(y));
  }
  return out;
}

/// Measures the two accuracy conditions for exponent p and records whether
/// Q^{-1} delta <= (g^{kl}_y) <= Q delta and r^{1-m/p} max ||d g^{kl}_y||_p <= Q - 1.
inline HarmonicChartResult check_accuracy(HarmonicChartResult res, double p, double Q) {
  require(!res.coords.empty(), Errc::precondition, "harmonic coordinates have not been built");
  const BallGrid& g = *res.coords[0].grid();
  const int m = g.dim();
  require(p > m, Errc::parameter, "p must exceed the dimension");
  require(Q > 1.0, Errc::parameter, "Q must exceed 1");
  const std::size_t n = g.size();

  std::vector<Mat> Jinv(n);
  std::vector<double> detJ(n);
  std::vector<std::vector<double>> gy(m * m, std::vector<double>(n));
  double pinch = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    Mat J(m, m);
    for (int k = 0; k < m; ++k)
      for (int a = 0; a < m; ++a) J(k, a) = first_difference(g, res.coords[k].values(), i, a);
    detJ[i] = J.determinant();
    if (!(std::abs(detJ[i]) >= 1e-10)) throw Error(Errc::degeneracy, "harmonic chart Jacobian is singular");
    Jinv[i] = J.inverse();
    const Mat G = J * checked_inverse(g.manifold().chart.metric(g.node(i))) * J.transpose();
    Eigen::SelfAdjointEigenSolver<Mat> es(G, Eigen::EigenvaluesOnly);
    pinch = std::max({pinch, es.eigenvalues().maxCoeff(), 1.0 / es.eigenvalues().minCoeff()});
    for (int k = 0; k < m; ++k)
      for (int l = 0; l < m; ++l) gy[k * m + l][i] = G(k, l);
  }

  std::vector<int> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = static_cast<int>(i);
  const double cell = std::pow(g.spacing(), m);
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = std::abs(detJ[i]) * cell;

  double dmax = 0.0;
  for (int kl = 0; kl < m * m; ++kl) {
    std::vector<std::vector<double>> dx(m);
    for (int a = 0; a < m; ++a) dx[a] = partial(g, gy[kl], a);
    for (int c = 0; c < m; ++c) {
      std::vector<double> dy(n);
      for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (int a = 0; a < m; ++a) s += Jinv[i](a, c) * dx[a][i];
        dy[i] = s;
      }
      dmax = std::max(dmax, lq_norm(dy, all, w, p));
    }
  }
  res.p = p;
  res.Q = Q;
  res.metric_pinch = pinch;
  res.deriv_measure = std::pow(res.radius, 1.0 - m / p) * dmax;
  res.q_metric_ok = pinch <= Q;
  res.deriv_ok = res.deriv_measure <= Q - 1.0;
  res.q_achieved = std::max(pinch, 1.0 + res.deriv_measure);
  return res;
}

struct HarmonicRadiusOptions {
  int bisection_steps = 12;
  double cells_per_radius = 32.0;  // h = r / cells_per_radius
  SolverOptions solver;
};

struct HarmonicRadiusResult {
  double radius = 0.0;  // largest tested radius that passed (a lower bound)
  std::vector<double> tested;
  std::vector<bool> passed;
  double max_harmonic_residual = 0.0;
};

inline bool harmonic_chart_passes(const ModelManifold& M, const Vec& x, double r, double p, double Q,
                                  const HarmonicRadiusOptions& opt, double* residual = nullptr) {
  const auto res = check_accuracy(build_harmonic_coords(M, x, r, r / opt.cells_per_radius, opt.solver), p, Q);
  if (residual) *residual = std::max(*residual, res.harmonic_residual);
  return res.q_metric_ok && res.deriv_ok;
}

/// Bisection on (0, r_max]: r_max itself is tried first, then
/// `bisection_steps` halvings; the largest passing radius is returned.
inline HarmonicRadiusResult estimate_harmonic_radius(const ModelManifold& M, const Vec& x, double p, double Q,
                                                     double r_max, const HarmonicRadiusOptions& opt = {}) {
  require(p > M.dim, Errc::parameter, "p must exceed the dimension");
  require(Q > 1.0, Errc::parameter, "Q must exceed 1");
  require(r_max > 0.0, Errc::parameter, "r_max must be positive");
  if (!(r_max < M.inj_radius_at(x))) throw Error(Errc::chart, "r_max reaches the injectivity radius");
  HarmonicRadiusResult out;
  auto test = [&](double r) {
    bool ok = false;
    try {
      ok = harmonic_chart_passes(M, x, r, p, Q, opt, &out.max_harmonic_residual);
    } catch (const Error& e) {
      if (e.code() != Errc::degeneracy && e.code() != Errc::resolution) throw;
    }
    out.tested.push_back(r);
    out.passed.push_back(ok);
    return ok;
  };
  if (test(r_max)) {
    out.radius = r_max;
    return out;
  }
  double lo = 0.0, hi = r_max;
  for (int k = 0; k < opt.bisection_steps; ++k) {
    const double mid = 0.5 * (lo + hi);
    if (test(mid))
      lo = mid;
    else
      hi = mid;
  }
  out.radius = lo;
  return out;
}

struct AndersonCheegerResult {
  double radius = 0.0;       // estimated harmonic radius, r_max = min(1, 0.99 inj)
  double numerator = 0.0;    // 1 ^ radius
  double denominator = 0.0;  // inj ^ 1 ^ C
  double ratio = 0.0;
  double ricci_min = 0.0;    // sampled on the tested ball
};

/// (1 ^ r_{p,Q}(x)) / (r_inj(x) ^ 1 ^ C) after checking Ric >= -1 / C^2 on the
/// tested ball by sampling.
inline AndersonCheegerResult anderson_cheeger_ratio(const ModelManifold& M, const Vec& x, double p, double Q, double C,
                                                    const HarmonicRadiusOptions& opt = {}) {
  require(C > 0.0, Errc::parameter, "C must be positive");
  const double inj = M.inj_radius_at(x);
  const double r_max = std::min(1.0, 0.99 * inj);
  AndersonCheegerResult out;
  out.ricci_min = curvature_bounds_on_ball(M, x, r_max, kDefaultEpsilon, CurvatureSampling{17, 0, 0}).rho;
  if (out.ricci_min < -1.0 / (C * C) - 1e-12)
    throw Error(Errc::precondition, "Ricci curvature falls below -1/C^2 on the tested ball");
  out.radius = estimate_harmonic_radius(M, x, p, Q, r_max, opt).radius;
  out.numerator = std::min(1.0, out.radius);
  out.denominator = std::min({inj, 1.0, C});
  out.ratio = out.numerator / out.denominator;
  return out;
}

}  // namespace c1bench
