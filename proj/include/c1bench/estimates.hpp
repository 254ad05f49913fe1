#pragma once

// Empirical-constant measurements for the gradient estimates and the
// supporting lemmas: the one-dimensional Taylor bound, the Euclidean
// estimate, the curvature-dependent estimate on geodesic balls, its scaling
// behaviour, and the Morrey and interior W^{2,q} ratios.

#include "c1bench/poisson.hpp"

#include <functional>
#include <string>

namespace c1bench {

/// One instance of |d psi| <= (C / factor) (sup |Delta psi| + sup |psi|),
/// recorded as c_emp = lhs * factor / (rhs_f + rhs_psi).
struct EstimateReport {
  std::string kind;  // "theorem1" or "euclidean"
  std::string manifold;
  std::string field;
  Vec x;
  double R0 = 0.0;
  double epsilon = kDefaultEpsilon;
  double h = 0.0;
  double lhs = 0.0;
  double rhs_f = 0.0;
  double rhs_psi = 0.0;
  double factor = 0.0;
  double c_emp = 0.0;
  CurvatureBounds bounds;  // theorem1 only
  std::size_t lhs_nodes = 0;
  std::size_t rhs_nodes = 0;
};

inline double empirical_constant(double lhs, double factor, double rhs) {
  if (lhs == 0.0) return 0.0;
  if (rhs == 0.0) return kInf;
  return lhs * factor / rhs;
}

/// min(1, min(pi / sqrt(a1), R0) / 2, sqrt(1 / a2)).
inline double theorem1_factor(const CurvatureBounds& b, double R0) {
  require(R0 > 0.0, Errc::parameter, "R0 must be positive");
  require(b.a1 > 0.0 && b.a2 > 0.0, Errc::parameter, "curvature constants must be positive");
  return std::min({1.0, 0.5 * std::min(kPi / std::sqrt(b.a1), R0), std::sqrt(1.0 / b.a2)});
}

struct Theorem1Options {
  double epsilon = kDefaultEpsilon;
  double h = 0.0;  // 0 selects R0 / 64
  CurvatureSampling sampling;
};

/// Gradient sup over B(x, R0/4) against sup |Delta_g psi| and sup |psi| over
/// B(x, R0/2), with the factor from curvature sampled on B(x, R0). Balls are
/// coordinate balls of a normal chart (closed, so lattice points on the
/// sphere count); f = Delta_g psi is evaluated exactly.
inline EstimateReport theorem1_check(const ModelManifold& M, const Vec& x, double R0, const ClosedForm& psi,
                                     const Theorem1Options& opt = {}) {
  require(R0 > 0.0, Errc::parameter, "R0 must be positive");
  const double h = opt.h > 0.0 ? opt.h : R0 / 64.0;
  EstimateReport r;
  r.kind = "theorem1";
  r.manifold = M.name();
  r.field = psi.id();
  r.x = x;
  r.R0 = R0;
  r.epsilon = opt.epsilon;
  r.h = h;
  r.bounds = curvature_bounds_on_ball(M, x, R0, opt.epsilon, opt.sampling);
  r.factor = theorem1_factor(r.bounds, R0);

  const double rc = M.coordinate_radius(R0);
  const auto grid = build_ball_grid(M, x, 0.5 * rc + 2.0 * h, h);
  const auto phi = ScalarField::sample(grid, psi);
  const auto grad = gradient_norm(phi);
  const auto inner = grid->nodes_in(BallSpec{x, 0.25 * rc});
  const auto middle = grid->nodes_in(BallSpec{x, 0.5 * rc});
  for (int i : inner) r.lhs = std::max(r.lhs, grad[i]);
  for (int i : middle) {
    r.rhs_f = std::max(r.rhs_f, std::abs(exact_laplacian(M, psi, grid->node(i))));
    r.rhs_psi = std::max(r.rhs_psi, std::abs(phi[i]));
  }
  r.lhs_nodes = inner.size();
  r.rhs_nodes = middle.size();
  r.c_emp = empirical_constant(r.lhs, r.factor, r.rhs_f + r.rhs_psi);
  return r;
}

/// The Euclidean form: sup over B(x, R0/2) of |d psi| against sup |psi| +
/// sup |Delta psi| over B(x, R0), factor min(R0 / (2 sqrt m), 1).
inline EstimateReport estimate_euclidean(const ClosedForm& psi, const Vec& x, double R0, double h = 0.0) {
  require(R0 > 0.0, Errc::parameter, "R0 must be positive");
  const int m = static_cast<int>(x.size());
  const auto M = euclidean(m);
  if (h <= 0.0) h = R0 / 64.0;
  EstimateReport r;
  r.kind = "euclidean";
  r.manifold = M.name();
  r.field = psi.id();
  r.x = x;
  r.R0 = R0;
  r.h = h;
  r.factor = std::min(R0 / (2.0 * std::sqrt(static_cast<double>(m))), 1.0);
  const auto grid = build_ball_grid(M, x, R0 + 2.0 * h, h);
  const auto phi = ScalarField::sample(grid, psi);
  const auto grad = gradient_norm(phi);
  const auto inner = grid->nodes_in(BallSpec{x, 0.5 * R0});
  const auto outer = grid->nodes_in(BallSpec{x, R0});
  for (int i : inner) r.lhs = std::max(r.lhs, grad[i]);
  for (int i : outer) {
    r.rhs_f = std::max(r.rhs_f, std::abs(exact_laplacian(M, psi, grid->node(i))));
    r.rhs_psi = std::max(r.rhs_psi, std::abs(phi[i]));
  }
  r.lhs_nodes = inner.size();
  r.rhs_nodes = outer.size();
  r.c_emp = empirical_constant(r.lhs, r.factor, r.rhs_f + r.rhs_psi);
  return r;
}

// ---------------------------------------------------------------------------
// Scaling

struct ScalingResult {
  double lambda = 1.0;
  EstimateReport base;
  EstimateReport scaled;
  double c_emp = 0.0;
  double c_emp_scaled = 0.0;
  double relative_difference = 0.0;
};

/// Runs theorem1_check on (M, g) and on (M, lambda^2 g) with R0 -> lambda R0,
/// epsilon -> epsilon / lambda^2 and h -> lambda h, the second in the normal
/// chart y = lambda x where psi reads psi(y / lambda).
inline ScalingResult scaling_invariance(const ModelManifold& M, const Vec& x, double R0, const ClosedForm& psi,
                                        double lambda, const Theorem1Options& opt = {}) {
  require(lambda >= 0.25 && lambda <= 4.0, Errc::parameter, "lambda must lie in [0.25, 4]");
  ScalingResult s;
  s.lambda = lambda;
  Theorem1Options o = opt;
  if (o.h <= 0.0) o.h = R0 / 64.0;
  s.base = theorem1_check(M, x, R0, psi, o);
  Theorem1Options os = o;
  os.epsilon = o.epsilon / (lambda * lambda);
  os.h = o.h * lambda;
  s.scaled = theorem1_check(rescaled(M, lambda), x * lambda, lambda * R0, psi.rescaled(lambda), os);
  s.c_emp = s.base.c_emp;
  s.c_emp_scaled = s.scaled.c_emp;
  s.relative_difference =
      s.c_emp == s.c_emp_scaled ? 0.0 : std::abs(s.c_emp_scaled - s.c_emp) / std::max(std::abs(s.c_emp), 1e-300);
  return s;
}

// ---------------------------------------------------------------------------
// One-dimensional bound |u'(a)| <= (2/r)(sup |u| + sup |u''|) on (a - r, a + r)

struct Estimate1D {
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
};

/// Sups are taken over the n_samples interval midpoints a - r + (k + 1/2) 2r / n.
inline Estimate1D estimate_1d(const ClosedForm& u, double a, double r, int n_samples) {
  require(r > 0.0 && r <= 1.0, Errc::parameter, "r must lie in (0, 1]");
  require(n_samples >= 1, Errc::parameter, "need at least one sample");
  Estimate1D e;
  e.lhs = std::abs(u.jet(make_vec({a})).grad[0]);
  double su = 0.0, s2 = 0.0;
  const double step = 2.0 * r / n_samples;
  for (int k = 0; k < n_samples; ++k) {
    const auto j = u.jet(make_vec({a - r + (k + 0.5) * step}));
    su = std::max(su, std::abs(j.value));
    s2 = std::max(s2, std::abs(j.hess(0, 0)));
  }
  e.rhs = (2.0 / r) * (su + s2);
  e.ratio = e.lhs == 0.0 ? 0.0 : e.lhs / e.rhs;
  return e;
}

/// Random test function: a polynomial of degree <= 6 or a three-term sine
/// sum, coefficients (and frequencies, phases) uniform in [-5, 5].
inline ClosedForm random_1d_function(Rng& rng) {
  if (rng.uniform() < 0.5) {
    const int degree = static_cast<int>(rng.below(7));
    std::vector<double> c(degree + 1);
    for (double& v : c) v = rng.uniform(-5.0, 5.0);
    return fields::polynomial_1d(c);
  }
  std::vector<std::array<double, 3>> terms(3);
  for (auto& t : terms) t = {rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0)};
  return fields::trig_1d(terms);
}

struct Estimate1DCorpus {
  std::size_t count = 0;
  int n_samples = 0;
  double max_ratio = 0.0;
  double bound = 0.0;  // 1 + 10 / n_samples
  std::size_t violations = 0;
};

/// `count` seeded draws of (u, a in [-2, 2], r in (0, 1]).
inline Estimate1DCorpus estimate_1d_corpus(std::uint64_t seed, std::size_t count, int n_samples) {
  Rng rng(seed);
  Estimate1DCorpus c;
  c.count = count;
  c.n_samples = n_samples;
  c.bound = 1.0 + 10.0 / n_samples;
  for (std::size_t k = 0; k < count; ++k) {
    const auto u = random_1d_function(rng);
    const double a = rng.uniform(-2.0, 2.0);
    const double r = rng.uniform_open_left();
    const auto e = estimate_1d(u, a, r, n_samples);
    c.max_ratio = std::max(c.max_ratio, e.ratio);
    if (e.ratio > c.bound) ++c.violations;
  }
  return c;
}

// ---------------------------------------------------------------------------
// Morrey: [u]_{0,alpha;B_R} <= C K with K = max_k ||d_k u||_{L^p(Omega)}

struct MorreyResult {
  double p = 0.0;
  double alpha = 0.0;
  double seminorm = 0.0;
  double K = 0.0;
  double ratio = 0.0;
  bool sampled = false;
};

/// u on the Euclidean grid of Omega = B(center, omega_radius); the ball is
/// B(center, R) with B(center, 2R) inside Omega.
inline MorreyResult morrey_ratio(const ScalarField& u, double p, double R) {
  const BallGrid& g = *u.grid();
  const int m = g.dim();
  require(p > m, Errc::parameter, "Morrey needs p > m");
  require(R > 0.0 && 2.0 * R <= g.radius() * (1.0 + 1e-12), Errc::parameter, "B_2R must lie inside Omega");
  MorreyResult out;
  out.p = p;
  out.alpha = (p - m) / p;
  const auto ball = g.nodes_in(BallSpec{g.center(), R});
  if (ball.empty()) throw Error(Errc::region, "ball contains no grid node");
  out.seminorm = holder_seminorm(g, u.values(), ball, out.alpha, &out.sampled);
  std::vector<int> all(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) all[i] = static_cast<int>(i);
  const auto w = volume_weights(g, all);
  for (int a = 0; a < m; ++a) out.K = std::max(out.K, lq_norm(partial(g, u.values(), a), all, w, p));
  out.ratio = out.seminorm == 0.0 ? 0.0 : out.seminorm / out.K;
  return out;
}

inline MorreyResult morrey_ratio(const ClosedForm& u, int m, double p, double omega_radius, double R, double h) {
  const auto grid = build_ball_grid(euclidean(m), zero_vec(m), omega_radius, h);
  return morrey_ratio(ScalarField::sample(grid, u), p, R);
}

// ---------------------------------------------------------------------------
// Interior estimate ||u||_{W^{2,q}(B1)} <= C ||P u||_{L^q(B2)} + C ||u||_{L^2(B2)}

using MatrixField = std::function<Mat(const Vec&)>;
using ScalarFunction = std::function<double(const Vec&)>;

inline constexpr double kEllipticityBound = 0.25;

struct InteriorEstimateResult {
  double w2q_b1 = 0.0;
  double pu_lq_b2 = 0.0;
  double u_l2_b2 = 0.0;
  double ratio = 0.0;
  double min_ellipticity = 0.0;
};

/// P u = a^{ij} d_i d_j u + b u by finite differences on the Euclidean grid of
/// B_2(0); (a^{ij}) must dominate 1/4 at every node.
inline InteriorEstimateResult interior_estimate_ratio(const MatrixField& a, const ScalarFunction& b,
                                                      const ClosedForm& u, int m, double q, double h) {
  require(q >= 1.0, Errc::parameter, "q must be at least 1");
  const auto grid = build_ball_grid(euclidean(m), zero_vec(m), 2.0, h);
  const BallGrid& g = *grid;
  InteriorEstimateResult r;
  r.min_ellipticity = kInf;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Mat A = a(g.node(i));
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (A + A.transpose()), Eigen::EigenvaluesOnly);
    r.min_ellipticity = std::min(r.min_ellipticity, es.eigenvalues().minCoeff());
  }
  if (r.min_ellipticity < kEllipticityBound)
    throw Error(Errc::precondition, "coefficient matrix is not bounded below by 1/4");

  const auto uf = ScalarField::sample(grid, u);
  const auto& uv = uf.values();
  std::vector<std::vector<double>> d2(m * m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) d2[i * m + j] = second_partial(g, uv, i, j);
  std::vector<double> pu(g.size());
  for (std::size_t n = 0; n < g.size(); ++n) {
    const Mat A = a(g.node(n));
    double s = b(g.node(n)) * uv[n];
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) s += A(i, j) * d2[i * m + j][n];
    pu[n] = s;
  }
  const BallSpec b1{zero_vec(m), 1.0}, b2{zero_vec(m), 2.0};
  r.w2q_b1 = norms(uf, b1, q, 1.0).w2q_norm;
  const auto all = g.nodes_in(b2);
  const auto w = volume_weights(g, all);
  r.pu_lq_b2 = lq_norm(pu, all, w, q);
  r.u_l2_b2 = lq_norm(uv, all, w, 2.0);
  const double den = r.pu_lq_b2 + r.u_l2_b2;
  r.ratio = r.w2q_b1 == 0.0 ? 0.0 : r.w2q_b1 / den;
  return r;
}

}  // namespace c1bench
