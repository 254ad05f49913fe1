#pragma once

// Exponential-map pullback of a catalog metric to a tangent ball.
//
// Tangent vectors are written w in an orthonormal frame E = g_x^{-1/2}, so
// |E w|_g = |w|. The pullback metric at w is D^T g(exp_x(E w)) D with
// D = d/dw exp_x(E w) taken by central differences.

#include "c1bench/manifold.hpp"
#include "c1bench/rng.hpp"

#include <Eigen/Eigenvalues>

#include <fstream>
#include <iomanip>
#include <string>
#include <vector>

namespace c1bench {

inline constexpr double kDexpStep = 1e-4;
inline constexpr double kConjugateThreshold = 1e-10;

struct PullbackGridSpec {
  int nodes_per_axis = 17;  // lattice over [-R, R]^m, nodes with |w| < R kept
  double R0 = 0.0;          // curvature-sampling radius; 0 picks 1.5 R
  double epsilon = kDefaultEpsilon;
  double steps_per_unit = 64.0;  // RK4 steps per unit geodesic length, at least 16
};

struct PullbackMetric {
  ModelManifold base;
  Vec x;
  double R = 0.0;
  double R0 = 0.0;
  Mat frame;             // E with E^T g_x E = I
  CurvatureBounds bounds;
  double steps_per_unit = 64.0;
  MetricChart gbar;      // on {|w| < R}
  std::vector<Vec> nodes;
  std::vector<Mat> gbar_nodes;
  std::vector<double> jacobi_nodes;

  int dim() const { return base.dim; }
};

struct PullbackSample {
  Vec image;    // exp_x(E w) in base coordinates
  Mat dexp;     // d/dw exp_x(E w)
  Mat gbar;
  double jacobi = 0.0;  // det(dexp) sqrt(det g(image)) = sqrt(det gbar) with sign
};

inline int exp_steps_for(double length, double steps_per_unit) {
  return std::max(16, static_cast<int>(std::ceil(steps_per_unit * length)));
}

inline Vec lift_point(const PullbackMetric& pm, const Vec& w) {
  return exp_map(pm.base, pm.x, pm.frame * w, exp_steps_for(w.norm(), pm.steps_per_unit));
}

inline PullbackSample pullback_sample(const ModelManifold& M, const Vec& x, const Mat& E, const Vec& w,
                                      double steps_per_unit = 64.0) {
  const int m = M.dim;
  const int steps = exp_steps_for(w.norm(), steps_per_unit);
  PullbackSample s;
  s.image = exp_map(M, x, E * w, steps);
  s.dexp.resize(m, m);
  for (int j = 0; j < m; ++j) {
    Vec wp = w, wm = w;
    wp[j] += kDexpStep;
    wm[j] -= kDexpStep;
    s.dexp.col(j) = (exp_map(M, x, E * wp, steps) - exp_map(M, x, E * wm, steps)) / (2.0 * kDexpStep);
  }
  const Mat g = M.chart.metric(s.image);
  const Mat gb = s.dexp.transpose() * g * s.dexp;
  s.gbar = 0.5 * (gb + gb.transpose());
  s.jacobi = s.dexp.determinant() * std::sqrt(g.determinant());
  return s;
}

inline PullbackSample pullback_sample(const PullbackMetric& pm, const Vec& w) {
  return pullback_sample(pm.base, pm.x, pm.frame, w, pm.steps_per_unit);
}

/// |D exp_x(E w)[d]|_g by one central difference along d.
inline double pullback_speed(const PullbackMetric& pm, const Vec& w, const Vec& d) {
  const double n = d.norm();
  if (n == 0.0) return 0.0;
  const int steps = exp_steps_for(w.norm(), pm.steps_per_unit);
  const Vec u = d / n;
  const Vec p = exp_map(pm.base, pm.x, pm.frame * w, steps);
  const Vec dv = (exp_map(pm.base, pm.x, pm.frame * (w + kDexpStep * u), steps) -
                  exp_map(pm.base, pm.x, pm.frame * (w - kDexpStep * u), steps)) /
                 (2.0 * kDexpStep);
  return n * metric_norm(pm.base, p, dv);
}

namespace detail {

inline Mat orthonormal_frame(const Mat& g) {
  Eigen::SelfAdjointEigenSolver<Mat> es(g);
  return es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
         es.eigenvectors().transpose();
}

}  // namespace detail

/// Requires R < min(pi / sqrt(A1), R0) with A1 sampled on the coordinate
/// ball of radius R0 about x.
inline PullbackMetric build_pullback(const ModelManifold& M, const Vec& x, double R,
                                     const PullbackGridSpec& spec = {}) {
  require(M.dim == 2 || M.dim == 3, Errc::unsupported, "pullback metrics are built for m in {2, 3}");
  require(R > 0.0, Errc::parameter, "R must be positive");
  require(spec.nodes_per_axis >= 2, Errc::parameter, "need at least two nodes per axis");
  check_domain(M, x);
  PullbackMetric pm;
  pm.base = M;
  pm.x = x;
  pm.R = R;
  pm.R0 = spec.R0 > 0.0 ? spec.R0 : 1.5 * R;
  pm.steps_per_unit = spec.steps_per_unit;
  pm.bounds = sampled_curvature_bounds(M, x, M.coordinate_radius(pm.R0), spec.epsilon);
  const double limit = std::min(kPi / std::sqrt(pm.bounds.a1), pm.R0);
  if (!(R < limit)) {
    std::ostringstream os;
    os << "R = " << R << " violates R < min(pi / sqrt(A1), R0) = " << limit;
    throw Error(Errc::hypothesis, os.str());
  }
  const int m = M.dim;
  pm.frame = detail::orthonormal_frame(M.chart.metric(x));

  const int n = spec.nodes_per_axis;
  const double step = 2.0 * R / (n - 1);
  std::array<int, kMaxDim> idx{};
  while (true) {
    Vec w(m);
    for (int i = 0; i < m; ++i) w[i] = -R + step * idx[i];
    if (w.norm() < R) {
      const auto s = pullback_sample(pm, w);
      if (!(s.jacobi >= kConjugateThreshold)) {
        std::ostringstream os;
        os << "dexp is singular at |w| = " << w.norm() << " (Jacobi determinant " << s.jacobi << ")";
        throw Error(Errc::conjugate_point, os.str());
      }
      pm.nodes.push_back(w);
      pm.gbar_nodes.push_back(s.gbar);
      pm.jacobi_nodes.push_back(s.jacobi);
    }
    int a = 0;
    while (a < m && ++idx[a] == n) idx[a++] = 0;
    if (a == m) break;
  }

  pm.gbar.dim = m;
  pm.gbar.lo = Vec::Constant(m, -R);
  pm.gbar.hi = Vec::Constant(m, R);
  pm.gbar.max_radius = R;
  pm.gbar.metric = [M, x, E = pm.frame, spu = pm.steps_per_unit](const Vec& w) {
    return pullback_sample(M, x, E, w, spu).gbar;
  };
  return pm;
}

namespace detail {

// Composite Simpson rule for the gbar-length of the segment a -> b.
inline double segment_length(const PullbackMetric& pm, const Vec& a, const Vec& b, int intervals = 16) {
  const Vec d = b - a;
  double s = 0.0;
  for (int k = 0; k <= intervals; ++k) {
    const double t = static_cast<double>(k) / intervals;
    const double wgt = (k == 0 || k == intervals) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    s += wgt * pullback_speed(pm, a + t * d, d);
  }
  return s / (3.0 * intervals);
}

// g-length of the exp image of the segment a -> b: chords of the image
// polyline measured with the base metric at the chord midpoint.
inline double image_length(const PullbackMetric& pm, const Vec& a, const Vec& b, int pieces = 64) {
  double s = 0.0;
  Vec prev = lift_point(pm, a);
  for (int k = 1; k <= pieces; ++k) {
    const Vec cur = lift_point(pm, a + (static_cast<double>(k) / pieces) * (b - a));
    s += metric_norm(pm.base, 0.5 * (prev + cur), cur - prev);
    prev = cur;
  }
  return s;
}

}  // namespace detail

/// max over random rays of | L_gbar(t -> t v) - |v| |, |v| uniform in (0, R).
inline double verify_radial_distance(const PullbackMetric& pm, int n_rays = 8, std::uint64_t seed = 0) {
  Rng rng(seed);
  double dev = 0.0;
  for (int k = 0; k < n_rays; ++k) {
    const Vec v = rng.unit_vec(pm.dim()) * rng.uniform(0.05, 0.999) * pm.R;
    dev = std::max(dev, std::abs(detail::segment_length(pm, Vec::Zero(pm.dim()), v) - v.norm()));
  }
  return dev;
}

/// max relative mismatch between gbar-lengths of random polygonal curves in
/// the tangent ball and g-lengths of their exp images.
inline double verify_local_isometry(const PullbackMetric& pm, int n_curves = 4, std::uint64_t seed = 0,
                                    int segments = 3) {
  Rng rng(seed);
  const int m = pm.dim();
  double worst = 0.0;
  for (int c = 0; c < n_curves; ++c) {
    Vec a = rng.in_ball(m, 0.7 * pm.R);
    double lbar = 0.0, limg = 0.0;
    for (int s = 0; s < segments; ++s) {
      Vec b = a + rng.unit_vec(m) * rng.uniform(0.02, 0.1) * pm.R;
      if (b.norm() >= 0.95 * pm.R) b = a - (b - a);
      lbar += detail::segment_length(pm, a, b);
      limg += detail::image_length(pm, a, b);
      a = b;
    }
    worst = std::max(worst, std::abs(lbar - limg) / limg);
  }
  return worst;
}

/// max over random v with |v| < R of d_g(x, exp_x(v)) - |v|, floored at 0.
inline double image_ball_excess(const PullbackMetric& pm, int n = 32, std::uint64_t seed = 0) {
  Rng rng(seed);
  double worst = 0.0;
  for (int k = 0; k < n; ++k) {
    const Vec w = rng.in_ball(pm.dim(), pm.R);
    worst = std::max(worst, geodesic_distance(pm.base, pm.x, lift_point(pm, w)) - w.norm());
  }
  return worst;
}

/// Minimum Jacobi determinant over n_rays directions and radii k R / n_radii.
inline double conjugate_point_scan(const PullbackMetric& pm, int n_rays = 8, int n_radii = 16,
                                   std::uint64_t seed = 0) {
  Rng rng(seed);
  double worst = kInf;
  for (int k = 0; k < n_rays; ++k) {
    const Vec u = rng.unit_vec(pm.dim());
    for (int j = 1; j <= n_radii; ++j)
      worst = std::min(worst, pullback_sample(pm, u * (pm.R * j / n_radii)).jacobi);
  }
  return worst;
}

/// CSV rows w1..wm, gbar_ij (i <= j), jacobi.
inline void write_pullback_csv(std::ostream& os, const PullbackMetric& pm) {
  const int m = pm.dim();
  for (int a = 0; a < m; ++a) os << "w" << (a + 1) << ",";
  for (int i = 0; i < m; ++i)
    for (int j = i; j < m; ++j) os << "g" << (i + 1) << (j + 1) << ",";
  os << "jacobi\n" << std::setprecision(17);
  for (std::size_t n = 0; n < pm.nodes.size(); ++n) {
    for (int a = 0; a < m; ++a) os << pm.nodes[n][a] << ",";
    for (int i = 0; i < m; ++i)
      for (int j = i; j < m; ++j) os << pm.gbar_nodes[n](i, j) << ",";
    os << pm.jacobi_nodes[n] << "\n";
  }
}

inline void write_pullback_csv(const std::string& path, const PullbackMetric& pm) {
  std::ofstream os(path);
  if (!os) throw Error(Errc::io, "cannot open " + path);
  write_pullback_csv(os, pm);
}

}  // namespace c1bench
