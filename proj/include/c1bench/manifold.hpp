#pragma once

// Model manifolds and their differential geometry.
//
// Every catalog entry is described by a chart: a closed-form metric on a
// coordinate domain. Sphere and hyperbolic space use geodesic normal
// coordinates at the chart origin, so coordinate radius is geodesic distance
// from the base point inside the injectivity radius. Curvature comes from the
// Christoffel symbols and their derivatives, which are taken either from exact
// (automatically differentiated) metric derivatives or from central finite
// differences with step kFiniteDifferenceStep.

#include "c1bench/core.hpp"
#include "c1bench/jet.hpp"
#include "c1bench/rng.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace c1bench {

inline constexpr double kFiniteDifferenceStep = 1e-4;
inline constexpr double kMaxMetricCondition = 1e12;
inline constexpr double kDefaultEpsilon = 1e-6;

/// Metric and its first two coordinate derivatives at a point.
struct MetricJet {
  Mat g;
  std::array<Mat, kMaxDim> dg;                        // dg[k](i,j) = d_k g_ij
  std::array<std::array<Mat, kMaxDim>, kMaxDim> ddg;  // ddg[k][l](i,j) = d_k d_l g_ij
};

/// A metric in coordinates on an open axis-aligned box, optionally cut down
/// further to an open coordinate ball about the origin.
struct MetricChart {
  int dim = 0;
  Vec lo;
  Vec hi;
  double max_radius = kInf;
  std::function<Mat(const Vec&)> metric;
  std::function<MetricJet(const Vec&)> jet;  // empty when no closed form is known

  bool contains(const Vec& p) const {
    if (p.size() != dim) return false;
    for (int i = 0; i < dim; ++i)
      if (!(p[i] > lo[i] && p[i] < hi[i])) return false;
    return p.norm() < max_radius;
  }
  bool has_closed_form_derivatives() const { return static_cast<bool>(jet); }
};

/// Warp function of a surface of revolution dt^2 + f(t)^2 dtheta^2 with f and
/// its first two derivatives in closed form.
struct WarpFunction {
  std::string name;
  std::function<double(double)> f;
  std::function<double(double)> df;
  std::function<double(double)> d2f;
  double t_min = 0.0;
  double t_max = 1.0;
};

/// f(t) = (1 + t)^(-p); p = 1/2 is the cusp surface used by the divergence bench.
inline WarpFunction power_cusp_warp(double p = 0.5, double t_min = -0.5, double t_max = 1024.0) {
  WarpFunction w;
  std::ostringstream name;
  name << "power_cusp(p=" << p << ")";
  w.name = name.str();
  w.f = [p](double t) { return std::pow(1.0 + t, -p); };
  w.df = [p](double t) { return -p * std::pow(1.0 + t, -p - 1.0); };
  w.d2f = [p](double t) { return p * (p + 1.0) * std::pow(1.0 + t, -p - 2.0); };
  w.t_min = t_min;
  w.t_max = t_max;
  return w;
}

/// f(t) = rho sin(t / rho): the round sphere in geodesic polar coordinates.
inline WarpFunction sine_warp(double rho = 1.0) {
  WarpFunction w;
  w.name = "sine";
  w.f = [rho](double t) { return rho * std::sin(t / rho); };
  w.df = [rho](double t) { return std::cos(t / rho); };
  w.d2f = [rho](double t) { return -std::sin(t / rho) / rho; };
  w.t_min = 0.0;
  w.t_max = kPi * rho;
  return w;
}

enum class ManifoldKind { euclidean, sphere, hyperbolic, flat_torus, warped_product };

inline const char* to_string(ManifoldKind k) {
  switch (k) {
    case ManifoldKind::euclidean: return "euclidean";
    case ManifoldKind::sphere: return "sphere";
    case ManifoldKind::hyperbolic: return "hyperbolic";
    case ManifoldKind::flat_torus: return "flat_torus";
    case ManifoldKind::warped_product: return "warped_product";
  }
  return "unknown";
}

namespace detail {

inline double square(double x) { return x * x; }
inline Jet square(const Jet& x) { return x * x; }


inline Jet warp_eval(const WarpFunction& w, const Jet& t) {
  return chain(t, w.f(t.v), w.df(t.v), w.d2f(t.v));
}
inline double warp_eval(const WarpFunction& w, double t) { return w.f(t); }

// a(u) = (sin(s)/s)^2 for kappa = +1 and (sinh(s)/s)^2 for kappa = -1, s^2 = u.
// q(u) = (1 - a(u)) / u. Both are entire in u; near zero their Taylor series
// are used so automatic differentiation stays finite at the chart origin.
template <class T>
T radial_a(const T& u, int kappa) {
  if (value_of(u) < 1e-3) {
    // sum_{k>=1} (-kappa)^(k-1) 2^(2k-1) u^(k-1) / (2k)!
    T sum = T(0.0);
    T upow = T(1.0);
    double coeff = 1.0;  // 2^(2k-1)/(2k)! at k = 1
    double sign = 1.0;
    for (int k = 1; k <= 7; ++k) {
      sum = sum + upow * (sign * coeff);
      upow = upow * u;
      coeff *= 4.0 / ((2.0 * k + 1.0) * (2.0 * k + 2.0));
      sign *= -kappa;
    }
    return sum;
  }
  using std::sin;
  using std::sinh;
  using std::sqrt;
  const T s = sqrt(u);
  const T ratio = (kappa > 0 ? sin(s) : sinh(s)) / s;
  return ratio * ratio;
}

template <class T>
T radial_q(const T& u, int kappa) {
  if (value_of(u) < 1e-3) {
    // -(sum_{k>=2} (-kappa)^(k-1) 2^(2k-1) u^(k-2) / (2k)!)
    T sum = T(0.0);
    T upow = T(1.0);
    double coeff = 8.0 / 24.0;  // k = 2
    double sign = -kappa;
    for (int k = 2; k <= 8; ++k) {
      sum = sum - upow * (sign * coeff);
      upow = upow * u;
      coeff *= 4.0 / ((2.0 * k + 1.0) * (2.0 * k + 2.0));
      sign *= -kappa;
    }
    return sum;
  }
  return (T(1.0) - radial_a(u, kappa)) / u;
}

// Space form of curvature kappa/rho^2 in normal coordinates:
// g_ij = a delta_ij + (q / rho^2) x_i x_j with u = |x|^2 / rho^2.
struct SpaceFormMetric {
  int m;
  double rho;
  int kappa;
  template <class T>
  void operator()(const T* x, T* g) const {
    T r2 = T(0.0);
    for (int i = 0; i < m; ++i) r2 = r2 + x[i] * x[i];
    const T u = r2 / (rho * rho);
    const T a = radial_a(u, kappa);
    const T b = radial_q(u, kappa) / (rho * rho);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        T gij = b * x[i] * x[j];
        if (i == j) gij = gij + a;
        g[i * m + j] = gij;
      }
  }
};

struct FlatMetric {
  int m;
  template <class T>
  void operator()(const T* /*x*/, T* g) const {
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) g[i * m + j] = T(i == j ? 1.0 : 0.0);
  }
};

struct WarpedMetric {
  WarpFunction warp;
  template <class T>
  void operator()(const T* x, T* g) const {
    const T f = warp_eval(warp, x[0]);
    g[0] = T(1.0);
    g[1] = T(0.0);
    g[2] = T(0.0);
    g[3] = f * f;
  }
};

template <class F>
MetricChart chart_from(int m, F functor, Vec lo, Vec hi, double max_radius) {
  MetricChart c;
  c.dim = m;
  c.lo = std::move(lo);
  c.hi = std::move(hi);
  c.max_radius = max_radius;
  c.metric = [m, functor](const Vec& p) {
    std::array<double, kMaxDim * kMaxDim> g{};
    functor(p.data(), g.data());
    Mat out(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) out(i, j) = g[i * m + j];
    return out;
  };
  c.jet = [m, functor](const Vec& p) {
    std::array<Jet, kMaxDim> x;
    for (int i = 0; i < m; ++i) x[i] = Jet::variable(p[i], i);
    std::array<Jet, kMaxDim * kMaxDim> g;
    functor(x.data(), g.data());
    MetricJet out;
    out.g.resize(m, m);
    for (int k = 0; k < m; ++k) {
      out.dg[k].resize(m, m);
      for (int l = 0; l < m; ++l) out.ddg[k][l].resize(m, m);
    }
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        const Jet& e = g[i * m + j];
        out.g(i, j) = e.v;
        for (int k = 0; k < m; ++k) {
          out.dg[k](i, j) = e.d[k];
          for (int l = 0; l < m; ++l) out.ddg[k][l](i, j) = e.hess(k, l);
        }
      }
    return out;
  };
  return c;
}

inline Vec filled(int m, double v) { return Vec::Constant(m, v); }

}  // namespace detail

/// A catalog manifold: a chart plus closed-form global data.
///
/// Rescaled copies keep the underlying catalog parameters and record a metric
/// factor mu and a coordinate stretch c: the chart metric at y is
/// mu * g_base(y / c), which is the metric (mu c^2) g_base. With mu = 1 the
/// chart stays a normal chart.
struct ModelManifold {
  ManifoldKind kind = ManifoldKind::euclidean;
  int dim = 2;
  double rho = 1.0;          // sphere radius / hyperbolic scale
  Vec periods;               // flat torus
  WarpFunction warp;         // warped product
  double metric_factor = 1.0;
  double coord_scale = 1.0;
  Vec base_point;
  MetricChart chart;

  /// Geodesic length scale relative to the base catalog entry.
  double length_scale() const { return std::sqrt(metric_factor) * coord_scale; }

  bool is_normal_chart() const {
    return metric_factor == 1.0 &&
           (kind == ManifoldKind::sphere || kind == ManifoldKind::hyperbolic ||
            kind == ManifoldKind::euclidean || kind == ManifoldKind::flat_torus);
  }

  /// Injectivity radius (geodesic length). For warped products this is the
  /// half-length pi f(t) of the rotation circle through p, which bounds the
  /// injectivity radius from above.
  double inj_radius_at(const Vec& p) const {
    const double L = length_scale();
    switch (kind) {
      case ManifoldKind::euclidean:
      case ManifoldKind::hyperbolic: return kInf;
      case ManifoldKind::sphere: return kPi * rho * L;
      case ManifoldKind::flat_torus: return 0.5 * periods.minCoeff() * L;
      case ManifoldKind::warped_product: return kPi * warp.f(p[0] / coord_scale) * L;
    }
    return kInf;
  }

  /// Largest coordinate radius about p representing geodesic radius `r`.
  double coordinate_radius(double r) const { return r / std::sqrt(metric_factor); }

  std::optional<double> sec_const() const {
    const double L2 = length_scale() * length_scale();
    switch (kind) {
      case ManifoldKind::euclidean:
      case ManifoldKind::flat_torus: return 0.0;
      case ManifoldKind::sphere: return 1.0 / (rho * rho * L2);
      case ManifoldKind::hyperbolic: return -1.0 / (rho * rho * L2);
      case ManifoldKind::warped_product: return std::nullopt;
    }
    return std::nullopt;
  }

  /// Closed-form Gaussian curvature -f''/f of a warped product at coordinate t.
  double warp_curvature(double t) const {
    const double s = t / coord_scale;
    return -warp.d2f(s) / warp.f(s) / (length_scale() * length_scale());
  }

  std::string name() const {
    std::ostringstream os;
    os << to_string(kind) << "(m=" << dim;
    switch (kind) {
      case ManifoldKind::sphere:
      case ManifoldKind::hyperbolic: os << ", rho=" << rho; break;
      case ManifoldKind::flat_torus:
        os << ", periods=[";
        for (int i = 0; i < periods.size(); ++i) os << (i ? "," : "") << periods[i];
        os << "]";
        break;
      case ManifoldKind::warped_product: os << ", warp=" << warp.name; break;
      default: break;
    }
    if (metric_factor != 1.0) os << ", metric_factor=" << metric_factor;
    if (coord_scale != 1.0) os << ", scale=" << coord_scale;
    os << ")";
    return os.str();
  }
};

inline ModelManifold euclidean(int m) {
  require(m >= 1 && m <= kMaxDim, Errc::parameter, "dimension must be in [1, 4]");
  ModelManifold M;
  M.kind = ManifoldKind::euclidean;
  M.dim = m;
  M.base_point = Vec::Zero(m);
  M.chart = detail::chart_from(m, detail::FlatMetric{m}, detail::filled(m, -kInf),
                               detail::filled(m, kInf), kInf);
  return M;
}

inline ModelManifold sphere(int m, double rho = 1.0) {
  require(m >= 2 && m <= kMaxDim, Errc::parameter, "sphere dimension must be in [2, 4]");
  require(rho > 0.0, Errc::parameter, "sphere radius must be positive");
  ModelManifold M;
  M.kind = ManifoldKind::sphere;
  M.dim = m;
  M.rho = rho;
  M.base_point = Vec::Zero(m);
  M.chart = detail::chart_from(m, detail::SpaceFormMetric{m, rho, +1}, detail::filled(m, -kPi * rho),
                               detail::filled(m, kPi * rho), kPi * rho);
  return M;
}

inline ModelManifold hyperbolic(int m, double rho = 1.0) {
  require(m >= 2 && m <= kMaxDim, Errc::parameter, "hyperbolic dimension must be in [2, 4]");
  require(rho > 0.0, Errc::parameter, "hyperbolic scale must be positive");
  ModelManifold M;
  M.kind = ManifoldKind::hyperbolic;
  M.dim = m;
  M.rho = rho;
  M.base_point = Vec::Zero(m);
  // Beyond ~300 rho the metric coefficients overflow double precision.
  M.chart = detail::chart_from(m, detail::SpaceFormMetric{m, rho, -1}, detail::filled(m, -kInf),
                               detail::filled(m, kInf), 300.0 * rho);
  return M;
}

/// Flat torus R^m / (periods Z^m) charted by its universal cover.
inline ModelManifold flat_torus(const Vec& periods) {
  const int m = static_cast<int>(periods.size());
  require(m >= 1 && m <= kMaxDim, Errc::parameter, "torus dimension must be in [1, 4]");
  require(periods.minCoeff() > 0.0, Errc::parameter, "torus periods must be positive");
  ModelManifold M;
  M.kind = ManifoldKind::flat_torus;
  M.dim = m;
  M.periods = periods;
  M.base_point = Vec::Zero(m);
  M.chart = detail::chart_from(m, detail::FlatMetric{m}, detail::filled(m, -kInf),
                               detail::filled(m, kInf), kInf);
  return M;
}

/// Surface dt^2 + f(t)^2 dtheta^2 in product coordinates (t, theta); theta is
/// 2 pi periodic and left unbounded in the chart.
inline ModelManifold warped_product(const WarpFunction& warp, double base_t = 0.0) {
  require(warp.t_min < warp.t_max, Errc::parameter, "warp domain is empty");
  ModelManifold M;
  M.kind = ManifoldKind::warped_product;
  M.dim = 2;
  M.warp = warp;
  M.base_point = make_vec({base_t, 0.0});
  M.chart = detail::chart_from(2, detail::WarpedMetric{warp}, make_vec({warp.t_min, -kInf}),
                               make_vec({warp.t_max, kInf}), kInf);
  return M;
}

namespace detail {

inline ModelManifold transform(const ModelManifold& base, double mu, double c) {
  ModelManifold M = base;
  M.metric_factor = base.metric_factor * mu;
  M.coord_scale = base.coord_scale * c;
  M.base_point = base.base_point * c;
  const MetricChart b = base.chart;
  MetricChart& ch = M.chart;
  ch.lo = b.lo * c;
  ch.hi = b.hi * c;
  ch.max_radius = b.max_radius * c;
  ch.metric = [b, mu, c](const Vec& y) -> Mat { return mu * b.metric(y / c); };
  if (b.jet) {
    ch.jet = [b, mu, c, m = b.dim](const Vec& y) {
      MetricJet j = b.jet(y / c);
      j.g *= mu;
      for (int k = 0; k < m; ++k) {
        j.dg[k] *= mu / c;
        for (int l = 0; l < m; ++l) j.ddg[k][l] *= mu / (c * c);
      }
      return j;
    };
  }
  return M;
}

}  // namespace detail

/// The manifold (M, lambda^2 g) in the coordinates y = lambda x, which keeps
/// normal charts normal: geodesic distances and coordinate radii scale by
/// lambda, curvature by 1 / lambda^2.
inline ModelManifold rescaled(const ModelManifold& M, double lambda) {
  require(lambda > 0.0, Errc::parameter, "scale factor must be positive");
  return detail::transform(M, 1.0, lambda);
}

/// The manifold (M, mu g) in the same coordinates.
inline ModelManifold with_metric_factor(const ModelManifold& M, double mu) {
  require(mu > 0.0, Errc::parameter, "metric factor must be positive");
  return detail::transform(M, mu, 1.0);
}

// ---------------------------------------------------------------------------
// Metric evaluation helpers

enum class DerivativeMode { automatic, finite_difference };

inline void check_domain(const ModelManifold& M, const Vec& p) {
  if (!M.chart.contains(p)) {
    std::ostringstream os;
    os << "point (" << p.transpose() << ") outside the chart of " << M.name();
    throw Error(Errc::domain, os.str());
  }
}

/// Metric jet by central differences of the metric with step h.
inline MetricJet finite_difference_jet(const MetricChart& chart, const Vec& p,
                                       double h = kFiniteDifferenceStep) {
  const int m = chart.dim;
  MetricJet j;
  j.g = chart.metric(p);
  std::array<Mat, kMaxDim> plus, minus;
  for (int k = 0; k < m; ++k) {
    Vec e = Vec::Zero(m);
    e[k] = h;
    plus[k] = chart.metric(p + e);
    minus[k] = chart.metric(p - e);
    j.dg[k] = (plus[k] - minus[k]) / (2.0 * h);
  }
  for (int k = 0; k < m; ++k) {
    j.ddg[k][k] = (plus[k] - 2.0 * j.g + minus[k]) / (h * h);
    for (int l = k + 1; l < m; ++l) {
      Vec ek = Vec::Zero(m), el = Vec::Zero(m);
      ek[k] = h;
      el[l] = h;
      const Mat d = (chart.metric(p + ek + el) - chart.metric(p + ek - el) - chart.metric(p - ek + el) +
                     chart.metric(p - ek - el)) /
                    (4.0 * h * h);
      j.ddg[k][l] = d;
      j.ddg[l][k] = d;
    }
  }
  return j;
}

inline MetricJet metric_jet(const ModelManifold& M, const Vec& p,
                            DerivativeMode mode = DerivativeMode::automatic) {
  if (mode == DerivativeMode::automatic && M.chart.jet) return M.chart.jet(p);
  return finite_difference_jet(M.chart, p);
}

/// Inverse of a metric matrix after checking positivity and conditioning.
inline Mat checked_inverse(const Mat& g) {
  Eigen::SelfAdjointEigenSolver<Mat> es(g, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0.0)) throw Error(Errc::conditioning, "metric is not positive definite");
  if (hi / lo > kMaxMetricCondition) throw Error(Errc::conditioning, "metric condition number exceeds 1e12");
  return g.inverse();
}

// ---------------------------------------------------------------------------
// Christoffel symbols and curvature

/// Gamma^k_ij stored densely, symmetric in the lower indices.
struct Christoffel {
  int m = 0;
  std::array<double, kMaxDim * kMaxDim * kMaxDim> data{};
  double operator()(int k, int i, int j) const { return data[(k * kMaxDim + i) * kMaxDim + j]; }
  double& operator()(int k, int i, int j) { return data[(k * kMaxDim + i) * kMaxDim + j]; }
};

namespace detail {

inline Christoffel christoffel_from(const MetricJet& j, const Mat& ginv) {
  const int m = static_cast<int>(j.g.rows());
  Christoffel G;
  G.m = m;
  for (int i = 0; i < m; ++i)
    for (int k = i; k < m; ++k) {
      // lowered symbol [ik, l] = 1/2 (d_i g_kl + d_k g_il - d_l g_ik)
      std::array<double, kMaxDim> low{};
      for (int l = 0; l < m; ++l) low[l] = 0.5 * (j.dg[i](k, l) + j.dg[k](i, l) - j.dg[l](i, k));
      for (int a = 0; a < m; ++a) {
        double s = 0.0;
        for (int l = 0; l < m; ++l) s += ginv(a, l) * low[l];
        G(a, i, k) = s;
        G(a, k, i) = s;
      }
    }
  return G;
}

}  // namespace detail

/// Christoffel symbols of the second kind at p.
inline Christoffel christoffel(const ModelManifold& M, const Vec& p,
                               DerivativeMode mode = DerivativeMode::automatic) {
  check_domain(M, p);
  const MetricJet j = metric_jet(M, p, mode);
  return detail::christoffel_from(j, checked_inverse(j.g));
}

/// Riemann tensor at a point, lowered: R(i,j,k,l) = <R(d_i, d_j) d_k, d_l>
/// with R(X,Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z.
struct CurvatureTensor {
  int m = 0;
  Mat g;
  Mat ginv;
  std::array<double, kMaxDim * kMaxDim * kMaxDim * kMaxDim> R{};

  double operator()(int i, int j, int k, int l) const {
    return R[((i * kMaxDim + j) * kMaxDim + k) * kMaxDim + l];
  }

  double inner(const Vec& u, const Vec& v) const { return u.dot(g * v); }

  /// <R(u,v)v,u> / (|u|^2 |v|^2 - <u,v>^2).
  double sectional(const Vec& u, const Vec& v) const {
    const double uu = inner(u, u), vv = inner(v, v), uv = inner(u, v);
    const double gram = uu * vv - uv * uv;
    if (!(gram > 1e-12 * uu * vv) || uu <= 0.0 || vv <= 0.0)
      throw Error(Errc::degeneracy, "tangent vectors are linearly dependent");
    double s = 0.0;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        for (int k = 0; k < m; ++k)
          for (int l = 0; l < m; ++l) s += (*this)(i, j, k, l) * u[i] * v[j] * v[k] * u[l];
    return s / gram;
  }

  /// Ric_jk = sum_i R^i_{ijk}.
  Mat ricci() const {
    Mat ric = Mat::Zero(m, m);
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k) {
        double s = 0.0;
        for (int i = 0; i < m; ++i)
          for (int l = 0; l < m; ++l) s += ginv(i, l) * (*this)(i, j, k, l);
        ric(j, k) = s;
      }
    return 0.5 * (ric + ric.transpose());
  }

  /// Smallest lambda with Ric v = lambda g v.
  double ricci_min_eigenvalue() const {
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(ricci(), g, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }
};

inline CurvatureTensor curvature_tensor(const ModelManifold& M, const Vec& p,
                                        DerivativeMode mode = DerivativeMode::automatic) {
  check_domain(M, p);
  const int m = M.dim;
  const MetricJet j = metric_jet(M, p, mode);
  const Mat ginv = checked_inverse(j.g);
  const Christoffel G = detail::christoffel_from(j, ginv);

  // dG[q](k,i,j) = d_q Gamma^k_ij
  std::array<Christoffel, kMaxDim> dG;
  for (int q = 0; q < m; ++q) {
    const Mat dginv = -ginv * j.dg[q] * ginv;
    dG[q].m = m;
    for (int i = 0; i < m; ++i)
      for (int k = i; k < m; ++k) {
        std::array<double, kMaxDim> low{}, dlow{};
        for (int l = 0; l < m; ++l) {
          low[l] = 0.5 * (j.dg[i](k, l) + j.dg[k](i, l) - j.dg[l](i, k));
          dlow[l] = 0.5 * (j.ddg[q][i](k, l) + j.ddg[q][k](i, l) - j.ddg[q][l](i, k));
        }
        for (int a = 0; a < m; ++a) {
          double s = 0.0;
          for (int l = 0; l < m; ++l) s += dginv(a, l) * low[l] + ginv(a, l) * dlow[l];
          dG[q](a, i, k) = s;
          dG[q](a, k, i) = s;
        }
      }
  }

  CurvatureTensor C;
  C.m = m;
  C.g = j.g;
  C.ginv = ginv;
  // R^l_{ijk} = d_i G^l_jk - d_j G^l_ik + G^l_ip G^p_jk - G^l_jp G^p_ik
  for (int i = 0; i < m; ++i)
    for (int jj = 0; jj < m; ++jj)
      for (int k = 0; k < m; ++k) {
        std::array<double, kMaxDim> up{};
        for (int l = 0; l < m; ++l) {
          double s = dG[i](l, jj, k) - dG[jj](l, i, k);
          for (int p2 = 0; p2 < m; ++p2) s += G(l, i, p2) * G(p2, jj, k) - G(l, jj, p2) * G(p2, i, k);
          up[l] = s;
        }
        for (int l = 0; l < m; ++l) {
          double s = 0.0;
          for (int a = 0; a < m; ++a) s += j.g(l, a) * up[a];
          C.R[((i * kMaxDim + jj) * kMaxDim + k) * kMaxDim + l] = s;
        }
      }
  return C;
}

inline double sectional_curvature(const ModelManifold& M, const Vec& p, const Vec& u, const Vec& v,
                                  DerivativeMode mode = DerivativeMode::automatic) {
  return curvature_tensor(M, p, mode).sectional(u, v);
}

inline double ricci_min_eigenvalue(const ModelManifold& M, const Vec& p,
                                   DerivativeMode mode = DerivativeMode::automatic) {
  return curvature_tensor(M, p, mode).ricci_min_eigenvalue();
}

// ---------------------------------------------------------------------------
// Curvature bounds on balls

struct CurvatureSampling {
  int nodes_per_axis = 33;
  int planes_per_point = 16;
  std::uint64_t seed = 0;
};

/// Sampled curvature bounds on a coordinate ball and the derived constants
/// a1 = max(sigma^+, eps), a2 = -min(rho^-, -eps). The extrema are taken over
/// a finite sample, so sigma may underestimate and rho overestimate the true
/// sup / inf by O(spacing x Lipschitz constant).
struct CurvatureBounds {
  double sigma = 0.0;
  double rho = 0.0;
  double a1 = 0.0;
  double a2 = 0.0;
  double epsilon = kDefaultEpsilon;
  std::size_t sample_points = 0;
  bool sampled = true;
};

inline CurvatureBounds make_curvature_bounds(double sigma, double rho, double epsilon) {
  require(epsilon > 0.0, Errc::parameter, "epsilon must be positive");
  CurvatureBounds b;
  b.sigma = sigma;
  b.rho = rho;
  b.epsilon = epsilon;
  b.a1 = std::max(std::max(sigma, 0.0), epsilon);
  b.a2 = -std::min(std::min(rho, 0.0), -epsilon);
  return b;
}

/// Sample points of the coordinate ball |p - x| < radius lying in the chart:
/// a tensor grid with `n` nodes per axis plus the centre.
inline std::vector<Vec> ball_sample_points(const ModelManifold& M, const Vec& x, double radius, int n) {
  const int m = M.dim;
  std::vector<Vec> pts;
  pts.push_back(x);
  if (n < 2) return pts;
  std::array<int, kMaxDim> idx{};
  const double step = 2.0 * radius / (n - 1);
  while (true) {
    Vec p(m);
    for (int i = 0; i < m; ++i) p[i] = x[i] - radius + step * idx[i];
    if ((p - x).norm() < radius && (p - x).norm() > 0.0 && M.chart.contains(p)) pts.push_back(p);
    int a = 0;
    while (a < m && ++idx[a] == n) idx[a++] = 0;
    if (a == m) break;
  }
  return pts;
}

/// Curvature extrema over the chart points of the coordinate ball |p - x| < rc,
/// without reference to the injectivity radius.
inline CurvatureBounds sampled_curvature_bounds(const ModelManifold& M, const Vec& x, double rc,
                                                double epsilon = kDefaultEpsilon,
                                                const CurvatureSampling& sampling = {}) {
  const int m = M.dim;
  const auto pts = ball_sample_points(M, x, rc, sampling.nodes_per_axis);
  Rng rng(sampling.seed);
  double sigma = -kInf;
  double rho = kInf;
  for (const Vec& p : pts) {
    const CurvatureTensor C = curvature_tensor(M, p);
    if (m >= 2) {
      for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j) {
          Vec u = Vec::Zero(m), v = Vec::Zero(m);
          u[i] = 1.0;
          v[j] = 1.0;
          sigma = std::max(sigma, C.sectional(u, v));
        }
      if (m >= 3) {
        for (int s = 0; s < sampling.planes_per_point; ++s) {
          const Vec u = rng.normal_vec(m);
          const Vec v = rng.normal_vec(m);
          try {
            sigma = std::max(sigma, C.sectional(u, v));
          } catch (const Error&) {
            // dependent random pair; skip
          }
        }
      }
    } else {
      sigma = std::max(sigma, 0.0);
    }
    rho = std::min(rho, m >= 2 ? C.ricci_min_eigenvalue() : 0.0);
  }
  CurvatureBounds b = make_curvature_bounds(sigma, rho, epsilon);
  b.sample_points = pts.size();
  return b;
}

inline CurvatureBounds curvature_bounds_on_ball(const ModelManifold& M, const Vec& x, double R0,
                                                double epsilon = kDefaultEpsilon,
                                                const CurvatureSampling& sampling = {}) {
  require(R0 > 0.0, Errc::parameter, "ball radius must be positive");
  require(epsilon > 0.0, Errc::parameter, "epsilon must be positive");
  check_domain(M, x);
  if (!(R0 < M.inj_radius_at(x))) {
    std::ostringstream os;
    os << "radius " << R0 << " reaches the injectivity radius " << M.inj_radius_at(x) << " of "
       << M.name();
    throw Error(Errc::chart, os.str());
  }
  return sampled_curvature_bounds(M, x, M.coordinate_radius(R0), epsilon, sampling);
}

// ---------------------------------------------------------------------------
// Geodesics

struct GeodesicState {
  double t = 0.0;
  Vec x;
  Vec v;
};

namespace detail {

inline Vec geodesic_acceleration(const ModelManifold& M, const Vec& x, const Vec& v) {
  const int m = M.dim;
  const Christoffel G = christoffel(M, x);
  Vec a = Vec::Zero(m);
  for (int k = 0; k < m; ++k) {
    double s = 0.0;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) s += G(k, i, j) * v[i] * v[j];
    a[k] = -s;
  }
  return a;
}

}  // namespace detail

/// Classical fourth-order Runge-Kutta integration of the geodesic equation
/// x'' = -Gamma(x)(x', x') with a uniform step no larger than dt that lands
/// exactly on t_end.
inline std::vector<GeodesicState> geodesic_flow(const ModelManifold& M, const Vec& x, const Vec& v,
                                                double t_end, double dt) {
  require(t_end >= 0.0 && dt > 0.0, Errc::parameter, "need t_end >= 0 and dt > 0");
  check_domain(M, x);
  const int steps = std::max(1, static_cast<int>(std::ceil(t_end / dt - 1e-9)));
  const double h = t_end / steps;
  std::vector<GeodesicState> path;
  path.reserve(steps + 1);
  path.push_back({0.0, x, v});
  Vec X = x, V = v;
  auto escape = [&](int step) {
    std::ostringstream os;
    os << "geodesic left the chart of " << M.name() << " after t = " << step * h;
    throw EscapeError(step * h, os.str());
  };
  for (int s = 0; s < steps; ++s) {
    try {
      const Vec k1x = V;
      const Vec k1v = detail::geodesic_acceleration(M, X, V);
      const Vec k2x = V + 0.5 * h * k1v;
      const Vec k2v = detail::geodesic_acceleration(M, X + 0.5 * h * k1x, k2x);
      const Vec k3x = V + 0.5 * h * k2v;
      const Vec k3v = detail::geodesic_acceleration(M, X + 0.5 * h * k2x, k3x);
      const Vec k4x = V + h * k3v;
      const Vec k4v = detail::geodesic_acceleration(M, X + h * k3x, k4x);
      X += (h / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
      V += (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    } catch (const Error& e) {
      if (e.code() == Errc::domain) escape(s);
      throw;
    }
    if (!M.chart.contains(X)) escape(s);
    path.push_back({(s + 1) * h, X, V});
  }
  return path;
}

inline constexpr int kExpMapSteps = 256;

/// exp_x(v): endpoint at t = 1 of the geodesic with initial velocity v.
inline Vec exp_map(const ModelManifold& M, const Vec& x, const Vec& v, int steps = kExpMapSteps) {
  check_domain(M, x);
  if (v.norm() == 0.0) return x;
  return geodesic_flow(M, x, v, 1.0, 1.0 / steps).back().x;
}

inline double metric_norm(const ModelManifold& M, const Vec& p, const Vec& v) {
  return std::sqrt(std::max(0.0, v.dot(M.chart.metric(p) * v)));
}

// ---------------------------------------------------------------------------
// Closed-form distances

namespace detail {

// Unit-sphere embedding of normal coordinates x (radius 1, base at e_0).
inline Eigen::VectorXd sphere_embed(const Vec& x) {
  const int m = static_cast<int>(x.size());
  const double r = x.norm();
  Eigen::VectorXd P(m + 1);
  P[0] = std::cos(r);
  const double s = r > 0.0 ? std::sin(r) / r : 1.0;
  for (int i = 0; i < m; ++i) P[i + 1] = s * x[i];
  return P;
}

inline double torus_distance(const Vec& d0, const Vec& periods) {
  const int m = static_cast<int>(d0.size());
  Vec d = d0;
  for (int i = 0; i < m; ++i) d[i] = std::remainder(d[i], periods[i]);
  double best = kInf;
  std::array<int, kMaxDim> k{};
  for (int i = 0; i < m; ++i) k[i] = -1;
  while (true) {
    Vec s = d;
    for (int i = 0; i < m; ++i) s[i] += k[i] * periods[i];
    best = std::min(best, s.norm());
    int a = 0;
    while (a < m && ++k[a] == 2) k[a++] = -1;
    if (a == m) break;
  }
  return best;
}

}  // namespace detail

inline double geodesic_distance(const ModelManifold& M, const Vec& x, const Vec& y) {
  check_domain(M, x);
  check_domain(M, y);
  const double c = M.coord_scale;
  const double L = M.length_scale();
  const Vec bx = x / c, by = y / c;
  switch (M.kind) {
    case ManifoldKind::euclidean: return L * (bx - by).norm();
    case ManifoldKind::flat_torus: return L * detail::torus_distance(bx - by, M.periods);
    case ManifoldKind::sphere: {
      const auto P = detail::sphere_embed(bx / M.rho);
      const auto Q = detail::sphere_embed(by / M.rho);
      const double chord = (P - Q).norm();
      return L * M.rho * 2.0 * std::asin(std::min(1.0, 0.5 * chord));
    }
    case ManifoldKind::hyperbolic: {
      const double a = bx.norm() / M.rho, b = by.norm() / M.rho;
      // cosh d = cosh a cosh b - sinh a sinh b cos(angle); written via the
      // half-angle form for accuracy at short distances.
      double sin_half2 = 0.0;
      if (a > 0.0 && b > 0.0) sin_half2 = 0.25 * (bx / bx.norm() - by / by.norm()).squaredNorm();
      const double s = std::sinh(0.5 * (a - b));
      const double w = s * s + std::sinh(a) * std::sinh(b) * sin_half2;  // = sinh^2(d/2)
      return L * M.rho * 2.0 * std::asinh(std::sqrt(std::max(0.0, w)));
    }
    case ManifoldKind::warped_product:
      throw Error(Errc::unsupported, "no closed-form distance on warped products");
  }
  throw Error(Errc::unsupported, "unknown manifold kind");
}

}  // namespace c1bench
