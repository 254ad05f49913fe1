#pragma once

// Ball and annulus integrals for the zero-mean-value corollary and Karp's
// annulus condition.
//
// Balls B(o, R) are integrated in geodesic polar coordinates. Space forms
// use balls about the chart origin, where the chart is normal and the polar
// density is sn(r)^{m-1}. Flat spaces allow any centre. On a warped product
// dt^2 + f(t)^2 dtheta^2 the exhaustion is by the collars
// {t_0 <= t < t_0 + R} with o = (t_0, theta_0), density f(t). Radial and
// polar angles use composite 6-point Gauss-Legendre cells of width <= h,
// azimuths the periodic midpoint rule.

#include "c1bench/operators.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>
#include <vector>

namespace c1bench {

struct GrowthSeries {
  std::string label;
  std::vector<double> radii;
  std::vector<double> values;
  double fitted_exponent = 0.0;  // slope of log v against log R
  double fit_intercept = 0.0;
  double fit_residual = 0.0;     // RMS of the log-log residuals
  double alpha_target = 0.0;
  double compliance_constant = 0.0;
  bool compliant = false;  // v_k <= c R_k^target log R_k on the upper half
};

namespace detail {

struct PolarGeometry {
  ModelManifold M;
  Vec o;
  double r_limit = kInf;
  bool warped = false;

  double sn(double r) const {
    switch (M.kind) {
      case ManifoldKind::sphere: return M.rho * std::sin(r / M.rho);
      case ManifoldKind::hyperbolic: return M.rho * std::sinh(r / M.rho);
      case ManifoldKind::warped_product: return M.warp.f(o[0] + r);
      default: return r;
    }
  }
  double density(double r) const { return warped ? sn(r) : std::pow(sn(r), M.dim - 1); }
};

inline PolarGeometry polar_geometry(const ModelManifold& M, const Vec& o) {
  require(M.metric_factor == 1.0 && M.coord_scale == 1.0, Errc::unsupported,
          "ball integrals are implemented for unscaled catalog manifolds");
  require(M.dim == 2 || M.dim == 3, Errc::unsupported, "ball integrals need m in {2, 3}");
  check_domain(M, o);
  PolarGeometry G{M, o};
  switch (M.kind) {
    case ManifoldKind::euclidean: break;
    case ManifoldKind::flat_torus: G.r_limit = M.inj_radius_at(o); break;
    case ManifoldKind::sphere:
    case ManifoldKind::hyperbolic:
      require(o.norm() == 0.0, Errc::unsupported, "space-form balls are centred at the chart origin");
      G.r_limit = M.kind == ManifoldKind::sphere ? kPi * M.rho : M.chart.max_radius;
      break;
    case ManifoldKind::warped_product:
      G.warped = true;
      G.r_limit = M.warp.t_max - o[0];
      break;
  }
  return G;
}

inline const GaussLegendre& radial_rule() {
  static const GaussLegendre rule(6);
  return rule;
}

// Calls fn(p, dp/dr, weight) on the quadrature nodes of the shell r_lo <= r < r_hi.
template <class F>
void polar_scan(const PolarGeometry& G, double r_lo, double r_hi, double h, F&& fn) {
  if (!(r_hi <= G.r_limit)) {
    std::ostringstream os;
    os << "radius " << r_hi << " exceeds the representable radius " << G.r_limit << " of " << G.M.name();
    throw Error(Errc::chart, os.str());
  }
  const auto& rule = radial_rule();
  const int m = G.M.dim;
  const int nr = std::max(1, static_cast<int>(std::ceil((r_hi - r_lo) / h - 1e-9)));
  const double dr = (r_hi - r_lo) / nr;
  for (int c = 0; c < nr; ++c) {
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const double r = r_lo + dr * (c + 0.5 * (1.0 + rule.nodes[q]));
      const double wr = 0.5 * dr * rule.weights[q] * G.density(r);
      const double sn = std::abs(G.sn(r));
      if (m == 2) {
        const int nt = std::clamp(static_cast<int>(std::ceil(2.0 * kPi * sn / h)), 16, 1024);
        const double dt = 2.0 * kPi / nt;
        for (int j = 0; j < nt; ++j) {
          const double th = dt * (j + 0.5);
          if (G.warped) {
            fn(make_vec({G.o[0] + r, G.o[1] + th}), make_vec({1.0, 0.0}), wr * dt);
          } else {
            const Vec dir = make_vec({std::cos(th), std::sin(th)});
            fn(G.o + r * dir, dir, wr * dt);
          }
        }
      } else {
        const int np = std::clamp(static_cast<int>(std::ceil(kPi * sn / h)), 4, 256);
        const double dp = kPi / np;
        for (int i = 0; i < np; ++i)
          for (std::size_t qp = 0; qp < rule.nodes.size(); ++qp) {
            const double ph = dp * (i + 0.5 * (1.0 + rule.nodes[qp]));
            const double wp = 0.5 * dp * rule.weights[qp] * std::sin(ph);
            const int nt = std::clamp(static_cast<int>(std::ceil(2.0 * kPi * sn * std::sin(ph) / h)), 8, 1024);
            const double dt = 2.0 * kPi / nt;
            for (int j = 0; j < nt; ++j) {
              const double th = dt * (j + 0.5);
              const Vec dir = make_vec({std::sin(ph) * std::cos(th), std::sin(ph) * std::sin(th), std::cos(ph)});
              fn(G.o + r * dir, dir, wr * wp * dt);
            }
          }
      }
    }
  }
}

// Per-shell integrals and sup norms of value(p, dpdr) between consecutive edges.
struct ShellScan {
  std::vector<double> edges;
  std::vector<double> sums;
  std::vector<double> maxima;
};

template <class F>
ShellScan shell_scan(const PolarGeometry& G, std::vector<double> edges, double h, F&& value) {
  require(h > 0.0, Errc::parameter, "quadrature spacing must be positive");
  ShellScan s;
  s.edges = std::move(edges);
  for (std::size_t k = 0; k + 1 < s.edges.size(); ++k) {
    double sum = 0.0, mx = 0.0;
    polar_scan(G, s.edges[k], s.edges[k + 1], h, [&](const Vec& p, const Vec& dpdr, double w) {
      const double v = value(p, dpdr);
      sum += w * v;
      mx = std::max(mx, std::abs(v));
    });
    s.sums.push_back(sum);
    s.maxima.push_back(mx);
  }
  return s;
}

inline void check_radii(const std::vector<double>& radii) {
  require(!radii.empty(), Errc::data, "radii list is empty");
  for (std::size_t k = 0; k < radii.size(); ++k) {
    require(radii[k] > 0.0, Errc::data, "radii must be positive");
    require(k == 0 || radii[k] > radii[k - 1], Errc::data, "radii must be strictly increasing");
  }
}

inline double abs_sectional_curvature(const ModelManifold& M, const Vec& p) {
  if (const auto k = M.sec_const()) return std::abs(*k);
  return std::abs(M.warp_curvature(p[0]));
}

// Integrals over the shells [R_k, 2 R_k].
template <class F>
std::vector<double> annulus_integrals(const PolarGeometry& G, const std::vector<double>& radii, double h, F&& value) {
  std::vector<double> edges;
  for (double R : radii) {
    edges.push_back(R);
    edges.push_back(2.0 * R);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  const auto s = shell_scan(G, edges, h, value);
  std::vector<double> cum(edges.size(), 0.0);
  for (std::size_t k = 0; k < s.sums.size(); ++k) cum[k + 1] = cum[k] + s.sums[k];
  auto at = [&](double r) { return cum[std::lower_bound(edges.begin(), edges.end(), r) - edges.begin()]; };
  std::vector<double> out;
  for (double R : radii) out.push_back(at(2.0 * R) - at(R));
  return out;
}

// Ball series: cumulative integrals and sup norms over B(o, R_k).
template <class F>
std::pair<std::vector<double>, std::vector<double>> ball_series(const PolarGeometry& G,
                                                                const std::vector<double>& radii, double h,
                                                                F&& value) {
  std::vector<double> edges{0.0};
  edges.insert(edges.end(), radii.begin(), radii.end());
  const auto s = shell_scan(G, edges, h, value);
  std::vector<double> sums, sups;
  double sum = 0.0, sup = 0.0;
  for (std::size_t k = 0; k < s.sums.size(); ++k) {
    sum += s.sums[k];
    sup = std::max(sup, s.maxima[k]);
    sums.push_back(sum);
    sups.push_back(sup);
  }
  return {sums, sups};
}

}  // namespace detail

/// Integral of |grad u|_g over B(o, 2R) \ B(o, R).
inline double annulus_gradient_integral(const ModelManifold& M, const ClosedForm& u, const Vec& o, double R,
                                        double h) {
  require(R > 0.0, Errc::parameter, "R must be positive");
  const auto G = detail::polar_geometry(M, o);
  return detail::annulus_integrals(G, {R}, h, [&](const Vec& p, const Vec&) {
    return exact_gradient_norm(M, u, p);
  })[0];
}

inline double annulus_volume(const ModelManifold& M, const Vec& o, double R, double h) {
  require(R > 0.0, Errc::parameter, "R must be positive");
  return detail::annulus_integrals(detail::polar_geometry(M, o), {R}, h,
                                   [](const Vec&, const Vec&) { return 1.0; })[0];
}

inline double ball_volume(const ModelManifold& M, const Vec& o, double R, double h) {
  return detail::ball_series(detail::polar_geometry(M, o), {R}, h,
                             [](const Vec&, const Vec&) { return 1.0; }).first[0];
}

/// Integral of Delta_g u over B(o, R).
inline double ball_laplacian_integral(const ModelManifold& M, const ClosedForm& u, const Vec& o, double R,
                                      double h) {
  return detail::ball_series(detail::polar_geometry(M, o), {R}, h,
                             [&](const Vec& p, const Vec&) { return exact_laplacian(M, u, p); }).first[0];
}

/// Outward flux of grad u through the sphere S(o, R), by boundary quadrature.
inline double boundary_flux(const ModelManifold& M, const ClosedForm& u, const Vec& o, double R, double h) {
  const auto G = detail::polar_geometry(M, o);
  require(R > 0.0 && R <= G.r_limit, Errc::chart, "flux radius is not representable");
  const int m = M.dim;
  double s = 0.0;
  // a zero-width shell at R: reuse the angular rule with unit radial weight
  const double density = G.density(R);
  const double sn = std::abs(G.sn(R));
  auto radial_derivative = [&](const Vec& p, const Vec& dpdr) { return u.jet(p).grad.dot(dpdr); };
  if (m == 2) {
    const int nt = std::clamp(static_cast<int>(std::ceil(2.0 * kPi * sn / h)), 16, 1024);
    const double dt = 2.0 * kPi / nt;
    for (int j = 0; j < nt; ++j) {
      const double th = dt * (j + 0.5);
      if (G.warped)
        s += dt * radial_derivative(make_vec({o[0] + R, o[1] + th}), make_vec({1.0, 0.0}));
      else {
        const Vec dir = make_vec({std::cos(th), std::sin(th)});
        s += dt * radial_derivative(o + R * dir, dir);
      }
    }
  } else {
    const auto& rule = detail::radial_rule();
    const int np = std::clamp(static_cast<int>(std::ceil(kPi * sn / h)), 4, 256);
    const double dp = kPi / np;
    for (int i = 0; i < np; ++i)
      for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
        const double ph = dp * (i + 0.5 * (1.0 + rule.nodes[q]));
        const double wp = 0.5 * dp * rule.weights[q] * std::sin(ph);
        const int nt = std::clamp(static_cast<int>(std::ceil(2.0 * kPi * sn * std::sin(ph) / h)), 8, 1024);
        const double dt = 2.0 * kPi / nt;
        for (int j = 0; j < nt; ++j) {
          const double th = dt * (j + 0.5);
          const Vec dir = make_vec({std::sin(ph) * std::cos(th), std::sin(ph) * std::sin(th), std::cos(ph)});
          s += wp * dt * radial_derivative(o + R * dir, dir);
        }
      }
  }
  return s * density;
}

/// Least-squares slope of log v against log R. A series of zeros has
/// exponent 0. Compliance: with c the largest v_k / (R_k^target log R_k)
/// over the lower half of the radii, every upper-half ratio is <= c.
/// log R is floored at 1.
inline GrowthSeries growth_fit(GrowthSeries s, double alpha_target = 0.0) {
  const std::size_t n = s.radii.size();
  require(n == s.values.size(), Errc::data, "radii and values differ in length");
  require(n >= 4, Errc::data, "growth fits need at least 4 radii");
  detail::check_radii(s.radii);
  require(s.radii.back() >= 8.0 * s.radii.front() * (1 - 1e-12), Errc::data,
          "growth fits need radii spanning a factor of at least 8");
  for (double v : s.values) require(v >= 0.0 && std::isfinite(v), Errc::data, "series values must be finite and >= 0");
  s.alpha_target = alpha_target;

  std::vector<double> X, Y;
  for (std::size_t k = 0; k < n; ++k)
    if (s.values[k] > 0.0) {
      X.push_back(std::log(s.radii[k]));
      Y.push_back(std::log(s.values[k]));
    }
  s.fitted_exponent = s.fit_intercept = s.fit_residual = 0.0;
  if (X.size() >= 2) {
    const double k = static_cast<double>(X.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < X.size(); ++i) mx += X[i], my += Y[i];
    mx /= k;
    my /= k;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < X.size(); ++i) sxx += (X[i] - mx) * (X[i] - mx), sxy += (X[i] - mx) * (Y[i] - my);
    s.fitted_exponent = sxy / sxx;
    s.fit_intercept = my - s.fitted_exponent * mx;
    double rss = 0;
    for (std::size_t i = 0; i < X.size(); ++i) {
      const double e = Y[i] - s.fit_intercept - s.fitted_exponent * X[i];
      rss += e * e;
    }
    s.fit_residual = std::sqrt(rss / k);
  } else if (X.size() == 1) {
    s.fit_intercept = Y[0];
  }

  auto ratio = [&](std::size_t k) {
    return s.values[k] / (std::pow(s.radii[k], alpha_target) * std::max(1.0, std::log(s.radii[k])));
  };
  const std::size_t half = n / 2;
  s.compliance_constant = 0.0;
  for (std::size_t k = 0; k < half; ++k) s.compliance_constant = std::max(s.compliance_constant, ratio(k));
  s.compliant = true;
  for (std::size_t k = half; k < n; ++k)
    if (ratio(k) > s.compliance_constant * (1.0 + 1e-9)) s.compliant = false;
  return s;
}

inline GrowthSeries annulus_volume_series(const ModelManifold& M, const Vec& o, const std::vector<double>& radii,
                                          double h) {
  detail::check_radii(radii);
  GrowthSeries s;
  s.label = "annulus_volume";
  s.radii = radii;
  s.values = detail::annulus_integrals(detail::polar_geometry(M, o), radii, h,
                                       [](const Vec&, const Vec&) { return 1.0; });
  return s;
}

struct MeanValueSeries {
  GrowthSeries series;  // signed ball integrals of Delta_g u
  double tolerance = 1e-3;
  bool decreasing = false;  // |v| nonincreasing over the last 4 radii, slack 1e-3 tolerance
  bool converged = false;   // |last| < tolerance and decreasing
};

inline MeanValueSeries mean_value_check(const ModelManifold& M, const ClosedForm& u, const Vec& o,
                                        const std::vector<double>& radii, double h, double tolerance = 1e-3) {
  detail::check_radii(radii);
  MeanValueSeries out;
  out.tolerance = tolerance;
  out.series.label = "ball_laplacian_integral";
  out.series.radii = radii;
  out.series.values = detail::ball_series(detail::polar_geometry(M, o), radii, h,
                                          [&](const Vec& p, const Vec&) { return exact_laplacian(M, u, p); })
                          .first;
  const auto& v = out.series.values;
  const std::size_t n = v.size();
  // nonincreasing |v| over the last 4 radii, up to a quadrature-noise slack
  const double slack = 1e-3 * tolerance;
  out.decreasing = n >= 2;
  for (std::size_t k = n >= 4 ? n - 3 : 1; k < n; ++k)
    if (!(std::abs(v[k]) <= std::abs(v[k - 1]) + slack)) out.decreasing = false;
  out.converged = n >= 1 && std::abs(v.back()) < tolerance && out.decreasing;
  return out;
}

struct CorollaryTargets {
  double alpha = 0.5;
  double beta = 0.0;
  double gamma = 0.0;
  double delta = 0.0;
};

struct CorollaryVerdict {
  GrowthSeries annulus_volume;  // condition (a)
  GrowthSeries sectional_sup;   // condition (b)
  GrowthSeries u_sup;           // condition (i)
  GrowthSeries laplacian_sup;   // condition (ii)
  MeanValueSeries mean_value;
  double exponent_sum = 0.0;     // sum of fitted exponents, each floored at 0
  bool degenerate = false;       // u and Delta u vanish on every sampled ball
  bool hypotheses_hold = false;  // exponent_sum < 1, or degenerate
  bool conclusion_holds = false; // mean_value.converged
};

inline CorollaryVerdict corollary_suite(const ModelManifold& M, const ClosedForm& u, const Vec& o,
                                        const CorollaryTargets& targets, const std::vector<double>& radii,
                                        double h, double tolerance = 1e-3) {
  detail::check_radii(radii);
  const auto G = detail::polar_geometry(M, o);
  CorollaryVerdict v;
  v.annulus_volume = growth_fit(annulus_volume_series(M, o, radii, h), targets.alpha);

  std::vector<double> lap_int, lap_sup, u_sup, sec_sup;
  {
    const auto [sums, sups] = detail::ball_series(G, radii, h, [&](const Vec& p, const Vec&) {
      return exact_laplacian(M, u, p);
    });
    lap_int = sums;
    lap_sup = sups;
  }
  u_sup = detail::ball_series(G, radii, h, [&](const Vec& p, const Vec&) { return u(p); }).second;
  sec_sup = detail::ball_series(G, radii, h, [&](const Vec& p, const Vec&) {
              return detail::abs_sectional_curvature(M, p);
            }).second;

  auto make = [&](const char* label, std::vector<double> values, double target) {
    GrowthSeries s;
    s.label = label;
    s.radii = radii;
    s.values = std::move(values);
    return growth_fit(std::move(s), target);
  };
  v.sectional_sup = make("sectional_sup", sec_sup, targets.beta);
  v.u_sup = make("u_sup", u_sup, targets.gamma);
  v.laplacian_sup = make("laplacian_sup", lap_sup, targets.delta);
  v.mean_value = mean_value_check(M, u, o, radii, h, tolerance);

  v.exponent_sum = std::max(0.0, v.annulus_volume.fitted_exponent) + std::max(0.0, v.sectional_sup.fitted_exponent) +
                   std::max(0.0, v.u_sup.fitted_exponent) + std::max(0.0, v.laplacian_sup.fitted_exponent);
  v.degenerate = std::all_of(u_sup.begin(), u_sup.end(), [](double x) { return x == 0.0; }) &&
                 std::all_of(lap_sup.begin(), lap_sup.end(), [](double x) { return x == 0.0; });
  v.hypotheses_hold = v.degenerate || v.exponent_sum < 1.0;
  v.conclusion_holds = v.mean_value.converged;
  return v;
}

/// CSV rows R,value.
inline void write_series_csv(std::ostream& os, const GrowthSeries& s) {
  os << "R,value\n" << std::setprecision(17);
  for (std::size_t k = 0; k < s.radii.size(); ++k) os << s.radii[k] << "," << s.values[k] << "\n";
}

}  // namespace c1bench
