#pragma once

// Closed-form test functions on chart coordinates.
//
// A ClosedForm is written once as a generic callable and evaluated on doubles
// (values) or on Jets (value, gradient and Hessian in one pass). The catalog
// below covers the field families used by the benches and the runner.

#include "c1bench/core.hpp"
#include "c1bench/jet.hpp"
#include "c1bench/rng.hpp"

#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace c1bench {

/// Value, coordinate gradient and coordinate Hessian of a function at a point.
struct FieldJet {
  double value = 0.0;
  Vec grad;
  Mat hess;
};

class ClosedForm {
 public:
  using ValueFn = std::function<double(const double*, int)>;
  using JetFn = std::function<Jet(const Jet*, int)>;

  ClosedForm() = default;
  ClosedForm(std::string id, ValueFn value, JetFn jet)
      : id_(std::move(id)), value_(std::move(value)), jet_(std::move(jet)) {}

  /// Build from a generic callable `f(const T* x, int m) -> T` for T in {double, Jet}.
  template <class F>
  static ClosedForm make(std::string id, F f) {
    return ClosedForm(
        std::move(id), [f](const double* x, int m) { return f(x, m); },
        [f](const Jet* x, int m) { return f(x, m); });
  }

  const std::string& id() const { return id_; }

  double operator()(const Vec& p) const { return value_(p.data(), static_cast<int>(p.size())); }

  FieldJet jet(const Vec& p) const {
    const int m = static_cast<int>(p.size());
    std::array<Jet, kMaxDim> x;
    for (int i = 0; i < m; ++i) x[i] = Jet::variable(p[i], i);
    const Jet r = jet_(x.data(), m);
    FieldJet out;
    out.value = r.v;
    out.grad.resize(m);
    out.hess.resize(m, m);
    for (int i = 0; i < m; ++i) {
      out.grad[i] = r.d[i];
      for (int j = 0; j < m; ++j) out.hess(i, j) = r.hess(i, j);
    }
    return out;
  }

  /// Jet-level evaluation, for composing closed forms.
  Jet eval(const Jet* x, int m) const { return jet_(x, m); }
  double eval(const double* x, int m) const { return value_(x, m); }

  /// p -> f(p / lambda): the same function on the rescaled chart y = lambda x.
  ClosedForm rescaled(double lambda) const {
    auto self = std::make_shared<ClosedForm>(*this);
    std::ostringstream os;
    os << id_ << "@scale" << lambda;
    return ClosedForm(
        os.str(),
        [self, lambda](const double* x, int m) {
          std::array<double, kMaxDim> y{};
          for (int i = 0; i < m; ++i) y[i] = x[i] / lambda;
          return self->eval(y.data(), m);
        },
        [self, lambda](const Jet* x, int m) {
          std::array<Jet, kMaxDim> y;
          for (int i = 0; i < m; ++i) y[i] = x[i] / lambda;
          return self->eval(y.data(), m);
        });
  }

  /// p -> a * f(p) + b * g(p).
  friend ClosedForm combine(double a, const ClosedForm& f, double b, const ClosedForm& g) {
    auto F = std::make_shared<ClosedForm>(f);
    auto G = std::make_shared<ClosedForm>(g);
    std::ostringstream os;
    os << a << "*" << f.id() << "+" << b << "*" << g.id();
    return ClosedForm(
        os.str(), [=](const double* x, int m) { return a * F->eval(x, m) + b * G->eval(x, m); },
        [=](const Jet* x, int m) { return a * F->eval(x, m) + b * G->eval(x, m); });
  }

 private:
  std::string id_;
  ValueFn value_;
  JetFn jet_;
};

namespace detail {

template <class T>
T norm2(const T* x, int m) {
  T s = T(0.0);
  for (int i = 0; i < m; ++i) s = s + x[i] * x[i];
  return s;
}

// cos(sqrt(u)) and cosh(sqrt(u)) with a series branch at small u.
template <class T>
T cos_sqrt(const T& u, int kappa) {
  if (value_of(u) < 1e-2) {
    T sum = T(0.0), upow = T(1.0);
    double fact = 1.0, sign = 1.0;
    for (int k = 0; k <= 6; ++k) {
      sum = sum + upow * (sign / fact);
      upow = upow * u;
      fact *= (2.0 * k + 1.0) * (2.0 * k + 2.0);
      sign *= -kappa;
    }
    return sum;
  }
  using std::cos;
  using std::cosh;
  using std::sqrt;
  return kappa > 0 ? cos(sqrt(u)) : cosh(sqrt(u));
}

/// F(x) = U(|x|) for a radial profile with known U, U', U'' and the limit of
/// U'/r at the origin. Exact Hessian U'' xx^T/r^2 + (U'/r)(I - xx^T/r^2).
struct RadialProfile {
  std::function<double(double)> U, dU, d2U;
  double dU_over_r_at_0 = 0.0;
  double d2U_at_0 = 0.0;

  double operator()(const double* x, int m) const { return U(std::sqrt(norm2(x, m))); }

  Jet operator()(const Jet* x, int m) const {
    double r2 = 0.0;
    for (int i = 0; i < m; ++i) r2 += x[i].v * x[i].v;
    const double r = std::sqrt(r2);
    double u0, u1r, u2;
    if (r < 1e-7) {
      u0 = U(r);
      u1r = dU_over_r_at_0;
      u2 = d2U_at_0;
    } else {
      u0 = U(r);
      u1r = dU(r) / r;
      u2 = d2U(r);
    }
    // gradient and Hessian in x, then composed with the Jets of x
    std::array<double, kMaxDim> grad{};
    std::array<double, kMaxDim * kMaxDim> hess{};
    for (int a = 0; a < m; ++a) grad[a] = u1r * x[a].v;
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) {
        const double xa = r > 0 ? x[a].v / r : 0.0, xb = r > 0 ? x[b].v / r : 0.0;
        hess[a * kMaxDim + b] = (u2 - u1r) * xa * xb + (a == b ? u1r : 0.0);
      }
    Jet out(u0);
    constexpr int N = Jet::N;
    for (int a = 0; a < m; ++a) {
      for (int i = 0; i < N; ++i) out.d[i] += grad[a] * x[a].d[i];
      for (int i = 0; i < N * N; ++i) out.dd[i] += grad[a] * x[a].dd[i];
    }
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) {
        const double h = hess[a * kMaxDim + b];
        if (h == 0.0) continue;
        for (int i = 0; i < N; ++i)
          for (int j = 0; j < N; ++j) out.dd[i * N + j] += h * x[a].d[i] * x[b].d[j];
      }
    return out;
  }
};

}  // namespace detail

namespace fields {

inline ClosedForm constant(double c) {
  std::ostringstream os;
  os << "const(" << c << ")";
  return ClosedForm::make(os.str(), [c](const auto* x, int) {
    using T = std::decay_t<decltype(x[0])>;
    return T(c);
  });
}

/// x_k (zero-based axis k).
inline ClosedForm coordinate(int k) {
  return ClosedForm::make("x" + std::to_string(k + 1), [k](const auto* x, int) { return x[k]; });
}

/// cos(|x| / s): on the sphere of radius s in normal coordinates this is the
/// first nonconstant eigenfunction, Delta psi = -(m / s^2) psi.
inline ClosedForm radial_cos(double s = 1.0) {
  std::ostringstream os;
  os << "cos_r(" << s << ")";
  return ClosedForm::make(os.str(), [s](const auto* x, int m) {
    return detail::cos_sqrt(detail::norm2(x, m) / (s * s), +1);
  });
}

/// cosh(|x| / s).
inline ClosedForm radial_cosh(double s = 1.0) {
  std::ostringstream os;
  os << "cosh_r(" << s << ")";
  return ClosedForm::make(os.str(), [s](const auto* x, int m) {
    return detail::cos_sqrt(detail::norm2(x, m) / (s * s), -1);
  });
}

/// Fixed non-harmonic quadratic x1^2 - x2^2/2 + x1 x2 (x1^2 in one dimension).
inline ClosedForm quadratic() {
  return ClosedForm::make("quadratic", [](const auto* x, int m) {
    if (m == 1) return x[0] * x[0];
    return x[0] * x[0] - 0.5 * x[1] * x[1] + x[0] * x[1];
  });
}

/// |x|^2 / 4, with Euclidean Laplacian m / 2.
inline ClosedForm quarter_r2() {
  return ClosedForm::make("quarter_r2", [](const auto* x, int m) { return 0.25 * detail::norm2(x, m); });
}

inline ClosedForm product_x1x2() {
  return ClosedForm::make("x1x2", [](const auto* x, int) { return x[0] * x[1]; });
}

/// Smooth non-polynomial field for convergence studies.
inline ClosedForm trig_mix() {
  return ClosedForm::make("trig_mix", [](const auto* x, int m) {
    using std::cos;
    using std::exp;
    using std::sin;
    auto v = sin(1.3 * x[0] + 0.4);
    if (m >= 2) v = v + cos(0.7 * x[1] - 0.2) * exp(0.3 * x[0]);
    if (m >= 3) v = v + 0.5 * sin(0.9 * x[2]) * cos(0.5 * x[1]);
    return v;
  });
}

/// C-infinity bump exp(-1 / (1 - |x - c|^2 / R^2)) supported in the ball B(c, R).
inline ClosedForm compact_bump(const Vec& center, double R) {
  std::ostringstream os;
  os << "bump(R=" << R << ")";
  return ClosedForm::make(os.str(), [center, R](const auto* x, int m) {
    using T = std::decay_t<decltype(x[0])>;
    T u = T(0.0);
    for (int i = 0; i < m; ++i) {
      const T d = x[i] - center[i];
      u = u + d * d;
    }
    u = u / (R * R);
    if (!(value_of(u) < 1.0 - 1e-12)) return T(0.0);
    using std::exp;
    return exp(-1.0 / (1.0 - u));
  });
}

/// C-infinity bump in the first coordinate only: exp(-1/(1 - ((t - c)/w)^2)).
inline ClosedForm slab_bump(double c, double w) {
  std::ostringstream os;
  os << "slab_bump(c=" << c << ",w=" << w << ")";
  return ClosedForm::make(os.str(), [c, w](const auto* x, int) {
    using T = std::decay_t<decltype(x[0])>;
    const T s = (x[0] - c) / w;
    const T u = s * s;
    if (!(value_of(u) < 1.0 - 1e-12)) return T(0.0);
    using std::exp;
    return exp(-1.0 / (1.0 - u));
  });
}

/// 1 / (1 + t^2) in the first coordinate; bounded with decaying derivatives.
inline ClosedForm inverse_square_decay() {
  return ClosedForm::make("decay_t", [](const auto* x, int) { return 1.0 / (1.0 + x[0] * x[0]); });
}

/// Unit-mass radial bump in the plane and its Newtonian potential.
///
/// rho(r) = c exp(-1 / (1 - r^2)) on r < 1 with c fixed so that the mass is
/// exactly 1. With I(a) = int_a^1 exp(-1/w) dw = 1/e + Ei(-1) - a e^{-1/a} - Ei(-1/a)
/// the enclosed mass is I(1 - r^2) / I(0), and the potential u solves
/// u'' + u'/r = rho with u(0) = 0.
struct UnitMassBump {
  static double I(double a) {
    if (a <= 0.0) return std::exp(-1.0) + std::expint(-1.0);
    return std::exp(-1.0) + std::expint(-1.0) - a * std::exp(-1.0 / a) - std::expint(-1.0 / a);
  }
  static double normalization() { return 1.0 / (kPi * I(0.0)); }
  static double density(double r) {
    if (r >= 1.0) return 0.0;
    return normalization() * std::exp(-1.0 / (1.0 - r * r));
  }
  static double mass_within(double r) {
    if (r >= 1.0) return 1.0;
    return I(1.0 - r * r) / I(0.0);
  }
  static double potential_slope(double r) { return r > 0 ? mass_within(r) / (2.0 * kPi * r) : 0.0; }
  static double potential(double r) {
    // u(r) = int_0^r u'(s) ds by 64-point Gauss-Legendre on [0, min(r, 1)].
    static const double u1 = integrate_slope(1.0);
    if (r >= 1.0) return u1 + std::log(r) / (2.0 * kPi);
    return integrate_slope(r);
  }

 private:
  static double integrate_slope(double r);
};

}  // namespace fields

// ---------------------------------------------------------------------------
// Gauss-Legendre rule on [-1, 1] (Newton iteration on Legendre polynomials).

struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;

  explicit GaussLegendre(int n) : nodes(n), weights(n) {
    for (int i = 0; i < n; ++i) {
      double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      nodes[i] = x;
      weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
  }

  template <class F>
  double integrate(F&& f, double a, double b) const {
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * f(mid + half * nodes[i]);
    return s * half;
  }
};

inline double fields::UnitMassBump::integrate_slope(double r) {
  static const GaussLegendre rule(64);
  return rule.integrate([](double s) { return potential_slope(s); }, 0.0, r);
}

namespace fields {

/// Newtonian potential of the unit-mass bump (two dimensions only).
inline ClosedForm bump_potential() {
  detail::RadialProfile p;
  p.U = [](double r) { return UnitMassBump::potential(r); };
  p.dU = [](double r) { return UnitMassBump::potential_slope(r); };
  p.d2U = [](double r) { return UnitMassBump::density(r) - UnitMassBump::potential_slope(r) / r; };
  p.dU_over_r_at_0 = 0.5 * UnitMassBump::density(0.0);
  p.d2U_at_0 = 0.5 * UnitMassBump::density(0.0);
  return ClosedForm("bump_potential", p, p);
}

/// Unit-mass bump density itself (two dimensions).
inline ClosedForm bump_density() {
  detail::RadialProfile p;
  const double c = UnitMassBump::normalization();
  // rho(r) = c exp(-1/(1 - r^2)); derivatives in r.
  p.U = [](double r) { return UnitMassBump::density(r); };
  p.dU = [c](double r) {
    if (r >= 1.0) return 0.0;
    const double w = 1.0 - r * r;
    return c * std::exp(-1.0 / w) * (-2.0 * r / (w * w));
  };
  p.d2U = [c](double r) {
    if (r >= 1.0) return 0.0;
    const double w = 1.0 - r * r;
    const double e = std::exp(-1.0 / w);
    const double g = -2.0 * r / (w * w);
    const double dg = -2.0 / (w * w) - 8.0 * r * r / (w * w * w);
    return c * e * (g * g + dg);
  };
  p.dU_over_r_at_0 = -2.0 * c * std::exp(-1.0);
  p.d2U_at_0 = -2.0 * c * std::exp(-1.0);
  return ClosedForm("bump_density", p, p);
}

/// Random smooth field sum_k a_k sin(w_k . x + phi_k) with `terms` terms.
inline ClosedForm random_trig(Rng& rng, int m, int terms = 3, double amp = 1.0, double freq = 2.0) {
  struct Term {
    double a;
    std::array<double, kMaxDim> w;
    double phi;
  };
  std::vector<Term> ts;
  for (int k = 0; k < terms; ++k) {
    Term t{};
    t.a = rng.uniform(-amp, amp);
    for (int i = 0; i < m; ++i) t.w[i] = rng.uniform(-freq, freq);
    t.phi = rng.uniform(0.0, 2.0 * kPi);
    ts.push_back(t);
  }
  return ClosedForm::make("random_trig", [ts](const auto* x, int mm) {
    using T = std::decay_t<decltype(x[0])>;
    using std::sin;
    T s = T(0.0);
    for (const auto& t : ts) {
      T arg = T(t.phi);
      for (int i = 0; i < mm; ++i) arg = arg + t.w[i] * x[i];
      s = s + t.a * sin(arg);
    }
    return s;
  });
}

/// Polynomial sum_k c_k x^k in the first coordinate.
inline ClosedForm polynomial_1d(std::vector<double> coeffs) {
  return ClosedForm::make("poly", [coeffs](const auto* x, int) {
    using T = std::decay_t<decltype(x[0])>;
    T s = T(0.0);
    for (std::size_t k = coeffs.size(); k-- > 0;) s = s * x[0] + coeffs[k];
    return s;
  });
}

/// sum_k a_k sin(w_k t + phi_k) in the first coordinate.
inline ClosedForm trig_1d(std::vector<std::array<double, 3>> terms) {
  return ClosedForm::make("trig", [terms](const auto* x, int) {
    using T = std::decay_t<decltype(x[0])>;
    using std::sin;
    T s = T(0.0);
    for (const auto& t : terms) s = s + t[0] * sin(t[1] * x[0] + t[2]);
    return s;
  });
}

inline ClosedForm sine_1d() {
  return ClosedForm::make("sin", [](const auto* x, int) {
    using std::sin;
    return sin(x[0]);
  });
}

}  // namespace fields

}  // namespace c1bench
