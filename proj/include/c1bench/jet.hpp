#pragma once

// Second-order forward-mode automatic differentiation.
//
// A Jet carries a value, its gradient and its Hessian with respect to up to
// kMaxDim seeded variables. Closed-form metrics and test functions are written
// once as templates and evaluated either on doubles or on Jets, which is how
// the library obtains exact first and second derivatives of closed forms.

#include "c1bench/core.hpp"

#include <array>
#include <cmath>

namespace c1bench {

struct Jet {
  static constexpr int N = kMaxDim;

  double v = 0.0;
  std::array<double, N> d{};
  std::array<double, N * N> dd{};

  Jet() = default;
  Jet(double value) : v(value) {}  // NOLINT: implicit constants are intended

  static Jet variable(double value, int index) {
    Jet j(value);
    j.d[index] = 1.0;
    return j;
  }

  double hess(int i, int j) const { return dd[i * N + j]; }

  Jet& operator+=(const Jet& o) {
    v += o.v;
    for (int i = 0; i < N; ++i) d[i] += o.d[i];
    for (int i = 0; i < N * N; ++i) dd[i] += o.dd[i];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    v -= o.v;
    for (int i = 0; i < N; ++i) d[i] -= o.d[i];
    for (int i = 0; i < N * N; ++i) dd[i] -= o.dd[i];
    return *this;
  }
  Jet& operator*=(const Jet& o) {
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j)
        dd[i * N + j] = dd[i * N + j] * o.v + v * o.dd[i * N + j] + d[i] * o.d[j] + o.d[i] * d[j];
    for (int i = 0; i < N; ++i) d[i] = d[i] * o.v + v * o.d[i];
    v *= o.v;
    return *this;
  }
  Jet& operator*=(double s) {
    v *= s;
    for (auto& x : d) x *= s;
    for (auto& x : dd) x *= s;
    return *this;
  }
  Jet& operator/=(const Jet& o);
  Jet operator-() const {
    Jet r = *this;
    r *= -1.0;
    return r;
  }
};

/// Chain rule for a scalar function with known value and two derivatives.
inline Jet chain(const Jet& a, double f0, double f1, double f2) {
  Jet r;
  r.v = f0;
  constexpr int N = Jet::N;
  for (int i = 0; i < N; ++i) r.d[i] = f1 * a.d[i];
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) r.dd[i * N + j] = f1 * a.dd[i * N + j] + f2 * a.d[i] * a.d[j];
  return r;
}

inline Jet operator+(Jet a, const Jet& b) { return a += b; }
inline Jet operator-(Jet a, const Jet& b) { return a -= b; }
inline Jet operator*(Jet a, const Jet& b) { return a *= b; }
inline Jet operator*(Jet a, double s) { return a *= s; }
inline Jet operator*(double s, Jet a) { return a *= s; }
inline Jet operator+(Jet a, double s) {
  a.v += s;
  return a;
}
inline Jet operator+(double s, Jet a) { return a + s; }
inline Jet operator-(Jet a, double s) {
  a.v -= s;
  return a;
}
inline Jet operator-(double s, const Jet& a) { return -a + s; }

inline Jet reciprocal(const Jet& a) {
  const double inv = 1.0 / a.v;
  return chain(a, inv, -inv * inv, 2.0 * inv * inv * inv);
}
inline Jet& Jet::operator/=(const Jet& o) { return *this *= reciprocal(o); }
inline Jet operator/(Jet a, const Jet& b) { return a /= b; }
inline Jet operator/(Jet a, double s) { return a *= (1.0 / s); }
inline Jet operator/(double s, const Jet& a) { return reciprocal(a) * s; }

inline bool operator<(const Jet& a, double s) { return a.v < s; }
inline bool operator>(const Jet& a, double s) { return a.v > s; }

inline Jet sin(const Jet& a) { return chain(a, std::sin(a.v), std::cos(a.v), -std::sin(a.v)); }
inline Jet cos(const Jet& a) { return chain(a, std::cos(a.v), -std::sin(a.v), -std::cos(a.v)); }
inline Jet sinh(const Jet& a) { return chain(a, std::sinh(a.v), std::cosh(a.v), std::sinh(a.v)); }
inline Jet cosh(const Jet& a) { return chain(a, std::cosh(a.v), std::sinh(a.v), std::cosh(a.v)); }
inline Jet exp(const Jet& a) {
  const double e = std::exp(a.v);
  return chain(a, e, e, e);
}
inline Jet log(const Jet& a) { return chain(a, std::log(a.v), 1.0 / a.v, -1.0 / (a.v * a.v)); }
inline Jet sqrt(const Jet& a) {
  const double s = std::sqrt(a.v);
  return chain(a, s, 0.5 / s, -0.25 / (s * a.v));
}
inline Jet pow(const Jet& a, double p) {
  const double f0 = std::pow(a.v, p);
  return chain(a, f0, p * std::pow(a.v, p - 1.0), p * (p - 1.0) * std::pow(a.v, p - 2.0));
}
inline Jet tanh(const Jet& a) {
  const double t = std::tanh(a.v);
  const double s = 1.0 - t * t;
  return chain(a, t, s, -2.0 * t * s);
}
inline Jet atan(const Jet& a) {
  const double q = 1.0 / (1.0 + a.v * a.v);
  return chain(a, std::atan(a.v), q, -2.0 * a.v * q * q);
}

inline double value_of(double x) { return x; }
inline double value_of(const Jet& x) { return x.v; }

}  // namespace c1bench
