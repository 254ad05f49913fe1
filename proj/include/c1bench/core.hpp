#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace c1bench {

/// Largest chart dimension supported by the fixed-capacity vector types.
inline constexpr int kMaxDim = 4;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kPi = std::numbers::pi;

enum class Errc {
  domain,
  conditioning,
  degeneracy,
  chart,
  escape,
  unsupported,
  resolution,
  region,
  solver,
  parameter,
  precondition,
  hypothesis,
  conjugate_point,
  data,
  parse,
  unknown_manifold,
  missing_field,
  validation,
  io,
};

inline const char* to_string(Errc c) {
  switch (c) {
    case Errc::domain: return "domain";
    case Errc::conditioning: return "conditioning";
    case Errc::degeneracy: return "degeneracy";
    case Errc::chart: return "chart";
    case Errc::escape: return "escape";
    case Errc::unsupported: return "unsupported";
    case Errc::resolution: return "resolution";
    case Errc::region: return "region";
    case Errc::solver: return "solver";
    case Errc::parameter: return "parameter";
    case Errc::precondition: return "precondition";
    case Errc::hypothesis: return "hypothesis";
    case Errc::conjugate_point: return "conjugate_point";
    case Errc::data: return "data";
    case Errc::parse: return "parse";
    case Errc::unknown_manifold: return "unknown_manifold";
    case Errc::missing_field: return "missing_field";
    case Errc::validation: return "validation";
    case Errc::io: return "io";
  }
  return "unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + " error: " + what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// A geodesic left the chart; `exit_time` is the last time still inside.
class EscapeError : public Error {
 public:
  EscapeError(double exit_time, const std::string& what)
      : Error(Errc::escape, what), exit_time_(exit_time) {}
  double exit_time() const noexcept { return exit_time_; }

 private:
  double exit_time_;
};

/// The linear solver stopped before meeting its residual target.
class SolverError : public Error {
 public:
  SolverError(double residual, const std::string& what)
      : Error(Errc::solver, what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

inline void require(bool cond, Errc code, const std::string& what) {
  if (!cond) throw Error(code, what);
}

inline Vec make_vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

inline Vec zero_vec(int m) { return Vec::Zero(m); }

}  // namespace c1bench
