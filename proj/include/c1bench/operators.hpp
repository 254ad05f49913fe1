#pragma once

// Finite-difference operators on ball grids: gradient norm, the
// Laplace-Beltrami operator in non-divergence form with Shortley-Weller
// boundary stencils, and the norms and seminorms used by the estimate bench.

#include "c1bench/grid.hpp"
#include "c1bench/manifold.hpp"
#include "c1bench/rng.hpp"

#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

namespace c1bench {

// ---------------------------------------------------------------------------
// Node-value differences. Central where both axis neighbours are nodes,
// otherwise the three-point one-sided formula (two-point when that is all
// the grid offers).

namespace detail {

inline int shifted(const BallGrid& g, std::size_t i, int axis, int steps) {
  auto k = g.lattice(i);
  k[axis] += steps;
  return g.find(k);
}

}  // namespace detail

inline double first_difference(const BallGrid& g, const std::vector<double>& f, std::size_t i, int axis) {
  const double h = g.spacing();
  const int p = detail::shifted(g, i, axis, +1);
  const int q = detail::shifted(g, i, axis, -1);
  if (p >= 0 && q >= 0) return (f[p] - f[q]) / (2.0 * h);
  if (p >= 0) {
    const int p2 = detail::shifted(g, i, axis, +2);
    if (p2 >= 0) return (-3.0 * f[i] + 4.0 * f[p] - f[p2]) / (2.0 * h);
    return (f[p] - f[i]) / h;
  }
  if (q >= 0) {
    const int q2 = detail::shifted(g, i, axis, -2);
    if (q2 >= 0) return (3.0 * f[i] - 4.0 * f[q] + f[q2]) / (2.0 * h);
    return (f[i] - f[q]) / h;
  }
  return 0.0;
}

inline double second_difference(const BallGrid& g, const std::vector<double>& f, std::size_t i, int axis) {
  const double h = g.spacing();
  const int p = detail::shifted(g, i, axis, +1);
  const int q = detail::shifted(g, i, axis, -1);
  if (p >= 0 && q >= 0) return (f[p] - 2.0 * f[i] + f[q]) / (h * h);
  if (p >= 0) {
    const int p2 = detail::shifted(g, i, axis, +2);
    if (p2 >= 0) return (f[i] - 2.0 * f[p] + f[p2]) / (h * h);
  }
  if (q >= 0) {
    const int q2 = detail::shifted(g, i, axis, -2);
    if (q2 >= 0) return (f[i] - 2.0 * f[q] + f[q2]) / (h * h);
  }
  return 0.0;
}

/// Partial derivative field along `axis`.
inline std::vector<double> partial(const BallGrid& g, const std::vector<double>& f, int axis) {
  std::vector<double> out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = first_difference(g, f, i, axis);
  return out;
}

/// Second partial d_a d_b: second differences on the diagonal, nested first
/// differences off it.
inline std::vector<double> second_partial(const BallGrid& g, const std::vector<double>& f, int a, int b) {
  std::vector<double> out(g.size());
  if (a == b) {
    for (std::size_t i = 0; i < g.size(); ++i) out[i] = second_difference(g, f, i, a);
    return out;
  }
  return partial(g, partial(g, f, b), a);
}

inline Vec grid_gradient(const BallGrid& g, const std::vector<double>& f, std::size_t i) {
  Vec d(g.dim());
  for (int a = 0; a < g.dim(); ++a) d[a] = first_difference(g, f, i, a);
  return d;
}

/// |d phi|_g = sqrt(g^{ij} d_i phi d_j phi) at every node.
inline ScalarField gradient_norm(const ScalarField& phi) {
  const BallGrid& g = *phi.grid();
  const ModelManifold& M = g.manifold();
  std::vector<double> out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec d = grid_gradient(g, phi.values(), i);
    const Mat ginv = checked_inverse(M.chart.metric(g.node(i)));
    out[i] = std::sqrt(std::max(0.0, d.dot(ginv * d)));
  }
  return ScalarField(phi.grid(), std::move(out));
}

// ---------------------------------------------------------------------------
// Sparse operators

using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Linear map on grid nodes; `boundary` couples node rows to the grid's
/// boundary points, so (L u)_i = (interior u_nodes)_i + (boundary u_bdry)_i.
struct SparseOperator {
  GridPtr grid;
  SparseRowMatrix interior;
  SparseRowMatrix boundary;
  std::size_t dropped_mixed_terms = 0;  // nodes where no cross-derivative quadrant fit

  std::size_t rows() const { return static_cast<std::size_t>(interior.rows()); }

  ScalarField apply(const ScalarField& u, const BoundaryField& bdry) const {
    check_same_grid(grid, u.grid());
    check_same_grid(grid, bdry.grid());
    Eigen::Map<const Eigen::VectorXd> x(u.values().data(), static_cast<Eigen::Index>(u.size()));
    Eigen::Map<const Eigen::VectorXd> b(bdry.values().data(), static_cast<Eigen::Index>(bdry.size()));
    Eigen::VectorXd y = interior * x + boundary * b;
    return ScalarField(grid, std::vector<double>(y.data(), y.data() + y.size()));
  }

  /// Applies the operator with homogeneous boundary data.
  ScalarField apply(const ScalarField& u) const { return apply(u, BoundaryField(grid, 0.0)); }
};

namespace detail {

// Coefficients of Delta_g = g^{ij} d_i d_j + b^k d_k, b^k = -g^{ij} Gamma^k_ij.
struct LaplacianCoefficients {
  Mat ginv;
  Vec b;
  double det = 0.0;
};

inline LaplacianCoefficients laplacian_coefficients(const ModelManifold& M, const Vec& p) {
  const MetricJet j = metric_jet(M, p);
  LaplacianCoefficients c;
  c.det = j.g.determinant();
  if (!(c.det >= 1e-12)) throw Error(Errc::conditioning, "metric determinant below 1e-12");
  c.ginv = checked_inverse(j.g);
  const Christoffel G = christoffel_from(j, c.ginv);
  const int m = M.dim;
  c.b = Vec::Zero(m);
  for (int k = 0; k < m; ++k) {
    double s = 0.0;
    for (int i = 0; i < m; ++i)
      for (int l = 0; l < m; ++l) s += c.ginv(i, l) * G(k, i, l);
    c.b[k] = -s;
  }
  return c;
}

}  // namespace detail

/// Exact Laplace-Beltrami of a closed form: g^{ij}(d_ij f - Gamma^k_ij d_k f).
inline double exact_laplacian(const ModelManifold& M, const ClosedForm& f, const Vec& p) {
  const FieldJet fj = f.jet(p);
  const auto c = detail::laplacian_coefficients(M, p);
  double s = 0.0;
  for (int i = 0; i < M.dim; ++i) {
    for (int j = 0; j < M.dim; ++j) s += c.ginv(i, j) * fj.hess(i, j);
    s += c.b[i] * fj.grad[i];
  }
  return s;
}

/// Exact |d f|_g of a closed form.
inline double exact_gradient_norm(const ModelManifold& M, const ClosedForm& f, const Vec& p) {
  const FieldJet fj = f.jet(p);
  const Mat ginv = checked_inverse(M.chart.metric(p));
  return std::sqrt(std::max(0.0, fj.grad.dot(ginv * fj.grad)));
}

/// Discrete Laplace-Beltrami operator on the grid nodes.
///
/// Axis second and first derivatives use the three-point Shortley-Weller
/// formulas on the node's two arms (exact on quadratics for any arm lengths).
/// Cross derivatives average the one-quadrant stencils
/// s t [u(x + s h e_a + t h e_c) - u(x + s h e_a) - u(x + t h e_c) + u(x)] / h^2
/// over usable quadrants (all three points are nodes); with all four present
/// this is the usual centred cross stencil, with an opposite pair it is still
/// second order, otherwise first order.
inline SparseOperator assemble_laplacian(const GridPtr& grid) {
  const BallGrid& g = *grid;
  const ModelManifold& M = g.manifold();
  const int m = g.dim();
  const double h = g.spacing();
  std::vector<Eigen::Triplet<double>> tin, tbd;
  tin.reserve(g.size() * (1 + 2 * m + 2 * m * (m - 1)));
  std::size_t dropped = 0;

  auto add = [&](std::size_t row, const Arm& arm, double w) {
    if (arm.is_node())
      tin.emplace_back(static_cast<int>(row), arm.node, w);
    else
      tbd.emplace_back(static_cast<int>(row), arm.boundary, w);
  };

  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto c = detail::laplacian_coefficients(M, g.node(i));
    double diag = 0.0;
    for (int a = 0; a < m; ++a) {
      const Arm& L = g.arm(i, a, -1);
      const Arm& R = g.arm(i, a, +1);
      const double hl = L.length, hr = R.length, hs = hl + hr;
      const double caa = c.ginv(a, a), ba = c.b[a];
      const double wl = caa * 2.0 / (hl * hs) - ba * hr / (hl * hs);
      const double wr = caa * 2.0 / (hr * hs) + ba * hl / (hr * hs);
      diag += -caa * 2.0 / (hl * hr) + ba * (hr - hl) / (hl * hr);
      add(i, L, wl);
      add(i, R, wr);
    }
    for (int a = 0; a < m; ++a)
      for (int b = a + 1; b < m; ++b) {
        const double cab = 2.0 * c.ginv(a, b);
        if (cab == 0.0) continue;
        struct Quadrant {
          int na, nb, nd;
          double sign;
        };
        // quadrant q = 2 * (s > 0) + (t > 0)
        std::array<Quadrant, 4> all;
        std::array<bool, 4> ok{};
        for (int s : {-1, 1})
          for (int t : {-1, 1}) {
            const int q = 2 * (s > 0) + (t > 0);
            const Arm& A = g.arm(i, a, s);
            const Arm& B = g.arm(i, b, t);
            if (!A.is_node() || !B.is_node()) continue;
            auto k = g.lattice(i);
            k[a] += s;
            k[b] += t;
            const int d = g.find(k);
            if (d < 0) continue;
            all[q] = {A.node, B.node, d, static_cast<double>(s * t)};
            ok[q] = true;
          }
        // Opposite quadrants cancel the first-order error terms, so a full
        // set or an opposite pair is preferred over whatever is left.
        std::array<Quadrant, 4> quads;
        int nq = 0;
        auto take = [&](std::initializer_list<int> qs) {
          for (int q : qs)
            if (ok[q]) quads[nq++] = all[q];
        };
        if (ok[0] && ok[3])
          take(ok[1] && ok[2] ? std::initializer_list<int>{0, 1, 2, 3} : std::initializer_list<int>{0, 3});
        else if (ok[1] && ok[2])
          take({1, 2});
        else
          take({0, 1, 2, 3});
        if (nq == 0) {
          ++dropped;
          continue;
        }
        const double w = cab / (nq * h * h);
        for (int q = 0; q < nq; ++q) {
          const auto& Q = quads[q];
          tin.emplace_back(static_cast<int>(i), Q.nd, w * Q.sign);
          tin.emplace_back(static_cast<int>(i), Q.na, -w * Q.sign);
          tin.emplace_back(static_cast<int>(i), Q.nb, -w * Q.sign);
          diag += w * Q.sign;
        }
      }
    tin.emplace_back(static_cast<int>(i), static_cast<int>(i), diag);
  }

  SparseOperator op;
  op.grid = grid;
  op.dropped_mixed_terms = dropped;
  const auto n = static_cast<Eigen::Index>(g.size());
  op.interior.resize(n, n);
  op.interior.setFromTriplets(tin.begin(), tin.end());
  op.interior.prune(1e-300, 1.0);
  op.boundary.resize(n, static_cast<Eigen::Index>(g.boundary_size()));
  op.boundary.setFromTriplets(tbd.begin(), tbd.end());
  op.boundary.prune(1e-300, 1.0);
  op.interior.makeCompressed();
  op.boundary.makeCompressed();
  return op;
}

// ---------------------------------------------------------------------------
// Norms

inline constexpr std::size_t kHolderExactNodeLimit = 5000;
inline constexpr std::size_t kHolderSampledPairs = 1000000;

struct NormReport {
  BallSpec region;
  double h = 0.0;
  std::size_t nodes = 0;
  double sup_norm = 0.0;
  std::map<double, double> lq_norms;
  double w2q_norm = 0.0;
  double w2q_exponent = 0.0;
  std::map<double, double> holder_seminorm;
  bool holder_sampled = false;
};

/// Volume weights sqrt(det g) h^m at the given nodes.
inline std::vector<double> volume_weights(const BallGrid& g, const std::vector<int>& idx) {
  const double cell = std::pow(g.spacing(), g.dim());
  std::vector<double> w(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k)
    w[k] = std::sqrt(g.manifold().chart.metric(g.node(idx[k])).determinant()) * cell;
  return w;
}

inline double lq_norm(const std::vector<double>& f, const std::vector<int>& idx, const std::vector<double>& w,
                      double q) {
  if (std::isinf(q)) {
    double s = 0.0;
    for (int i : idx) s = std::max(s, std::abs(f[i]));
    return s;
  }
  double s = 0.0;
  for (std::size_t k = 0; k < idx.size(); ++k) s += std::pow(std::abs(f[idx[k]]), q) * w[k];
  return std::pow(s, 1.0 / q);
}

/// sup |f(x) - f(y)| / |x - y|^alpha over node pairs (Euclidean coordinate
/// distance); exact up to kHolderExactNodeLimit nodes, else sampled.
inline double holder_seminorm(const BallGrid& g, const std::vector<double>& f, const std::vector<int>& idx,
                              double alpha, bool* sampled = nullptr, std::uint64_t seed = 0) {
  double best = 0.0;
  const std::size_t n = idx.size();
  if (n <= kHolderExactNodeLimit) {
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a + 1; b < n; ++b) {
        const double d = (g.node(idx[a]) - g.node(idx[b])).norm();
        best = std::max(best, std::abs(f[idx[a]] - f[idx[b]]) / std::pow(d, alpha));
      }
    if (sampled) *sampled = false;
    return best;
  }
  Rng rng(seed);
  for (std::size_t s = 0; s < kHolderSampledPairs; ++s) {
    const std::size_t a = rng.below(n), b = rng.below(n);
    if (a == b) continue;
    const double d = (g.node(idx[a]) - g.node(idx[b])).norm();
    best = std::max(best, std::abs(f[idx[a]] - f[idx[b]]) / std::pow(d, alpha));
  }
  if (sampled) *sampled = true;
  return best;
}

/// Norms of a field over a sub-ball of its grid. The W^{2,q} norm is
/// ||f||_q + sum_a ||d_a f||_q + sum_{a,b} ||d_a d_b f||_q over all ordered
/// pairs (a, b), with differences taken on the whole grid.
inline NormReport norms(const ScalarField& phi, const BallSpec& region, double q, double alpha,
                        std::uint64_t seed = 0) {
  require(q >= 1.0, Errc::parameter, "q must be at least 1");
  require(alpha > 0.0 && alpha <= 1.0, Errc::parameter, "alpha must lie in (0, 1]");
  const BallGrid& g = *phi.grid();
  const auto idx = g.nodes_in(region);
  if (idx.empty()) throw Error(Errc::region, "subregion contains no grid node");
  const auto w = volume_weights(g, idx);
  const auto& f = phi.values();

  NormReport r;
  r.region = region;
  r.h = g.spacing();
  r.nodes = idx.size();
  r.sup_norm = lq_norm(f, idx, w, kInf);
  r.lq_norms[q] = lq_norm(f, idx, w, q);
  r.w2q_exponent = q;
  double w2 = r.lq_norms[q];
  for (int a = 0; a < g.dim(); ++a) {
    const auto da = partial(g, f, a);
    w2 += lq_norm(da, idx, w, q);
    for (int b = 0; b < g.dim(); ++b) w2 += lq_norm(a == b ? second_partial(g, f, a, a) : partial(g, da, b), idx, w, q);
  }
  r.w2q_norm = w2;
  bool sampled = false;
  r.holder_seminorm[alpha] = holder_seminorm(g, f, idx, alpha, &sampled, seed);
  r.holder_sampled = sampled;
  return r;
}

}  // namespace c1bench
