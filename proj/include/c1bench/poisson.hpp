#pragma once

// Dirichlet problems Delta_g psi = f on gridded balls.

#include "c1bench/operators.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>

#include <memory>
#include <sstream>
#include <string>

namespace c1bench {

struct SolverOptions {
  double tolerance = 1e-10;  // relative residual ||A u - b|| / ||b||
  int max_iterations = 100000;
  std::size_t direct_limit = 250000;  // unknowns up to which 2D systems are factorized
};

struct SolverStats {
  std::string method;
  int iterations = 0;
  double residual = 0.0;
};

/// Reusable solver for one discrete Laplacian: sparse LU for small or planar
/// systems, BiCGSTAB with an incomplete LU preconditioner otherwise. Either
/// way the relative residual is checked after the solve.
class DirichletSolver {
 public:
  explicit DirichletSolver(SparseOperator op, SolverOptions options = {})
      : op_(std::move(op)), options_(options) {
    const auto n = op_.rows();
    const int m = op_.grid->dim();
    using ColMatrix = Eigen::SparseMatrix<double>;
    a_ = ColMatrix(op_.interior);
    if (n <= options_.direct_limit && (m <= 2 || n <= 10000)) {
      lu_ = std::make_unique<Eigen::SparseLU<ColMatrix>>();
      lu_->analyzePattern(a_);
      lu_->factorize(a_);
      if (lu_->info() != Eigen::Success) throw SolverError(kInf, "sparse LU factorization failed");
    } else {
      it_ = std::make_unique<Eigen::BiCGSTAB<ColMatrix, Eigen::IncompleteLUT<double>>>();
      it_->preconditioner().setDroptol(1e-4);
      it_->preconditioner().setFillfactor(4);
      it_->setTolerance(options_.tolerance * 0.1);
      it_->setMaxIterations(options_.max_iterations);
      it_->compute(a_);
      if (it_->info() != Eigen::Success) throw SolverError(kInf, "incomplete LU preconditioner failed");
    }
  }

  const SparseOperator& op() const { return op_; }
  const SolverStats& last_stats() const { return stats_; }

  /// Solves L psi = f with psi = boundary on the arm intersection points.
  ScalarField solve(const ScalarField& f, const BoundaryField& boundary) {
    check_same_grid(op_.grid, f.grid());
    check_same_grid(op_.grid, boundary.grid());
    const auto n = static_cast<Eigen::Index>(f.size());
    Eigen::Map<const Eigen::VectorXd> fv(f.values().data(), n);
    Eigen::Map<const Eigen::VectorXd> bv(boundary.values().data(), static_cast<Eigen::Index>(boundary.size()));
    const Eigen::VectorXd rhs = fv - op_.boundary * bv;
    const double rn = rhs.norm();
    Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
    stats_ = {};
    if (rn > 0.0) {
      if (lu_) {
        stats_.method = "sparse_lu";
        u = lu_->solve(rhs);
        // a few refinement sweeps guard the residual contract
        for (int k = 0; k < 3 && (a_ * u - rhs).norm() > options_.tolerance * rn; ++k) {
          u += lu_->solve(rhs - a_ * u);
          ++stats_.iterations;
        }
      } else {
        stats_.method = "bicgstab_ilut";
        u = it_->solve(rhs);
        stats_.iterations = static_cast<int>(it_->iterations());
      }
      stats_.residual = (a_ * u - rhs).norm() / rn;
    }
    if (!(stats_.residual <= options_.tolerance) || !u.allFinite()) {
      std::ostringstream os;
      os << stats_.method << " stopped at relative residual " << stats_.residual << " after "
         << stats_.iterations << " iterations";
      throw SolverError(stats_.residual, os.str());
    }
    return ScalarField(op_.grid, std::vector<double>(u.data(), u.data() + n));
  }

 private:
  SparseOperator op_;
  SolverOptions options_;
  Eigen::SparseMatrix<double> a_;
  std::unique_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> lu_;
  std::unique_ptr<Eigen::BiCGSTAB<Eigen::SparseMatrix<double>, Eigen::IncompleteLUT<double>>> it_;
  SolverStats stats_;
};

inline ScalarField solve_dirichlet(const GridPtr& grid, const ScalarField& f, const BoundaryField& boundary,
                                   const SolverOptions& options = {}, SolverStats* stats = nullptr) {
  DirichletSolver solver(assemble_laplacian(grid), options);
  auto psi = solver.solve(f, boundary);
  if (stats) *stats = solver.last_stats();
  return psi;
}

struct ManufacturedProblem {
  ScalarField f;
  BoundaryField boundary;
  ScalarField psi_ref;
};

/// f = Delta_g psi_exact at the nodes (exact metric and field derivatives),
/// boundary data and reference values sampled from psi_exact.
inline ManufacturedProblem manufactured_problem(const ModelManifold& M, const ClosedForm& psi_exact,
                                                const GridPtr& grid) {
  std::vector<double> f(grid->size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = exact_laplacian(M, psi_exact, grid->node(i));
  return {ScalarField(grid, std::move(f)), BoundaryField::sample(grid, psi_exact),
          ScalarField::sample(grid, psi_exact)};
}

inline ManufacturedProblem manufactured_problem(const ClosedForm& psi_exact, const GridPtr& grid) {
  return manufactured_problem(grid->manifold(), psi_exact, grid);
}

inline double sup_difference(const ScalarField& a, const ScalarField& b) {
  check_same_grid(a.grid(), b.grid());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s = std::max(s, std::abs(a[i] - b[i]));
  return s;
}

/// Sup-norm errors of manufactured solves on a sequence of spacings and the
/// observed orders log2(e_k / e_{k+1}) / log2(h_k / h_{k+1}).
struct ConvergenceStudy {
  std::string manifold;
  std::string field;
  double radius = 0.0;
  std::vector<double> spacings;
  std::vector<double> errors;
  std::vector<double> orders;
  std::vector<double> residuals;
  std::vector<std::size_t> nodes;
};

inline ConvergenceStudy convergence_study(const ModelManifold& M, const Vec& x, double r, const ClosedForm& psi,
                                          const std::vector<double>& spacings, const SolverOptions& options = {}) {
  require(spacings.size() >= 2, Errc::parameter, "a convergence study needs at least two spacings");
  ConvergenceStudy s;
  s.manifold = M.name();
  s.field = psi.id();
  s.radius = r;
  s.spacings = spacings;
  for (double h : spacings) {
    const auto grid = build_ball_grid(M, x, r, h);
    const auto p = manufactured_problem(M, psi, grid);
    SolverStats st;
    const auto u = solve_dirichlet(grid, p.f, p.boundary, options, &st);
    s.errors.push_back(sup_difference(u, p.psi_ref));
    s.residuals.push_back(st.residual);
    s.nodes.push_back(grid->size());
  }
  for (std::size_t k = 0; k + 1 < spacings.size(); ++k)
    s.orders.push_back(std::log2(s.errors[k] / s.errors[k + 1]) / std::log2(spacings[k] / spacings[k + 1]));
  return s;
}

}  // namespace c1bench
