#pragma once

// Uniform grids over coordinate balls, with Shortley-Weller arm data.
//
// Nodes are the lattice points center + h Z^m strictly inside the ball. Each
// node has 2m arms, one per axis direction: an arm ends at the neighbouring
// node (length h) or at the point where the axis line leaves the ball (length
// in (0, h]); the latter are the grid's boundary points and carry Dirichlet
// data.

#include "c1bench/core.hpp"
#include "c1bench/functions.hpp"
#include "c1bench/manifold.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace c1bench {

struct Arm {
  int node = -1;      // neighbour node index, or -1
  int boundary = -1;  // boundary point index, or -1
  double length = 0.0;
  bool is_node() const { return node >= 0; }
};

/// A ball in chart coordinates; `closed` selects |p - c| <= r instead of < r.
struct BallSpec {
  Vec center;
  double radius = 0.0;
  bool closed = true;

  bool contains(const Vec& p) const {
    const double d = (p - center).norm();
    return closed ? d <= radius * (1.0 + 1e-12) : d < radius;
  }
};

class BallGrid {
 public:
  BallGrid(ModelManifold manifold, Vec center, double radius, double spacing)
      : manifold_(std::move(manifold)), center_(std::move(center)), radius_(radius), spacing_(spacing) {
    build();
  }

  const ModelManifold& manifold() const { return manifold_; }
  int dim() const { return manifold_.dim; }
  const Vec& center() const { return center_; }
  double radius() const { return radius_; }
  double spacing() const { return spacing_; }

  std::size_t size() const { return nodes_.size(); }
  const Vec& node(std::size_t i) const { return nodes_[i]; }
  const std::vector<Vec>& nodes() const { return nodes_; }
  const std::array<int, kMaxDim>& lattice(std::size_t i) const { return lattice_[i]; }

  const Arm& arm(std::size_t i, int axis, int dir) const { return arms_[i][2 * axis + (dir > 0 ? 1 : 0)]; }
  bool is_interior(std::size_t i) const { return interior_[i]; }
  std::size_t interior_count() const {
    std::size_t n = 0;
    for (bool b : interior_) n += b ? 1 : 0;
    return n;
  }

  std::size_t boundary_size() const { return boundary_.size(); }
  const Vec& boundary_point(std::size_t b) const { return boundary_[b]; }
  const std::vector<Vec>& boundary_points() const { return boundary_; }

  /// Node at lattice offset k, or -1.
  int find(const std::array<int, kMaxDim>& k) const {
    std::size_t flat = 0;
    for (int a = 0; a < dim(); ++a) {
      const int c = k[a] + K_;
      if (c < 0 || c > 2 * K_) return -1;
      flat = flat * (2 * K_ + 1) + static_cast<std::size_t>(c);
    }
    return index_[flat];
  }

  /// Index of the node at the ball centre.
  int center_node() const { return find({}); }

  /// Node indices lying in a coordinate ball.
  std::vector<int> nodes_in(const BallSpec& ball) const {
    std::vector<int> out;
    for (std::size_t i = 0; i < nodes_.size(); ++i)
      if (ball.contains(nodes_[i])) out.push_back(static_cast<int>(i));
    return out;
  }

 private:
  void build() {
    const int m = dim();
    const double h = spacing_;
    K_ = static_cast<int>(std::ceil(radius_ / h)) + 1;
    std::size_t total = 1;
    for (int a = 0; a < m; ++a) total *= static_cast<std::size_t>(2 * K_ + 1);
    index_.assign(total, -1);

    std::array<int, kMaxDim> k{};
    for (int a = 0; a < m; ++a) k[a] = -K_;
    std::size_t flat = 0;
    while (true) {
      Vec rel(m);
      for (int a = 0; a < m; ++a) rel[a] = h * k[a];
      if (rel.norm() < radius_) {
        index_[flat] = static_cast<int>(nodes_.size());
        nodes_.push_back(center_ + rel);
        lattice_.push_back(k);
      }
      ++flat;
      int a = m - 1;
      while (a >= 0 && ++k[a] > K_) k[a--] = -K_;
      if (a < 0) break;
    }

    arms_.resize(nodes_.size());
    interior_.assign(nodes_.size(), true);
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      const Vec rel = nodes_[i] - center_;
      for (int a = 0; a < m; ++a)
        for (int dir : {-1, +1}) {
          auto kk = lattice_[i];
          kk[a] += dir;
          Arm arm;
          const int j = find(kk);
          if (j >= 0) {
            arm.node = j;
            arm.length = h;
          } else {
            // |rel + s dir e_a| = radius
            const double disc = rel[a] * rel[a] + radius_ * radius_ - rel.squaredNorm();
            double s = -dir * rel[a] + std::sqrt(std::max(0.0, disc));
            s = std::clamp(s, 1e-300, h);
            arm.length = s;
            arm.boundary = static_cast<int>(boundary_.size());
            Vec bp = nodes_[i];
            bp[a] += dir * s;
            boundary_.push_back(bp);
            interior_[i] = false;
          }
          arms_[i][2 * a + (dir > 0 ? 1 : 0)] = arm;
        }
    }
  }

  ModelManifold manifold_;
  Vec center_;
  double radius_;
  double spacing_;
  int K_ = 0;
  std::vector<int> index_;
  std::vector<Vec> nodes_;
  std::vector<std::array<int, kMaxDim>> lattice_;
  std::vector<std::array<Arm, 2 * kMaxDim>> arms_;
  std::vector<bool> interior_;
  std::vector<Vec> boundary_;
};

using GridPtr = std::shared_ptr<const BallGrid>;

/// Grid on the coordinate ball B(x, r) with spacing h.
inline GridPtr build_ball_grid(const ModelManifold& M, const Vec& x, double r, double h) {
  require(r > 0.0 && h > 0.0, Errc::parameter, "radius and spacing must be positive");
  check_domain(M, x);
  const double geodesic_r = r * std::sqrt(M.metric_factor);
  if (!(geodesic_r < M.inj_radius_at(x))) {
    std::ostringstream os;
    os << "ball radius " << geodesic_r << " reaches the injectivity radius " << M.inj_radius_at(x)
       << " of " << M.name();
    throw Error(Errc::chart, os.str());
  }
  auto grid = std::make_shared<const BallGrid>(M, x, r, h);
  for (const Vec& p : grid->nodes())
    if (!M.chart.contains(p)) throw Error(Errc::chart, "ball leaves the chart domain of " + M.name());
  for (const Vec& p : grid->boundary_points())
    if (!M.chart.contains(p)) throw Error(Errc::chart, "ball boundary leaves the chart domain of " + M.name());
  if (grid->interior_count() == 0) throw Error(Errc::resolution, "grid has no interior node");
  return grid;
}

/// Values on the nodes of a grid.
class ScalarField {
 public:
  ScalarField() = default;
  ScalarField(GridPtr grid, std::vector<double> values) : grid_(std::move(grid)), values_(std::move(values)) {
    require(grid_ && values_.size() == grid_->size(), Errc::parameter, "field size does not match its grid");
  }
  explicit ScalarField(GridPtr grid, double fill = 0.0)
      : grid_(std::move(grid)), values_(grid_->size(), fill) {}

  static ScalarField sample(GridPtr grid, const ClosedForm& f) {
    std::vector<double> v(grid->size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(grid->node(i));
    return ScalarField(std::move(grid), std::move(v));
  }

  const GridPtr& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  bool all_finite() const {
    for (double v : values_)
      if (!std::isfinite(v)) return false;
    return true;
  }

 private:
  GridPtr grid_;
  std::vector<double> values_;
};

/// Dirichlet data on the boundary points of a grid.
class BoundaryField {
 public:
  BoundaryField() = default;
  BoundaryField(GridPtr grid, std::vector<double> values) : grid_(std::move(grid)), values_(std::move(values)) {
    require(grid_ && values_.size() == grid_->boundary_size(), Errc::parameter,
            "boundary data size does not match its grid");
  }
  explicit BoundaryField(GridPtr grid, double fill = 0.0)
      : grid_(std::move(grid)), values_(grid_->boundary_size(), fill) {}

  static BoundaryField sample(GridPtr grid, const ClosedForm& f) {
    std::vector<double> v(grid->boundary_size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(grid->boundary_point(i));
    return BoundaryField(std::move(grid), std::move(v));
  }

  const GridPtr& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  const std::vector<double>& values() const { return values_; }

 private:
  GridPtr grid_;
  std::vector<double> values_;
};

inline void check_same_grid(const GridPtr& a, const GridPtr& b) {
  require(a && a == b, Errc::parameter, "fields live on different grids");
}

// ---------------------------------------------------------------------------
// CSV: one row per node, columns x1..xm,value, full round-trip precision.

inline void write_field_csv(std::ostream& os, const ScalarField& f) {
  const int m = f.grid()->dim();
  for (int a = 0; a < m; ++a) os << "x" << (a + 1) << ",";
  os << "value\n";
  os << std::setprecision(17);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const Vec& p = f.grid()->node(i);
    for (int a = 0; a < m; ++a) os << p[a] << ",";
    os << f[i] << "\n";
  }
}

inline void write_field_csv(const std::string& path, const ScalarField& f) {
  std::ofstream os(path);
  if (!os) throw Error(Errc::io, "cannot open " + path);
  write_field_csv(os, f);
}

/// Reads a field written by write_field_csv back onto `grid`; node
/// coordinates must match row by row to 1e-12.
inline ScalarField read_field_csv(std::istream& is, GridPtr grid) {
  const int m = grid->dim();
  std::string line;
  if (!std::getline(is, line)) throw Error(Errc::parse, "empty field CSV");
  std::vector<double> values;
  std::size_t row = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(std::stod(cell));
    if (static_cast<int>(cells.size()) != m + 1)
      throw Error(Errc::parse, "field CSV row " + std::to_string(row + 2) + " has the wrong column count");
    if (row >= grid->size()) throw Error(Errc::parse, "field CSV has more rows than grid nodes");
    for (int a = 0; a < m; ++a)
      if (std::abs(cells[a] - grid->node(row)[a]) > 1e-12)
        throw Error(Errc::parse, "field CSV row " + std::to_string(row + 2) + " does not match the grid");
    values.push_back(cells[m]);
    ++row;
  }
  if (row != grid->size()) throw Error(Errc::parse, "field CSV has fewer rows than grid nodes");
  return ScalarField(std::move(grid), std::move(values));
}

}  // namespace c1bench
