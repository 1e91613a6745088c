#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "aasm/sparse_matrix.hpp"

namespace aasm {

/// Structured discretization of the unit square.
///
/// `cells_per_side` is the fine resolution n (h = 1/n), `coarse_cells_per_side`
/// the number of subdomains per side N (H = 1/N) and `overlap_layers` the
/// overlap width in fine cells d (delta = d h).
struct MeshParams {
  int cells_per_side = 0;
  int coarse_cells_per_side = 0;
  int overlap_layers = 0;

  double h() const { return 1.0 / cells_per_side; }
  double H() const { return 1.0 / coarse_cells_per_side; }
  double delta() const { return overlap_layers * h(); }
  /// H/h, the number of fine cells per subdomain side.
  int ratio() const { return cells_per_side / coarse_cells_per_side; }

  /// Throws std::invalid_argument unless n > 0, N > 0, N divides n and
  /// 0 < d <= n/(2N).
  void validate() const;
};

enum class MeshLevel { fine, coarse };

using ScalarField = std::function<double(double x, double y)>;
using Vec2 = std::array<double, 2>;

struct Triangle {
  std::array<int, 3> nodes;
  /// Constant gradients of the three nodal basis functions.
  std::array<Vec2, 3> basis_gradients;
  double area;
};

/// Continuous piecewise linear space on a uniform triangulation with
/// homogeneous Dirichlet conditions. Every square cell is split along its
/// lower-left to upper-right diagonal. Nodes and DOFs are numbered
/// lexicographically, x fastest.
class P1Space {
 public:
  P1Space(int cells_per_side, MeshLevel level);

  int cells_per_side() const { return n_; }
  double h() const { return 1.0 / n_; }
  MeshLevel level() const { return level_; }

  std::size_t num_nodes() const { return static_cast<std::size_t>(n_ + 1) * (n_ + 1); }
  std::size_t num_dofs() const { return static_cast<std::size_t>(n_ - 1) * (n_ - 1); }

  std::span<const Triangle> triangles() const { return triangles_; }

  int node_index(int i, int j) const { return j * (n_ + 1) + i; }
  Vec2 node_coords(int node) const;
  /// DOF of a node, -1 on the boundary.
  int node_dof(int node) const { return node_dof_[node]; }
  int dof_node(int dof) const { return dof_node_[dof]; }

 private:
  int n_;
  MeshLevel level_;
  std::vector<Triangle> triangles_;
  std::vector<int> node_dof_;
  std::vector<int> dof_node_;
};

enum class EdgeOrientation { vertical, horizontal };

struct Edge {
  EdgeOrientation orientation;
  /// Vertical edge (i, j) lies on x = i h spanning cell row j; horizontal edge
  /// (i, j) lies on y = j h spanning cell column i.
  int i;
  int j;
  double length;
  Vec2 normal;
  int dof;  // -1 on the boundary
};

struct Cell {
  /// Edge ids in the order left, right, bottom, top.
  std::array<int, 4> edges;
};

/// Lowest-order Raviart-Thomas space on the uniform square mesh with
/// vanishing normal flux on the boundary. The DOF of an interior edge is the
/// constant normal component along +x (vertical edges) or +y (horizontal).
/// Vertical edges are numbered before horizontal ones.
class RT0Space {
 public:
  explicit RT0Space(int cells_per_side);

  int cells_per_side() const { return n_; }
  double h() const { return 1.0 / n_; }
  std::size_t num_cells() const { return cells_.size(); }
  std::size_t num_dofs() const { return dof_edge_.size(); }

  std::span<const Cell> cells() const { return cells_; }
  std::span<const Edge> edges() const { return edges_; }
  int cell_index(int i, int j) const { return j * n_ + i; }
  Vec2 cell_center(int cell) const;
  int vertical_edge(int i, int j) const { return j * (n_ + 1) + i; }
  int horizontal_edge(int i, int j) const { return n_ * (n_ + 1) + j * n_ + i; }
  int dof_edge(int dof) const { return dof_edge_[dof]; }

  /// Outward orientation sign of each cell edge relative to the edge normal.
  static constexpr std::array<double, 4> kOutwardSign = {-1.0, 1.0, -1.0, 1.0};

 private:
  int n_;
  std::vector<Cell> cells_;
  std::vector<Edge> edges_;
  std::vector<int> dof_edge_;
};

P1Space build_p1_space(const MeshParams& params, MeshLevel level);
RT0Space build_rt0_space(const MeshParams& params);

/// Per-triangle gradient of a DOF vector.
std::vector<Vec2> p1_gradient(const P1Space& space, std::span<const double> u);
/// Per-triangle gradient of a full nodal vector, boundary values included.
std::vector<Vec2> p1_nodal_gradient(const P1Space& space, std::span<const double> node_values);

/// Per-cell divergence of an RT0 function.
std::vector<double> rt0_divergence(const RT0Space& space, std::span<const double> u);

/// Fine-DOF x coarse-DOF matrix whose column j holds the fine nodal values of
/// coarse hat function j.
SparseMatrix coarse_interpolation(const P1Space& coarse, const P1Space& fine);

Vector nodal_interpolate(const ScalarField& g, const P1Space& space);
Vector nodal_interpolate_all(const ScalarField& g, const P1Space& space);

}  // namespace aasm
