#include "aasm/mesh.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace aasm {

void MeshParams::validate() const {
  const int n = cells_per_side;
  const int N = coarse_cells_per_side;
  const int d = overlap_layers;
  if (n <= 0 || N <= 0) throw std::invalid_argument("mesh: cell counts must be positive");
  if (n % N != 0)
    throw std::invalid_argument("mesh: n = " + std::to_string(n) + " is not a multiple of N = " +
                                std::to_string(N));
  if (d <= 0) throw std::invalid_argument("mesh: overlap must be at least one layer");
  if (2 * d > n / N)
    throw std::invalid_argument("mesh: overlap d = " + std::to_string(d) + " exceeds H/(2h) = " +
                                std::to_string(n / N) + "/2");
}

namespace {

Triangle make_triangle(const P1Space& space, std::array<int, 3> nodes) {
  const Vec2 a = space.node_coords(nodes[0]);
  const Vec2 b = space.node_coords(nodes[1]);
  const Vec2 c = space.node_coords(nodes[2]);
  const double det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
  Triangle t{nodes, {}, 0.5 * std::abs(det)};
  // grad lambda_i = rot90(opposite edge) / det
  const std::array<Vec2, 3> p = {a, b, c};
  for (int v = 0; v < 3; ++v) {
    const Vec2& q = p[(v + 1) % 3];
    const Vec2& r = p[(v + 2) % 3];
    t.basis_gradients[v] = {(q[1] - r[1]) / det, (r[0] - q[0]) / det};
  }
  return t;
}

}  // namespace

P1Space::P1Space(int cells_per_side, MeshLevel level) : n_(cells_per_side), level_(level) {
  if (n_ < 2) throw std::invalid_argument("P1 space needs at least 2 cells per side (no interior DOF)");
  node_dof_.assign(num_nodes(), -1);
  dof_node_.reserve(num_dofs());
  for (int j = 1; j < n_; ++j)
    for (int i = 1; i < n_; ++i) {
      node_dof_[node_index(i, j)] = static_cast<int>(dof_node_.size());
      dof_node_.push_back(node_index(i, j));
    }
  triangles_.reserve(2 * static_cast<std::size_t>(n_) * n_);
  for (int j = 0; j < n_; ++j)
    for (int i = 0; i < n_; ++i) {
      const int p00 = node_index(i, j);
      const int p10 = node_index(i + 1, j);
      const int p11 = node_index(i + 1, j + 1);
      const int p01 = node_index(i, j + 1);
      triangles_.push_back(make_triangle(*this, {p00, p10, p11}));
      triangles_.push_back(make_triangle(*this, {p00, p11, p01}));
    }
}

Vec2 P1Space::node_coords(int node) const {
  const int i = node % (n_ + 1);
  const int j = node / (n_ + 1);
  return {static_cast<double>(i) / n_, static_cast<double>(j) / n_};
}

RT0Space::RT0Space(int cells_per_side) : n_(cells_per_side) {
  if (n_ < 2) throw std::invalid_argument("RT0 space needs at least 2 cells per side (no interior edge)");
  const double h = 1.0 / n_;
  edges_.reserve(2 * static_cast<std::size_t>(n_) * (n_ + 1));
  for (int j = 0; j < n_; ++j)
    for (int i = 0; i <= n_; ++i) {
      const bool interior = i > 0 && i < n_;
      edges_.push_back({EdgeOrientation::vertical, i, j, h, {1.0, 0.0}, interior ? 0 : -1});
    }
  for (int j = 0; j <= n_; ++j)
    for (int i = 0; i < n_; ++i) {
      const bool interior = j > 0 && j < n_;
      edges_.push_back({EdgeOrientation::horizontal, i, j, h, {0.0, 1.0}, interior ? 0 : -1});
    }
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    if (edges_[e].dof < 0) continue;
    edges_[e].dof = static_cast<int>(dof_edge_.size());
    dof_edge_.push_back(static_cast<int>(e));
  }
  cells_.reserve(static_cast<std::size_t>(n_) * n_);
  for (int j = 0; j < n_; ++j)
    for (int i = 0; i < n_; ++i)
      cells_.push_back({{vertical_edge(i, j), vertical_edge(i + 1, j), horizontal_edge(i, j),
                         horizontal_edge(i, j + 1)}});
}

Vec2 RT0Space::cell_center(int cell) const {
  const int i = cell % n_;
  const int j = cell / n_;
  return {(i + 0.5) / n_, (j + 0.5) / n_};
}

P1Space build_p1_space(const MeshParams& params, MeshLevel level) {
  if (params.cells_per_side <= 0 || params.coarse_cells_per_side <= 0)
    throw std::invalid_argument("mesh: cell counts must be positive");
  if (params.cells_per_side % params.coarse_cells_per_side != 0)
    throw std::invalid_argument("mesh: n is not a multiple of N");
  return P1Space(level == MeshLevel::fine ? params.cells_per_side : params.coarse_cells_per_side,
                 level);
}

RT0Space build_rt0_space(const MeshParams& params) { return RT0Space(params.cells_per_side); }

std::vector<Vec2> p1_nodal_gradient(const P1Space& space, std::span<const double> node_values) {
  if (node_values.size() != space.num_nodes())
    throw std::invalid_argument("p1_nodal_gradient: vector does not match the space");
  std::vector<Vec2> out;
  out.reserve(space.triangles().size());
  for (const auto& t : space.triangles()) {
    Vec2 g{0.0, 0.0};
    for (int v = 0; v < 3; ++v) {
      g[0] += node_values[t.nodes[v]] * t.basis_gradients[v][0];
      g[1] += node_values[t.nodes[v]] * t.basis_gradients[v][1];
    }
    out.push_back(g);
  }
  return out;
}

std::vector<Vec2> p1_gradient(const P1Space& space, std::span<const double> u) {
  if (u.size() != space.num_dofs()) throw std::invalid_argument("p1_gradient: vector does not match the space");
  Vector nodal(space.num_nodes(), 0.0);
  for (std::size_t d = 0; d < u.size(); ++d) nodal[space.dof_node(static_cast<int>(d))] = u[d];
  return p1_nodal_gradient(space, nodal);
}

std::vector<double> rt0_divergence(const RT0Space& space, std::span<const double> u) {
  if (u.size() != space.num_dofs()) throw std::invalid_argument("rt0_divergence: vector does not match the space");
  const auto edges = space.edges();
  const double inv_h = 1.0 / space.h();
  std::vector<double> div;
  div.reserve(space.num_cells());
  for (const auto& c : space.cells()) {
    double flux = 0.0;
    for (int a = 0; a < 4; ++a) {
      const int dof = edges[c.edges[a]].dof;
      if (dof >= 0) flux += RT0Space::kOutwardSign[a] * u[dof];
    }
    div.push_back(flux * inv_h);
  }
  return div;
}

SparseMatrix coarse_interpolation(const P1Space& coarse, const P1Space& fine) {
  const int n = fine.cells_per_side();
  const int N = coarse.cells_per_side();
  if (coarse.level() != MeshLevel::coarse || fine.level() != MeshLevel::fine || n % N != 0)
    throw std::invalid_argument("coarse_interpolation: spaces are not nested");
  const int r = n / N;
  std::vector<Triplet> t;
  for (std::size_t fd = 0; fd < fine.num_dofs(); ++fd) {
    const int node = fine.dof_node(static_cast<int>(fd));
    const int i = node % (n + 1);
    const int j = node / (n + 1);
    const int ci = std::min(i / r, N - 1);
    const int cj = std::min(j / r, N - 1);
    const double xi = static_cast<double>(i - ci * r) / r;
    const double eta = static_cast<double>(j - cj * r) / r;
    // Barycentric weights in the coarse cell, same diagonal as the fine mesh.
    std::array<std::pair<int, double>, 3> w;
    if (xi >= eta) {
      w = {{{coarse.node_index(ci, cj), 1.0 - xi},
            {coarse.node_index(ci + 1, cj), xi - eta},
            {coarse.node_index(ci + 1, cj + 1), eta}}};
    } else {
      w = {{{coarse.node_index(ci, cj), 1.0 - eta},
            {coarse.node_index(ci + 1, cj + 1), xi},
            {coarse.node_index(ci, cj + 1), eta - xi}}};
    }
    for (const auto& [cnode, value] : w) {
      const int cd = coarse.node_dof(cnode);
      if (cd >= 0 && value != 0.0) t.push_back({static_cast<int>(fd), cd, value});
    }
  }
  return SparseMatrix(static_cast<int>(fine.num_dofs()), static_cast<int>(coarse.num_dofs()), std::move(t));
}

Vector nodal_interpolate(const ScalarField& g, const P1Space& space) {
  Vector u(space.num_dofs());
  for (std::size_t d = 0; d < u.size(); ++d) {
    const Vec2 x = space.node_coords(space.dof_node(static_cast<int>(d)));
    u[d] = g(x[0], x[1]);
  }
  return u;
}

Vector nodal_interpolate_all(const ScalarField& g, const P1Space& space) {
  Vector u(space.num_nodes());
  for (std::size_t k = 0; k < u.size(); ++k) {
    const Vec2 x = space.node_coords(static_cast<int>(k));
    u[k] = g(x[0], x[1]);
  }
  return u;
}

}  // namespace aasm
