#include "aasm/decomposition.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace aasm {

Level parse_level(std::string_view name) {
  if (name == "one" || name == "1") return Level::one;
  if (name == "two" || name == "2") return Level::two;
  throw std::invalid_argument("unknown decomposition level '" + std::string(name) + "'");
}

std::string_view to_string(Level level) { return level == Level::one ? "one" : "two"; }

double default_step_size(Level level) {
  switch (level) {
    case Level::one:
      return 0.25;
    case Level::two:
      return 0.2;
  }
  throw std::invalid_argument("default_step_size: unknown level");
}

namespace {

std::vector<CellRect> overlapping_rects(const MeshParams& p) {
  const int n = p.cells_per_side;
  const int N = p.coarse_cells_per_side;
  const int r = p.ratio();
  const int d = p.overlap_layers;
  std::vector<CellRect> rects;
  for (int J = 0; J < N; ++J)
    for (int I = 0; I < N; ++I)
      rects.push_back({std::max(0, I * r - d), std::min(n, (I + 1) * r + d), std::max(0, J * r - d),
                       std::min(n, (J + 1) * r + d)});
  return rects;
}

void check_spanning(const DecompositionPlan& plan) {
  std::vector<char> covered(plan.global_dofs, 0);
  for (const auto& m : plan.subspaces)
    for (int dof : m.dofs) {
      if (dof < 0 || static_cast<std::size_t>(dof) >= plan.global_dofs)
        throw std::logic_error("decomposition: DOF index out of range");
      covered[dof] = 1;
    }
  if (plan.coarse) {
    const auto& p = plan.coarse->interpolation;
    for (int i = 0; i < p.rows(); ++i)
      if (p.row_offsets()[i + 1] > p.row_offsets()[i]) covered[i] = 1;
  }
  if (std::find(covered.begin(), covered.end(), 0) != covered.end())
    throw std::logic_error("decomposition: subspaces do not span the global space");
}

}  // namespace

DecompositionPlan build_decomposition(const MeshParams& params, const P1Space& space, Level level) {
  params.validate();
  if (space.cells_per_side() != params.cells_per_side)
    throw std::invalid_argument("build_decomposition: space does not match mesh parameters");
  DecompositionPlan plan;
  plan.level = level;
  plan.step_size = default_step_size(level);
  plan.global_dofs = space.num_dofs();
  const auto rects = overlapping_rects(params);
  for (std::size_t k = 0; k < rects.size(); ++k) {
    const auto& r = rects[k];
    SubspaceMap m{{}, static_cast<int>(k), r};
    for (int j = r.y0 + 1; j < r.y1; ++j)
      for (int i = r.x0 + 1; i < r.x1; ++i) {
        const int dof = space.node_dof(space.node_index(i, j));
        if (dof >= 0) m.dofs.push_back(dof);
      }
    plan.subspaces.push_back(std::move(m));
  }
  if (level == Level::two) {
    P1Space coarse = build_p1_space(params, MeshLevel::coarse);
    SparseMatrix interp = coarse_interpolation(coarse, space);
    plan.coarse.emplace(CoarseSpace{std::move(coarse), std::move(interp)});
  }
  check_spanning(plan);
  return plan;
}

DecompositionPlan build_decomposition(const MeshParams& params, const RT0Space& space, Level level) {
  params.validate();
  if (level == Level::two)
    throw std::invalid_argument("build_decomposition: no two-level decomposition for the RT0 space");
  if (space.cells_per_side() != params.cells_per_side)
    throw std::invalid_argument("build_decomposition: space does not match mesh parameters");
  DecompositionPlan plan;
  plan.level = level;
  plan.step_size = default_step_size(level);
  plan.global_dofs = space.num_dofs();
  const auto rects = overlapping_rects(params);
  const auto edges = space.edges();
  for (std::size_t k = 0; k < rects.size(); ++k) {
    const auto& r = rects[k];
    SubspaceMap m{{}, static_cast<int>(k), r};
    // Vertical edges first, matching the global ordering.
    for (int j = r.y0; j < r.y1; ++j)
      for (int i = r.x0 + 1; i < r.x1; ++i) {
        const int dof = edges[space.vertical_edge(i, j)].dof;
        if (dof >= 0) m.dofs.push_back(dof);
      }
    for (int j = r.y0 + 1; j < r.y1; ++j)
      for (int i = r.x0; i < r.x1; ++i) {
        const int dof = edges[space.horizontal_edge(i, j)].dof;
        if (dof >= 0) m.dofs.push_back(dof);
      }
    plan.subspaces.push_back(std::move(m));
  }
  check_spanning(plan);
  return plan;
}

void restrict_to(std::span<const double> u, const SubspaceMap& map, std::span<double> out) {
  if (out.size() != map.size()) throw std::invalid_argument("restrict: output length mismatch");
  for (std::size_t a = 0; a < map.size(); ++a) {
    const int g = map.dofs[a];
    if (g < 0 || static_cast<std::size_t>(g) >= u.size()) throw std::out_of_range("restrict: index out of range");
    out[a] = u[g];
  }
}

Vector restrict_to(std::span<const double> u, const SubspaceMap& map) {
  Vector out(map.size());
  restrict_to(u, map, out);
  return out;
}

void extend_add(std::span<const double> w, const SubspaceMap& map, std::span<double> out) {
  if (w.size() != map.size()) throw std::invalid_argument("extend: local vector length mismatch");
  for (std::size_t a = 0; a < map.size(); ++a) {
    const int g = map.dofs[a];
    if (g < 0 || static_cast<std::size_t>(g) >= out.size()) throw std::out_of_range("extend: index out of range");
    out[g] += w[a];
  }
}

}  // namespace aasm
