#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "aasm/mesh.hpp"
#include "aasm/sparse_matrix.hpp"

namespace aasm {

enum class Level { one, two };

Level parse_level(std::string_view name);
std::string_view to_string(Level level);

/// Half-open range of fine cells [x0, x1) x [y0, y1).
struct CellRect {
  int x0, x1, y0, y1;
};

/// Local space V_k: the global DOFs strictly inside the overlapping
/// subdomain. Restriction gathers these entries, extension scatters back.
struct SubspaceMap {
  std::vector<int> dofs;
  int subdomain = 0;
  CellRect rect{};

  std::size_t size() const { return dofs.size(); }
};

struct CoarseSpace {
  P1Space space;
  /// Fine DOF x coarse DOF interpolation (R_0^*).
  SparseMatrix interpolation;
};

struct DecompositionPlan {
  std::vector<SubspaceMap> subspaces;  // row-major over the subdomain grid
  std::optional<CoarseSpace> coarse;
  double step_size = 0.25;
  Level level = Level::one;
  std::size_t global_dofs = 0;
};

/// Outer step size for the usual 4-colorable overlapping layouts.
double default_step_size(Level level);

DecompositionPlan build_decomposition(const MeshParams& params, const P1Space& space, Level level);
DecompositionPlan build_decomposition(const MeshParams& params, const RT0Space& space, Level level);

Vector restrict_to(std::span<const double> u, const SubspaceMap& map);
void restrict_to(std::span<const double> u, const SubspaceMap& map, std::span<double> out);
/// out[map.dofs[a]] += w[a]; other entries are left untouched.
void extend_add(std::span<const double> w, const SubspaceMap& map, std::span<double> out);

}  // namespace aasm
