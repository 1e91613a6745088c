#pragma once

#include <array>
#include <limits>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "aasm/decomposition.hpp"
#include "aasm/mesh.hpp"
#include "aasm/objective.hpp"
#include "aasm/proximal.hpp"
#include "aasm/sparse_matrix.hpp"

namespace aasm {

/// Tolerance of the box-constraint feasibility checks.
inline constexpr double kFeasibilityTolerance = 1e-12;

enum class ProblemKind { s_laplacian, obstacle, dual_tv };

ProblemKind parse_problem_kind(std::string_view name);
std::string_view to_string(ProblemKind kind);

/// P1 triangle contributing (area / s) |grad z|^s.
struct PowerElement {
  std::array<int, 3> slot;
  std::array<Vec2, 3> grad;
  double area;
};

/// RT0 cell contributing 1/2 (sum_a sign_a z_a + offset)^2, i.e.
/// h^2/2 (div z + f)^2 with offset = h f.
struct DivergenceElement {
  std::array<int, 4> slot;
  std::array<double, 4> sign;
  double offset;
};

/// Element-wise smooth energy over a vector of free values x plus a set of
/// frozen values. Slot s < num_free() refers to x[s]; larger slots refer to
/// frozen values, slot num_free() being the homogeneous boundary (always 0).
/// Includes the linear term -<load, x>.
class EnergyModel {
 public:
  static EnergyModel power(double s, double h, std::size_t num_free, std::vector<PowerElement> elements,
                           Vector load);
  static EnergyModel divergence(std::size_t num_free, std::vector<DivergenceElement> elements);

  std::size_t num_free() const { return num_free_; }
  std::size_t num_frozen() const { return frozen_.size() - 1; }
  std::size_t num_elements() const { return is_power() ? power_.size() : divergence_.size(); }
  bool is_power() const { return kind_ == Kind::power; }
  std::span<const double> load() const { return load_; }

  void set_frozen(std::span<const double> values);

  double value(std::span<const double> x) const;
  double value_and_gradient(std::span<const double> x, std::span<double> grad) const;
  /// h^2 ||dx||^2 for P1, h^2 ||div dx||^2 for RT0.
  double step_metric(std::span<const double> dx) const;

  /// Restriction to the elements touching `free_dofs`; all other DOFs those
  /// elements reference become frozen, their global indices listed in
  /// `frozen_dofs` in slot order.
  EnergyModel patch(std::span<const int> free_dofs, std::vector<int>& frozen_dofs) const;

 private:
  enum class Kind { power, divergence };
  EnergyModel() = default;

  Kind kind_ = Kind::power;
  double s_ = 2.0;
  double metric_scale_ = 1.0;
  std::size_t num_free_ = 0;
  std::vector<PowerElement> power_;
  std::vector<DivergenceElement> divergence_;
  Vector load_;
  Vector frozen_{0.0};
};

/// Energy E = F + G of one of the supported model problems.
class Problem {
 public:
  /// (1/s) int |grad u|^s - int f u over P1, G = 0. Poisson is s = 2.
  static Problem s_laplacian(const MeshParams& mesh, double s, const ScalarField& f);
  static Problem poisson(const MeshParams& mesh, const ScalarField& f) { return s_laplacian(mesh, 2.0, f); }
  /// 1/2 int |grad u|^2 subject to I_h lower <= u <= I_h upper.
  static Problem obstacle(const MeshParams& mesh, const ScalarField& lower, const ScalarField& upper);
  /// 1/2 int (div u + f)^2 over RT0 subject to |u . n_e| <= 1 on every edge.
  static Problem dual_tv(const MeshParams& mesh, const ScalarField& f);

  ProblemKind kind() const { return kind_; }
  double s() const { return s_; }
  const MeshParams& mesh() const { return mesh_; }
  double h() const { return mesh_.h(); }
  std::size_t num_dofs() const { return model_.num_free(); }

  bool is_p1() const { return p1_ != nullptr; }
  const P1Space& p1_space() const;
  const RT0Space& rt0_space() const;

  bool has_bounds() const { return !lower_.empty(); }
  std::span<const double> lower() const { return lower_; }
  std::span<const double> upper() const { return upper_; }
  std::span<const double> load() const { return model_.load(); }
  const EnergyModel& model() const { return model_; }

  /// Quadratic energy without constraints (Poisson).
  bool is_linear() const { return is_p1() && s_ == 2.0 && !has_bounds(); }
  /// Dirichlet stiffness matrix; P1 problems only.
  const SparseMatrix& stiffness() const;

 private:
  Problem() = default;

  ProblemKind kind_ = ProblemKind::s_laplacian;
  double s_ = 2.0;
  MeshParams mesh_;
  std::shared_ptr<const P1Space> p1_;
  std::shared_ptr<const RT0Space> rt0_;
  std::shared_ptr<const SparseMatrix> stiffness_;
  EnergyModel model_ = EnergyModel::divergence(0, {});
  Vector lower_;
  Vector upper_;
};

/// Fields used by the benchmark problems.
double unit_source(double x, double y);
/// 1 on the disk of radius 1/16 about (1/2, 1/2), else 0.
double centered_disk_floor(double x, double y);
/// 0 on the disk of radius 1/16 about (1/4, 1/4), else 1.
double corner_disk_ceiling(double x, double y);
/// 1 on the disk of radius 1/4 about (1/2, 1/2), else 0.
double centered_disk_source(double x, double y);

/// Energy value; +inf marks an infeasible argument.
struct EnergyValue {
  double value;

  bool infeasible() const { return value == std::numeric_limits<double>::infinity(); }
};

EnergyValue energy_value(const Problem& p, std::span<const double> u);
bool is_feasible(const Problem& p, std::span<const double> u);
Vector grad_F(const Problem& p, std::span<const double> u);
Vector prox_G(const Problem& p, std::span<const double> u);
void project_onto_domain(const Problem& p, std::span<double> u);

/// Initial guess of the benchmark runs: zero, or I_h g_L for the obstacle.
Vector initial_guess(const Problem& p);

/// Local solver settings per problem: backtracking for P1, the fixed step
/// 1/8 for the dual TV problem.
LocalSolverConfig default_local_config(const Problem& p);

/// The full problem as an Objective.
class GlobalObjective final : public Objective {
 public:
  explicit GlobalObjective(const Problem& p) : p_(p) {}
  std::size_t dim() const override { return p_.num_dofs(); }
  double value(std::span<const double> x) const override { return p_.model().value(x); }
  double value_and_gradient(std::span<const double> x, std::span<double> g) const override {
    return p_.model().value_and_gradient(x, g);
  }
  void project(std::span<double> x) const override { project_onto_domain(p_, x); }
  double step_metric(std::span<const double> dx) const override { return p_.model().step_metric(dx); }

 private:
  const Problem& p_;
};

/// w -> E(base + R_k^* w) up to a constant, parametrized by the local values
/// y = R_k base + w. Only the elements touching the subspace are evaluated.
class LocalProblem final : public Objective {
 public:
  LocalProblem(const Problem& p, std::span<const int> dofs);

  void set_base(std::span<const double> u);
  std::span<const double> base() const { return base_; }
  std::span<const int> dofs() const { return dofs_; }

  std::size_t dim() const override { return dofs_.size(); }
  double value(std::span<const double> y) const override { return model_.value(y); }
  double value_and_gradient(std::span<const double> y, std::span<double> g) const override {
    return model_.value_and_gradient(y, g);
  }
  void project(std::span<double> y) const override;
  double step_metric(std::span<const double> dy) const override { return model_.step_metric(dy); }

 private:
  std::vector<int> dofs_;
  std::vector<int> frozen_dofs_;
  EnergyModel model_;
  Vector lower_;
  Vector upper_;
  Vector base_;
  Vector frozen_values_;
};

struct LocalSolution {
  Vector w;
  int iterations = 0;
  bool converged = true;
};

/// Approximate argmin_w E(base + R^* w) from w = 0 by FISTA with adaptive
/// restart; never returns a w that increases the energy.
LocalSolution solve_local(LocalProblem& local, std::span<const double> base, const LocalSolverConfig& cfg);

/// Local correction on `map`. Linear problems are solved exactly (CG with
/// relative residual 1e-12).
Vector local_energy_min(const Problem& p, std::span<const double> base, const SubspaceMap& map,
                        const LocalSolverConfig& cfg);

}  // namespace aasm
