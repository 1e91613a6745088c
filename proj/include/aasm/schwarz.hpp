#pragma once

#include <limits>
#include <memory>
#include <span>
#include <vector>

#include "aasm/decomposition.hpp"
#include "aasm/linalg.hpp"
#include "aasm/problems.hpp"
#include "aasm/proximal.hpp"

namespace aasm {

struct IterationRecord {
  int iter;
  double energy;
  double energy_error;  // NaN without a reference energy
  bool restarted;
  double wall_seconds;
};

using Trace = std::vector<IterationRecord>;

struct SolveOptions {
  int max_iterations = 100;
  /// E(u*); NaN leaves the error column undefined.
  double reference_energy = std::numeric_limits<double>::quiet_NaN();
  /// Stop once E(u) - E(u*) < energy_tolerance (needs a reference; <= 0 disables).
  double energy_tolerance = 0.0;
};

struct SolveResult {
  Trace trace;
  Vector solution;
};

/// Exact additive Schwarz preconditioner r -> sum_k R_k^* A_k^{-1} R_k r
/// (+ R_0^* A_0^{-1} R_0 r in the two-level case), with A_0 = R_0 A R_0^*.
class AdditiveSchwarzPreconditioner {
 public:
  AdditiveSchwarzPreconditioner(const SparseMatrix& a, const DecompositionPlan& plan);

  Vector apply(std::span<const double> r) const;

 private:
  const DecompositionPlan* plan_;
  std::vector<DenseCholesky> local_;
  DenseCholesky coarse_;
};

/// Coarse correction of the obstacle problem: cyclic coordinate descent on
/// w -> 1/2 |grad(base + R_0^* w)|^2 with every coordinate clamped to the
/// interval keeping all fine nodes in [I_h g_L, I_h g_U].
class ObstacleCoarseSolver {
 public:
  ObstacleCoarseSolver(const Problem& p, const CoarseSpace& coarse);

  struct Result {
    Vector w;
    int sweeps;
    bool converged;
  };
  Result solve(std::span<const double> base, const LocalSolverConfig& cfg) const;

 private:
  const Problem* problem_;
  const CoarseSpace* coarse_;
  SparseMatrix coarse_matrix_;
  SparseMatrix columns_;  // R_0 (rows: coarse DOFs, columns: fine DOFs)
  double H_;
};

Vector projected_gauss_seidel_coarse(const Problem& p, std::span<const double> base, const CoarseSpace& coarse,
                                     const LocalSolverConfig& cfg);

/// w0 -> E(base + R_0^* w0) for the smooth nonlinear problems.
class CoarseObjective final : public Objective {
 public:
  CoarseObjective(const Problem& p, const CoarseSpace& coarse);

  void set_base(std::span<const double> u);

  std::size_t dim() const override { return static_cast<std::size_t>(coarse_->interpolation.cols()); }
  double value(std::span<const double> w) const override;
  double value_and_gradient(std::span<const double> w, std::span<double> g) const override;
  double step_metric(std::span<const double> dw) const override { return H_ * H_ * norm_sq(dw); }

 private:
  void lift(std::span<const double> w) const;

  const Problem* problem_;
  const CoarseSpace* coarse_;
  double H_;
  Vector base_;
  mutable Vector fine_;
  mutable Vector fine_grad_;
};

struct SchwarzStats {
  long local_solves = 0;
  long local_iterations = 0;
  long capped_local_solves = 0;
  long coarse_solves = 0;
  long capped_coarse_solves = 0;
  int energy_increases = 0;
};

/// Additive Schwarz method (plain and accelerated) for one problem and one
/// decomposition. Local problems are set up once and reused.
class SchwarzSolver {
 public:
  SchwarzSolver(Problem problem, DecompositionPlan plan);
  SchwarzSolver(Problem problem, DecompositionPlan plan, LocalSolverConfig local, LocalSolverConfig coarse);
  SchwarzSolver(const SchwarzSolver&) = delete;
  SchwarzSolver& operator=(const SchwarzSolver&) = delete;

  const Problem& problem() const { return problem_; }
  const DecompositionPlan& plan() const { return plan_; }
  double step_size() const { return plan_.step_size; }
  void set_step_size(double tau);
  const SchwarzStats& stats() const { return stats_; }

  /// sum_k R_k^* w_k (+ R_0^* w_0), the local minimizing corrections at u.
  Vector correction(std::span<const double> u);
  /// u + tau * correction(u)
  Vector asm_iterate(std::span<const double> u);

  SolveResult asm_solve(Vector u0, const SolveOptions& options);
  /// Additive Schwarz step at the extrapolated point, gradient restart and
  /// Nesterov momentum.
  SolveResult accel_asm_solve(Vector u0, const SolveOptions& options);

 private:
  Problem problem_;
  DecompositionPlan plan_;
  LocalSolverConfig local_cfg_;
  LocalSolverConfig coarse_cfg_;
  std::vector<LocalProblem> locals_;
  std::unique_ptr<AdditiveSchwarzPreconditioner> linear_;
  std::unique_ptr<ObstacleCoarseSolver> obstacle_coarse_;
  std::unique_ptr<CoarseObjective> coarse_objective_;
  SchwarzStats stats_;
};

/// Conjugate gradients for the Poisson system preconditioned by the exact
/// additive Schwarz preconditioner. Stops on ||r|| <= tol ||f||.
SolveResult pcg_as(const Problem& p, const DecompositionPlan& plan, Vector u0, double tol, int max_iterations,
                   double reference_energy = std::numeric_limits<double>::quiet_NaN(),
                   double energy_tolerance = 0.0);

}  // namespace aasm
