#include "aasm/schwarz.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

namespace aasm {

namespace {

class TraceRecorder {
 public:
  TraceRecorder(const Problem& p, const SolveOptions& opt)
      : problem_(p), options_(opt), start_(std::chrono::steady_clock::now()) {}

  /// Appends a record; returns true when the energy-error stop fires.
  bool record(int iter, std::span<const double> u, bool restarted) {
    const double e = energy_value(problem_, u).value;
    if (!std::isfinite(e))
      throw SolverError("iterate " + std::to_string(iter) + " has non-finite energy (left the feasible set?)");
    const double err = e - options_.reference_energy;
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    trace_.push_back({iter, e, err, restarted, secs});
    return options_.energy_tolerance > 0.0 && !std::isnan(err) && err < options_.energy_tolerance;
  }

  Trace take() { return std::move(trace_); }
  const Trace& trace() const { return trace_; }

 private:
  const Problem& problem_;
  const SolveOptions& options_;
  std::chrono::steady_clock::time_point start_;
  Trace trace_;
};

}  // namespace

// ---------------------------------------------------------------------------

AdditiveSchwarzPreconditioner::AdditiveSchwarzPreconditioner(const SparseMatrix& a, const DecompositionPlan& plan)
    : plan_(&plan) {
  if (static_cast<std::size_t>(a.rows()) != plan.global_dofs)
    throw std::invalid_argument("AdditiveSchwarzPreconditioner: matrix does not match the decomposition");
  local_.reserve(plan.subspaces.size());
  for (const auto& m : plan.subspaces) local_.emplace_back(a.principal_submatrix(m.dofs));
  if (plan.coarse) coarse_ = DenseCholesky(galerkin_product(a, plan.coarse->interpolation));
}

Vector AdditiveSchwarzPreconditioner::apply(std::span<const double> r) const {
  Vector z(r.size(), 0.0);
  Vector rk;
  for (std::size_t k = 0; k < plan_->subspaces.size(); ++k) {
    const auto& m = plan_->subspaces[k];
    rk.resize(m.size());
    restrict_to(r, m, rk);
    local_[k].solve_in_place(rk);
    extend_add(rk, m, z);
  }
  if (plan_->coarse) {
    const auto& p = plan_->coarse->interpolation;
    Vector r0 = p.multiply_transpose(r);
    coarse_.solve_in_place(r0);
    const Vector z0 = p.multiply(r0);
    axpy(1.0, z0, z);
  }
  return z;
}

// ---------------------------------------------------------------------------

ObstacleCoarseSolver::ObstacleCoarseSolver(const Problem& p, const CoarseSpace& coarse)
    : problem_(&p),
      coarse_(&coarse),
      coarse_matrix_(galerkin_product(p.stiffness(), coarse.interpolation)),
      columns_(coarse.interpolation.transpose()),
      H_(coarse.space.h()) {
  if (!p.has_bounds() || !p.is_p1()) throw std::invalid_argument("ObstacleCoarseSolver: needs a constrained P1 problem");
}

ObstacleCoarseSolver::Result ObstacleCoarseSolver::solve(std::span<const double> base,
                                                         const LocalSolverConfig& cfg) const {
  const auto& a = problem_->stiffness();
  const auto lower = problem_->lower();
  const auto upper = problem_->upper();
  const int nc = coarse_matrix_.rows();
  const Vector b = coarse_->interpolation.multiply_transpose(a.multiply(base));
  Vector z(base.begin(), base.end());
  Vector w(static_cast<std::size_t>(nc), 0.0);

  const auto a_off = coarse_matrix_.row_offsets();
  const auto a_col = coarse_matrix_.col_indices();
  const auto a_val = coarse_matrix_.values();
  const auto c_off = columns_.row_offsets();
  const auto c_col = columns_.col_indices();
  const auto c_val = columns_.values();

  Result res{{}, 0, false};
  for (int sweep = 1; sweep <= cfg.max_iterations; ++sweep) {
    double change = 0.0;
    for (int j = 0; j < nc; ++j) {
      double g = b[j];
      double diag = 0.0;
      for (int k = a_off[j]; k < a_off[j + 1]; ++k) {
        g += a_val[k] * w[a_col[k]];
        if (a_col[k] == j) diag = a_val[k];
      }
      const double candidate = w[j] - g / diag;
      double lo = -std::numeric_limits<double>::infinity();
      double hi = std::numeric_limits<double>::infinity();
      for (int k = c_off[j]; k < c_off[j + 1]; ++k) {
        const double phi = c_val[k];
        if (phi <= 0.0) continue;
        const int x = c_col[k];
        const double rest = z[x] - w[j] * phi;
        lo = std::max(lo, (lower[x] - rest) / phi);
        hi = std::min(hi, (upper[x] - rest) / phi);
      }
      if (lo > hi) {
        if (lo - hi > 1e-9) throw SolverError("coarse obstacle solve: empty feasible interval");
        continue;
      }
      const double updated = std::clamp(candidate, lo, hi);
      const double delta = updated - w[j];
      if (delta == 0.0) continue;
      w[j] = updated;
      for (int k = c_off[j]; k < c_off[j + 1]; ++k) z[c_col[k]] += delta * c_val[k];
      change += delta * delta;
    }
    res.sweeps = sweep;
    if (H_ * H_ * change < cfg.stop_tolerance) {
      res.converged = true;
      break;
    }
  }
  res.w = std::move(w);
  return res;
}

Vector projected_gauss_seidel_coarse(const Problem& p, std::span<const double> base, const CoarseSpace& coarse,
                                     const LocalSolverConfig& cfg) {
  return ObstacleCoarseSolver(p, coarse).solve(base, cfg).w;
}

// ---------------------------------------------------------------------------

CoarseObjective::CoarseObjective(const Problem& p, const CoarseSpace& coarse)
    : problem_(&p),
      coarse_(&coarse),
      H_(coarse.space.h()),
      base_(p.num_dofs(), 0.0),
      fine_(p.num_dofs()),
      fine_grad_(p.num_dofs()) {}

void CoarseObjective::set_base(std::span<const double> u) { std::copy(u.begin(), u.end(), base_.begin()); }

void CoarseObjective::lift(std::span<const double> w) const {
  coarse_->interpolation.multiply(w, fine_);
  axpy(1.0, base_, fine_);
}

double CoarseObjective::value(std::span<const double> w) const {
  lift(w);
  return problem_->model().value(fine_);
}

double CoarseObjective::value_and_gradient(std::span<const double> w, std::span<double> g) const {
  lift(w);
  const double e = problem_->model().value_and_gradient(fine_, fine_grad_);
  coarse_->interpolation.multiply_transpose(fine_grad_, g);
  return e;
}

// ---------------------------------------------------------------------------

namespace {

LocalSolverConfig coarse_default(const Problem& p) {
  LocalSolverConfig cfg = default_local_config(p);
  cfg.max_iterations = 1000;
  return cfg;
}

}  // namespace

SchwarzSolver::SchwarzSolver(Problem problem, DecompositionPlan plan)
    : SchwarzSolver(problem, std::move(plan), default_local_config(problem), coarse_default(problem)) {}

SchwarzSolver::SchwarzSolver(Problem problem, DecompositionPlan plan, LocalSolverConfig local,
                             LocalSolverConfig coarse)
    : problem_(std::move(problem)), plan_(std::move(plan)), local_cfg_(local), coarse_cfg_(coarse) {
  local_cfg_.validate();
  coarse_cfg_.validate();
  if (plan_.global_dofs != problem_.num_dofs())
    throw std::invalid_argument("SchwarzSolver: decomposition does not match the problem space");
  if (problem_.is_linear()) {
    linear_ = std::make_unique<AdditiveSchwarzPreconditioner>(problem_.stiffness(), plan_);
    return;
  }
  locals_.reserve(plan_.subspaces.size());
  for (const auto& m : plan_.subspaces) locals_.emplace_back(problem_, m.dofs);
  if (plan_.coarse) {
    if (problem_.has_bounds())
      obstacle_coarse_ = std::make_unique<ObstacleCoarseSolver>(problem_, *plan_.coarse);
    else
      coarse_objective_ = std::make_unique<CoarseObjective>(problem_, *plan_.coarse);
  }
}

void SchwarzSolver::set_step_size(double tau) {
  if (!(tau >= 0.0)) throw std::invalid_argument("step size must be nonnegative");
  plan_.step_size = tau;
}

Vector SchwarzSolver::correction(std::span<const double> u) {
  if (u.size() != problem_.num_dofs()) throw std::invalid_argument("correction: vector does not match the problem");
  if (linear_) {
    Vector r = problem_.stiffness().multiply(u);
    const auto f = problem_.load();
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = f[i] - r[i];
    return linear_->apply(r);
  }
  Vector c(u.size(), 0.0);
  for (std::size_t k = 0; k < locals_.size(); ++k) {
    LocalSolution sol;
    try {
      sol = solve_local(locals_[k], u, local_cfg_);
    } catch (const SolverError& e) {
      throw SolverError("subdomain " + std::to_string(k) + ": " + e.what());
    }
    ++stats_.local_solves;
    stats_.local_iterations += sol.iterations;
    if (!sol.converged) ++stats_.capped_local_solves;
    extend_add(sol.w, plan_.subspaces[k], c);
  }
  if (plan_.coarse) {
    const auto& interp = plan_.coarse->interpolation;
    Vector w0;
    bool converged = true;
    if (obstacle_coarse_) {
      auto res = obstacle_coarse_->solve(u, coarse_cfg_);
      w0 = std::move(res.w);
      converged = res.converged;
    } else {
      coarse_objective_->set_base(u);
      Vector zero(coarse_objective_->dim(), 0.0);
      const double e0 = coarse_objective_->value(zero);
      auto res = fista_restart(*coarse_objective_, zero, coarse_cfg_,
                               StopRule{coarse_cfg_.max_iterations, coarse_cfg_.stop_tolerance});
      converged = res.converged;
      w0 = coarse_objective_->value(res.x) <= e0 ? std::move(res.x) : std::move(zero);
    }
    ++stats_.coarse_solves;
    if (!converged) ++stats_.capped_coarse_solves;
    const Vector lifted = interp.multiply(w0);
    axpy(1.0, lifted, c);
  }
  return c;
}

Vector SchwarzSolver::asm_iterate(std::span<const double> u) {
  Vector next(u.begin(), u.end());
  if (plan_.step_size == 0.0) return next;
  const Vector c = correction(u);
  axpy(plan_.step_size, c, next);
  return next;
}

SolveResult SchwarzSolver::asm_solve(Vector u0, const SolveOptions& options) {
  if (!is_feasible(problem_, u0)) throw std::invalid_argument("asm_solve: initial guess is infeasible");
  TraceRecorder rec(problem_, options);
  Vector u = std::move(u0);
  bool done = rec.record(0, u, false);
  for (int n = 0; n < options.max_iterations && !done; ++n) {
    u = asm_iterate(u);
    const double before = rec.trace().back().energy;
    done = rec.record(n + 1, u, false);
    if (rec.trace().back().energy > before + 1e-14 * std::abs(before)) ++stats_.energy_increases;
  }
  return {rec.take(), std::move(u)};
}

SolveResult SchwarzSolver::accel_asm_solve(Vector u0, const SolveOptions& options) {
  if (!is_feasible(problem_, u0)) throw std::invalid_argument("accel_asm_solve: initial guess is infeasible");
  TraceRecorder rec(problem_, options);
  const std::size_t n_dofs = u0.size();
  Vector u = std::move(u0);
  Vector v = u;
  double t = 1.0;
  bool done = rec.record(0, u, false);
  for (int n = 0; n < options.max_iterations && !done; ++n) {
    Vector u_new = asm_iterate(v);
    const bool restarted = restart_test(v, u_new, u);
    double beta = 0.0;
    if (restarted) {
      t = 1.0;
    } else {
      const auto m = momentum_update(t);
      t = m.t_next;
      beta = m.beta;
    }
    for (std::size_t i = 0; i < n_dofs; ++i) v[i] = u_new[i] + beta * (u_new[i] - u[i]);
    project_onto_domain(problem_, v);
    u = std::move(u_new);
    done = rec.record(n + 1, u, restarted);
  }
  return {rec.take(), std::move(u)};
}

// ---------------------------------------------------------------------------

SolveResult pcg_as(const Problem& p, const DecompositionPlan& plan, Vector u0, double tol, int max_iterations,
                   double reference_energy, double energy_tolerance) {
  if (!p.is_linear()) throw std::invalid_argument("pcg_as: requires the linear (s = 2, unconstrained) problem");
  const auto& a = p.stiffness();
  const auto f = p.load();
  const AdditiveSchwarzPreconditioner m(a, plan);
  SolveOptions opt;
  opt.reference_energy = reference_energy;
  opt.energy_tolerance = energy_tolerance;
  TraceRecorder rec(p, opt);

  const std::size_t n = u0.size();
  Vector u = std::move(u0);
  Vector r = a.multiply(u);
  for (std::size_t i = 0; i < n; ++i) r[i] = f[i] - r[i];
  const double fnorm = std::sqrt(norm_sq(f));
  if (rec.record(0, u, false) || std::sqrt(norm_sq(r)) <= tol * fnorm) return {rec.take(), std::move(u)};

  Vector z = m.apply(r);
  Vector d = z;
  Vector ad(n);
  double rz = dot(r, z);
  for (int it = 1; it <= max_iterations; ++it) {
    a.multiply(d, ad);
    const double dad = dot(d, ad);
    if (!(dad > 0.0)) throw SolverError("pcg_as: non-positive curvature, operator is not SPD");
    const double alpha = rz / dad;
    axpy(alpha, d, u);
    axpy(-alpha, ad, r);
    if (rec.record(it, u, false)) break;
    if (std::sqrt(norm_sq(r)) <= tol * fnorm) break;
    z = m.apply(r);
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) d[i] = z[i] + beta * d[i];
  }
  return {rec.take(), std::move(u)};
}

}  // namespace aasm
