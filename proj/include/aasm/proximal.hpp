#pragma once

#include <functional>
#include <span>

#include "aasm/objective.hpp"
#include "aasm/sparse_matrix.hpp"

namespace aasm {

/// Threshold of the successive-iterate stopping rule,
/// scale^2 * ||w_new - w_old||^2 < kStopTolerance.
inline constexpr double kStopTolerance = 1e-20;

struct LocalSolverConfig {
  int max_iterations = 500;
  double stop_tolerance = kStopTolerance;
  bool backtracking = true;
  double growth = 2.0;              // eta
  double initial_lipschitz = 1.0;   // L0
  double fixed_step = 1.0 / 8.0;    // used when backtracking is off

  void validate() const;
};

enum class Acceleration {
  none,              // forward-backward splitting
  momentum,          // FISTA
  adaptive_restart,  // FISTA with gradient restart
};

struct StopRule {
  int max_iterations = 500;
  /// Stop once step_metric(u_new - u_old) drops below this; <= 0 disables.
  double step_tolerance = kStopTolerance;
};

struct MomentumUpdate {
  double t_next;
  double beta;
};

/// t_next = (1 + sqrt(1 + 4 t^2)) / 2, beta = (t - 1) / t_next.
MomentumUpdate momentum_update(double t);

/// Gradient restart condition <v - u_new, u_new - u_old> > 0.
bool restart_test(std::span<const double> v, std::span<const double> u_new, std::span<const double> u_old);

/// prox_G(v - step * grad F(v)).
Vector fb_step(const Objective& obj, std::span<const double> v, double step);
Vector fb_step(const Objective& obj, std::span<const double> v, std::span<const double> grad_v, double step);

struct BacktrackResult {
  Vector u;
  double lipschitz;
  double value;  // F(u)
  int trials;
};

/// Smallest L = L_in * eta^j passing the sufficient-decrease test
///   F(u_L) <= F(v) + <grad F(v), u_L - v> + L/2 ||u_L - v||^2.
/// Throws SolverError once L exceeds 1e16.
BacktrackResult backtrack_step(const Objective& obj, std::span<const double> v, double f_v,
                               std::span<const double> grad_v, double lipschitz, double eta);
BacktrackResult backtrack_step(const Objective& obj, std::span<const double> v, double lipschitz, double eta);

/// h^2 ||w_new - w_old||^2 < 1e-20
bool stop_local(double h, std::span<const double> w_new, std::span<const double> w_old);

struct IterationView {
  int iteration;  // index of the iterate u just produced (1-based)
  std::span<const double> u;
  bool restarted;
  double lipschitz;
};

/// Called after every iteration; returning false stops the solver.
using IterationObserver = std::function<bool(const IterationView&)>;

struct ProximalResult {
  Vector x;
  int iterations = 0;
  int restarts = 0;
  double lipschitz = 0.0;
  bool converged = false;
};

/// Forward-backward / FISTA / FISTA with adaptive restart from a feasible x0.
ProximalResult proximal_gradient(const Objective& obj, Vector x0, Acceleration acceleration,
                                 const LocalSolverConfig& cfg, const StopRule& stop,
                                 const IterationObserver& observer = {});

inline ProximalResult fista_restart(const Objective& obj, Vector x0, const LocalSolverConfig& cfg,
                                    const StopRule& stop, const IterationObserver& observer = {}) {
  return proximal_gradient(obj, std::move(x0), Acceleration::adaptive_restart, cfg, stop, observer);
}

}  // namespace aasm
