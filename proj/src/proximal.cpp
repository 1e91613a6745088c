#include "aasm/proximal.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "aasm/linalg.hpp"

namespace aasm {

void LocalSolverConfig::validate() const {
  if (!(stop_tolerance > 0.0)) throw std::invalid_argument("LocalSolverConfig: tolerance must be positive");
  if (!(growth > 1.0)) throw std::invalid_argument("LocalSolverConfig: growth factor must exceed 1");
  if (max_iterations < 1) throw std::invalid_argument("LocalSolverConfig: need at least one iteration");
  if (!(initial_lipschitz > 0.0)) throw std::invalid_argument("LocalSolverConfig: L0 must be positive");
  if (!backtracking && !(fixed_step > 0.0)) throw std::invalid_argument("LocalSolverConfig: step must be positive");
}

MomentumUpdate momentum_update(double t) {
  if (!(t >= 1.0)) throw std::invalid_argument("momentum_update: t must be >= 1");
  const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
  return {t_next, (t - 1.0) / t_next};
}

bool restart_test(std::span<const double> v, std::span<const double> u_new, std::span<const double> u_old) {
  if (v.size() != u_new.size() || u_old.size() != u_new.size())
    throw std::invalid_argument("restart_test: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += (v[i] - u_new[i]) * (u_new[i] - u_old[i]);
  return s > 0.0;
}

Vector fb_step(const Objective& obj, std::span<const double> v, std::span<const double> grad_v, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("fb_step: step must be positive");
  Vector u(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) u[i] = v[i] - step * grad_v[i];
  obj.project(u);
  return u;
}

Vector fb_step(const Objective& obj, std::span<const double> v, double step) {
  Vector g(v.size());
  obj.value_and_gradient(v, g);
  return fb_step(obj, v, g, step);
}

BacktrackResult backtrack_step(const Objective& obj, std::span<const double> v, double f_v,
                               std::span<const double> grad_v, double lipschitz, double eta) {
  if (!(lipschitz > 0.0) || !(eta > 1.0)) throw std::invalid_argument("backtrack_step: need L > 0 and eta > 1");
  constexpr double kMaxLipschitz = 1e16;
  // relative roundoff allowance
  constexpr double kSlack = 1e-12;
  double L = lipschitz;
  for (int trial = 1;; ++trial) {
    Vector u = fb_step(obj, v, grad_v, 1.0 / L);
    const double f_u = obj.value(u);
    double lin = 0.0;
    double dist = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double d = u[i] - v[i];
      lin += grad_v[i] * d;
      dist += d * d;
    }
    const double bound = f_v + lin + 0.5 * L * dist;
    if (f_u <= bound + kSlack * (std::abs(f_v) + std::abs(f_u))) return {std::move(u), L, f_u, trial};
    L *= eta;
    if (L > kMaxLipschitz || !std::isfinite(f_u))
      throw SolverError("backtracking diverged: Lipschitz estimate exceeded 1e16");
  }
}

BacktrackResult backtrack_step(const Objective& obj, std::span<const double> v, double lipschitz, double eta) {
  Vector g(v.size());
  const double f_v = obj.value_and_gradient(v, g);
  return backtrack_step(obj, v, f_v, g, lipschitz, eta);
}

bool stop_local(double h, std::span<const double> w_new, std::span<const double> w_old) {
  if (w_new.size() != w_old.size()) throw std::invalid_argument("stop_local: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < w_new.size(); ++i) s += (w_new[i] - w_old[i]) * (w_new[i] - w_old[i]);
  return h * h * s < kStopTolerance;
}

ProximalResult proximal_gradient(const Objective& obj, Vector x0, Acceleration acceleration,
                                 const LocalSolverConfig& cfg, const StopRule& stop,
                                 const IterationObserver& observer) {
  cfg.validate();
  const std::size_t n = obj.dim();
  if (x0.size() != n) throw std::invalid_argument("proximal_gradient: initial point has wrong length");

  ProximalResult res;
  res.lipschitz = cfg.backtracking ? cfg.initial_lipschitz : 1.0 / cfg.fixed_step;
  Vector u = std::move(x0);
  Vector v = u;
  Vector grad(n);
  Vector diff(n);
  double t = 1.0;

  for (int it = 0; it < stop.max_iterations; ++it) {
    const double f_v = obj.value_and_gradient(v, grad);
    if (!std::isfinite(f_v)) throw SolverError("proximal_gradient: non-finite energy");
    Vector u_new;
    if (cfg.backtracking) {
      auto bt = backtrack_step(obj, v, f_v, grad, res.lipschitz, cfg.growth);
      u_new = std::move(bt.u);
      res.lipschitz = bt.lipschitz;
    } else {
      u_new = fb_step(obj, v, grad, cfg.fixed_step);
    }

    double beta = 0.0;
    bool restarted = false;
    if (acceleration == Acceleration::adaptive_restart && restart_test(v, u_new, u)) {
      t = 1.0;
      restarted = true;
      ++res.restarts;
    } else if (acceleration != Acceleration::none) {
      const auto m = momentum_update(t);
      t = m.t_next;
      beta = m.beta;
    }

    for (std::size_t i = 0; i < n; ++i) {
      diff[i] = u_new[i] - u[i];
      v[i] = u_new[i] + beta * diff[i];
    }
    u.swap(u_new);
    res.iterations = it + 1;
    if (observer && !observer({it + 1, u, restarted, res.lipschitz})) break;
    if (stop.step_tolerance > 0.0 && obj.step_metric(diff) < stop.step_tolerance) {
      res.converged = true;
      break;
    }
  }
  res.x = std::move(u);
  return res;
}

}  // namespace aasm
