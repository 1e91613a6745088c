#include <doctest.h>

#include <cmath>

#include "aasm/linalg.hpp"
#include "aasm/proximal.hpp"
#include "support.hpp"

using namespace aasm;

namespace {

// F(x) = 1/2 x^T D x - b^T x with D diagonal, optionally restricted to a box.
class DiagonalQuadratic final : public Objective {
 public:
  DiagonalQuadratic(Vector d, Vector b, double lo = -INFINITY, double hi = INFINITY)
      : d_(std::move(d)), b_(std::move(b)), lo_(lo), hi_(hi) {}
  std::size_t dim() const override { return d_.size(); }
  double value(std::span<const double> x) const override {
    double f = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) f += 0.5 * d_[i] * x[i] * x[i] - b_[i] * x[i];
    return f;
  }
  double value_and_gradient(std::span<const double> x, std::span<double> g) const override {
    for (std::size_t i = 0; i < x.size(); ++i) g[i] = d_[i] * x[i] - b_[i];
    return value(x);
  }
  void project(std::span<double> x) const override {
    for (auto& v : x) v = std::clamp(v, lo_, hi_);
  }

 private:
  Vector d_, b_;
  double lo_, hi_;
};

}  // namespace

TEST_CASE("momentum recursion") {
  const auto m1 = momentum_update(1.0);
  CHECK(m1.t_next == doctest::Approx((1.0 + std::sqrt(5.0)) / 2.0).epsilon(1e-15));
  CHECK(m1.beta == 0.0);
  const auto m2 = momentum_update(1.618034);
  CHECK(m2.t_next == doctest::Approx(2.1935271).epsilon(1e-7));
  CHECK(m2.beta == doctest::Approx(0.2817535).epsilon(1e-6));
  double t = 1.0;
  for (int k = 0; k < 50; ++k) {
    const auto m = momentum_update(t);
    CHECK(m.t_next * m.t_next - m.t_next == doctest::Approx(t * t));
    CHECK(m.beta >= 0.0);
    CHECK(m.beta < 1.0);
    t = m.t_next;
  }
  CHECK_THROWS_AS(momentum_update(0.5), std::invalid_argument);
}

TEST_CASE("restart test truth table") {
  const Vector u_old{0.0, 0.0}, u_new{1.0, 0.0};
  CHECK(restart_test(Vector{0.5, 0.0}, u_new, u_old) == false);  // step kept the direction of motion
  CHECK(restart_test(Vector{2.0, 0.0}, u_new, u_old) == true);   // extrapolation overshot
  CHECK(restart_test(Vector{1.0, 3.0}, u_new, u_old) == false);  // orthogonal
  CHECK(restart_test(Vector{1.0, 0.0}, u_new, u_old) == false);  // v = u_new
}

TEST_CASE("backtracking on F = 2u^2 from v = 1") {
  const DiagonalQuadratic f({4.0}, {0.0});
  const auto r = backtrack_step(f, Vector{1.0}, 1.0, 2.0);
  CHECK(r.lipschitz == 4.0);
  CHECK(r.trials == 3);
  CHECK(r.u[0] == doctest::Approx(0.0));
  CHECK(r.value == doctest::Approx(0.0));
  // L never decreases
  CHECK(backtrack_step(f, Vector{1.0}, 16.0, 2.0).lipschitz == 16.0);
  CHECK_THROWS_AS(backtrack_step(f, Vector{1.0}, 0.0, 2.0), std::invalid_argument);
}

TEST_CASE("backtracking gives up on an unbounded curvature") {
  class Steep final : public Objective {
   public:
    std::size_t dim() const override { return 1; }
    double value(std::span<const double> x) const override { return x[0] == 1.0 ? 0.0 : 1e300; }
    double value_and_gradient(std::span<const double> x, std::span<double> g) const override {
      g[0] = 1.0;
      return value(x);
    }
  } steep;
  CHECK_THROWS_AS(backtrack_step(steep, Vector{1.0}, 1.0, 2.0), SolverError);
}

TEST_CASE("forward-backward step clamps to the box") {
  const DiagonalQuadratic f({1.0, 1.0}, {5.0, -5.0}, -1.0, 1.0);
  const auto u = fb_step(f, Vector{0.0, 0.0}, 1.0);
  CHECK(u == Vector{1.0, -1.0});
}

TEST_CASE("local stop rule") {
  CHECK(stop_local(0.5, Vector{1e-10}, Vector{0.0}));
  CHECK_FALSE(stop_local(0.5, Vector{1e-9}, Vector{0.0}));
}

TEST_CASE("all three proximal schemes reach the box-constrained minimizer") {
  const Vector d = {1.0, 10.0, 100.0, 0.5}, b = {2.0, -3.0, 50.0, 0.1};
  const DiagonalQuadratic f(d, b, -0.4, 0.4);
  const Vector expected = {0.4, -0.3, 0.4, 0.2};
  LocalSolverConfig cfg;
  for (auto acc : {Acceleration::none, Acceleration::momentum, Acceleration::adaptive_restart}) {
    const auto r = proximal_gradient(f, Vector(4, 0.0), acc, cfg, StopRule{100000, 1e-26});
    CHECK(r.converged);
    CHECK(testing::max_abs_diff(r.x, expected) < 1e-8);
    CHECK(r.lipschitz <= 128.0);
  }
}

TEST_CASE("adaptive restart beats plain momentum on an ill-conditioned quadratic") {
  Vector d(30), b(30);
  for (int i = 0; i < 30; ++i) {
    d[i] = std::pow(10.0, -3.0 + 3.0 * i / 29.0);
    b[i] = 1.0;
  }
  const DiagonalQuadratic f(d, b);
  LocalSolverConfig cfg;
  const StopRule stop{20000, 1e-24};
  const auto plain = proximal_gradient(f, Vector(30, 0.0), Acceleration::momentum, cfg, stop);
  const auto restart = proximal_gradient(f, Vector(30, 0.0), Acceleration::adaptive_restart, cfg, stop);
  CHECK(restart.restarts > 0);
  CHECK(restart.iterations < plain.iterations);
}

TEST_CASE("the observer sees every iterate and can stop the run") {
  const DiagonalQuadratic f({1.0, 2.0}, {1.0, 1.0});
  int seen = 0;
  const auto r = proximal_gradient(f, Vector(2, 0.0), Acceleration::momentum, LocalSolverConfig{}, StopRule{100, 0.0},
                                   [&](const IterationView& it) {
                                     CHECK(it.iteration == ++seen);
                                     return it.iteration < 7;
                                   });
  CHECK(seen == 7);
  CHECK(r.iterations == 7);
}
