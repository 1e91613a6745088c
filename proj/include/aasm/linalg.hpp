#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "aasm/mesh.hpp"
#include "aasm/sparse_matrix.hpp"

namespace aasm {

/// Raised when an iterative method fails its contract (non-convergence,
/// negative curvature, runaway step size).
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dirichlet-energy stiffness matrix over the interior DOFs.
SparseMatrix assemble_stiffness(const P1Space& space);

/// Stiffness over all nodes with no boundary condition applied.
SparseMatrix assemble_neumann_stiffness(const P1Space& space);

struct CgInfo {
  int iterations = 0;
  double residual_norm = 0.0;
};

/// Unpreconditioned conjugate gradients; the returned x satisfies
/// ||A x - b|| <= tol ||b||. Caps at 10 dim iterations.
Vector solve_spd(const SparseMatrix& a, std::span<const double> b, double tol, CgInfo* info = nullptr);

/// Dense Cholesky factor of a (small) SPD matrix, used for exact local solves.
class DenseCholesky {
 public:
  DenseCholesky() = default;
  explicit DenseCholesky(const SparseMatrix& a);

  std::size_t size() const { return n_; }
  void solve_in_place(std::span<double> b) const;
  Vector solve(std::span<const double> b) const;

 private:
  std::size_t n_ = 0;
  std::vector<double> l_;  // row-major lower triangle
};

using LinearMap = std::function<void(std::span<const double> x, std::span<double> y)>;

/// Power-iteration estimate of the largest eigenvalue of a symmetric positive
/// semidefinite map (pass A^T A for a general A).
double op_norm_sq(const LinearMap& apply, std::size_t dim, int iterations);

}  // namespace aasm
