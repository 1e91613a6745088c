#include "aasm/linalg.hpp"

#include <cmath>
#include <random>
#include <string>

namespace aasm {

namespace {

template <class DofOf>
SparseMatrix assemble(const P1Space& space, int size, DofOf dof_of) {
  std::vector<Triplet> t;
  t.reserve(space.triangles().size() * 9);
  for (const auto& tri : space.triangles()) {
    for (int a = 0; a < 3; ++a) {
      const int ra = dof_of(tri.nodes[a]);
      if (ra < 0) continue;
      for (int b = 0; b < 3; ++b) {
        const int cb = dof_of(tri.nodes[b]);
        if (cb < 0) continue;
        const auto& ga = tri.basis_gradients[a];
        const auto& gb = tri.basis_gradients[b];
        t.push_back({ra, cb, tri.area * (ga[0] * gb[0] + ga[1] * gb[1])});
      }
    }
  }
  return SparseMatrix(size, size, std::move(t));
}

}  // namespace

SparseMatrix assemble_stiffness(const P1Space& space) {
  return assemble(space, static_cast<int>(space.num_dofs()), [&](int node) { return space.node_dof(node); });
}

SparseMatrix assemble_neumann_stiffness(const P1Space& space) {
  return assemble(space, static_cast<int>(space.num_nodes()), [](int node) { return node; });
}

Vector solve_spd(const SparseMatrix& a, std::span<const double> b, double tol, CgInfo* info) {
  const std::size_t n = b.size();
  if (a.rows() != a.cols() || static_cast<std::size_t>(a.rows()) != n)
    throw std::invalid_argument("solve_spd: dimension mismatch");
  Vector x(n, 0.0);
  Vector r(b.begin(), b.end());
  Vector p = r;
  Vector ap(n);
  const double bnorm = std::sqrt(norm_sq(b));
  double rr = norm_sq(r);
  const int cap = 10 * static_cast<int>(std::max<std::size_t>(n, 1));
  int it = 0;
  while (std::sqrt(rr) > tol * bnorm) {
    if (it == cap)
      throw SolverError("solve_spd: no convergence after " + std::to_string(cap) + " iterations");
    a.multiply(p, ap);
    const double pap = dot(p, ap);
    if (!(pap > 0.0)) throw SolverError("solve_spd: matrix is not positive definite");
    const double alpha = rr / pap;
    axpy(alpha, p, x);
    axpy(-alpha, ap, r);
    const double rr_new = norm_sq(r);
    const double beta = rr_new / rr;
    rr = rr_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
    ++it;
  }
  if (info) *info = {it, std::sqrt(rr)};
  return x;
}

DenseCholesky::DenseCholesky(const SparseMatrix& a) : n_(static_cast<std::size_t>(a.rows())) {
  if (a.rows() != a.cols()) throw std::invalid_argument("DenseCholesky: matrix is not square");
  l_.assign(n_ * n_, 0.0);
  const auto off = a.row_offsets();
  const auto col = a.col_indices();
  const auto val = a.values();
  for (std::size_t i = 0; i < n_; ++i)
    for (int k = off[i]; k < off[i + 1]; ++k)
      if (static_cast<std::size_t>(col[k]) <= i) l_[i * n_ + col[k]] = val[k];

  for (std::size_t j = 0; j < n_; ++j) {
    double d = l_[j * n_ + j];
    for (std::size_t k = 0; k < j; ++k) d -= l_[j * n_ + k] * l_[j * n_ + k];
    if (!(d > 0.0)) throw SolverError("DenseCholesky: matrix is not positive definite");
    const double ljj = std::sqrt(d);
    l_[j * n_ + j] = ljj;
    for (std::size_t i = j + 1; i < n_; ++i) {
      double s = l_[i * n_ + j];
      for (std::size_t k = 0; k < j; ++k) s -= l_[i * n_ + k] * l_[j * n_ + k];
      l_[i * n_ + j] = s / ljj;
    }
  }
}

void DenseCholesky::solve_in_place(std::span<double> b) const {
  if (b.size() != n_) throw std::invalid_argument("DenseCholesky::solve: length mismatch");
  for (std::size_t i = 0; i < n_; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= l_[i * n_ + k] * b[k];
    b[i] = s / l_[i * n_ + i];
  }
  for (std::size_t i = n_; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n_; ++k) s -= l_[k * n_ + i] * b[k];
    b[i] = s / l_[i * n_ + i];
  }
}

Vector DenseCholesky::solve(std::span<const double> b) const {
  Vector x(b.begin(), b.end());
  solve_in_place(x);
  return x;
}

double op_norm_sq(const LinearMap& apply, std::size_t dim, int iterations) {
  if (dim == 0) return 0.0;
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> dist(0.5, 1.5);
  Vector x(dim);
  for (auto& v : x) v = dist(rng);
  Vector y(dim);
  double estimate = 0.0;
  for (int it = 0; it < iterations; ++it) {
    const double xn = std::sqrt(norm_sq(x));
    if (xn == 0.0) return 0.0;
    for (auto& v : x) v /= xn;
    apply(x, y);
    estimate = dot(x, y);
    x.swap(y);
  }
  return estimate;
}

}  // namespace aasm
