#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace aasm {

using Vector = std::vector<double>;

struct Triplet {
  int row;
  int col;
  double value;
};

/// Row-compressed sparse matrix. Column indices are sorted within each row
/// and duplicates are merged on construction.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(int rows, int cols, std::vector<Triplet> entries);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t nnz() const { return values_.size(); }

  std::span<const int> row_offsets() const { return offsets_; }
  std::span<const int> col_indices() const { return cols_idx_; }
  std::span<const double> values() const { return values_; }

  /// Entry (i, j), zero when not stored.
  double at(int i, int j) const;

  /// y = A x
  void multiply(std::span<const double> x, std::span<double> y) const;
  Vector multiply(std::span<const double> x) const;
  /// y = A^T x
  void multiply_transpose(std::span<const double> x, std::span<double> y) const;
  Vector multiply_transpose(std::span<const double> x) const;

  SparseMatrix transpose() const;

  /// Rows and columns picked by `index`, in that order.
  SparseMatrix principal_submatrix(std::span<const int> index) const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<int> offsets_{0};
  std::vector<int> cols_idx_;
  Vector values_;
};

/// C = A * B
SparseMatrix multiply(const SparseMatrix& a, const SparseMatrix& b);

/// P^T A P
SparseMatrix galerkin_product(const SparseMatrix& a, const SparseMatrix& p);

double dot(std::span<const double> a, std::span<const double> b);
double norm_sq(std::span<const double> a);
/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

}  // namespace aasm
