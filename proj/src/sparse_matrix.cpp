#include "aasm/sparse_matrix.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace aasm {

SparseMatrix::SparseMatrix(int rows, int cols, std::vector<Triplet> entries)
    : rows_(rows), cols_(cols) {
  if (rows < 0 || cols < 0) throw std::invalid_argument("SparseMatrix: negative dimension");
  for (const auto& e : entries) {
    if (e.row < 0 || e.row >= rows || e.col < 0 || e.col >= cols)
      throw std::out_of_range("SparseMatrix: triplet (" + std::to_string(e.row) + ", " +
                              std::to_string(e.col) + ") outside matrix");
  }
  std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });

  offsets_.assign(static_cast<std::size_t>(rows) + 1, 0);
  cols_idx_.reserve(entries.size());
  values_.reserve(entries.size());
  for (std::size_t k = 0; k < entries.size();) {
    const int r = entries[k].row;
    const int c = entries[k].col;
    double sum = 0.0;
    while (k < entries.size() && entries[k].row == r && entries[k].col == c) sum += entries[k++].value;
    cols_idx_.push_back(c);
    values_.push_back(sum);
    ++offsets_[r + 1];
  }
  for (int i = 0; i < rows; ++i) offsets_[i + 1] += offsets_[i];
}

double SparseMatrix::at(int i, int j) const {
  const auto first = cols_idx_.begin() + offsets_[i];
  const auto last = cols_idx_.begin() + offsets_[i + 1];
  const auto it = std::lower_bound(first, last, j);
  if (it == last || *it != j) return 0.0;
  return values_[static_cast<std::size_t>(it - cols_idx_.begin())];
}

void SparseMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  if (x.size() != static_cast<std::size_t>(cols_) || y.size() != static_cast<std::size_t>(rows_))
    throw std::invalid_argument("SparseMatrix::multiply: dimension mismatch");
  for (int i = 0; i < rows_; ++i) {
    double acc = 0.0;
    for (int k = offsets_[i]; k < offsets_[i + 1]; ++k) acc += values_[k] * x[cols_idx_[k]];
    y[i] = acc;
  }
}

Vector SparseMatrix::multiply(std::span<const double> x) const {
  Vector y(static_cast<std::size_t>(rows_));
  multiply(x, y);
  return y;
}

void SparseMatrix::multiply_transpose(std::span<const double> x, std::span<double> y) const {
  if (x.size() != static_cast<std::size_t>(rows_) || y.size() != static_cast<std::size_t>(cols_))
    throw std::invalid_argument("SparseMatrix::multiply_transpose: dimension mismatch");
  std::fill(y.begin(), y.end(), 0.0);
  for (int i = 0; i < rows_; ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    for (int k = offsets_[i]; k < offsets_[i + 1]; ++k) y[cols_idx_[k]] += values_[k] * xi;
  }
}

Vector SparseMatrix::multiply_transpose(std::span<const double> x) const {
  Vector y(static_cast<std::size_t>(cols_));
  multiply_transpose(x, y);
  return y;
}

SparseMatrix SparseMatrix::transpose() const {
  std::vector<Triplet> t;
  t.reserve(nnz());
  for (int i = 0; i < rows_; ++i)
    for (int k = offsets_[i]; k < offsets_[i + 1]; ++k) t.push_back({cols_idx_[k], i, values_[k]});
  return SparseMatrix(cols_, rows_, std::move(t));
}

SparseMatrix SparseMatrix::principal_submatrix(std::span<const int> index) const {
  std::vector<int> local(static_cast<std::size_t>(cols_), -1);
  for (std::size_t a = 0; a < index.size(); ++a) {
    if (index[a] < 0 || index[a] >= std::min(rows_, cols_))
      throw std::out_of_range("principal_submatrix: index out of range");
    local[index[a]] = static_cast<int>(a);
  }
  std::vector<Triplet> t;
  for (std::size_t a = 0; a < index.size(); ++a) {
    const int i = index[a];
    for (int k = offsets_[i]; k < offsets_[i + 1]; ++k) {
      const int b = local[cols_idx_[k]];
      if (b >= 0) t.push_back({static_cast<int>(a), b, values_[k]});
    }
  }
  const int m = static_cast<int>(index.size());
  return SparseMatrix(m, m, std::move(t));
}

SparseMatrix multiply(const SparseMatrix& a, const SparseMatrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("multiply: inner dimension mismatch");
  const auto ao = a.row_offsets();
  const auto ac = a.col_indices();
  const auto av = a.values();
  const auto bo = b.row_offsets();
  const auto bc = b.col_indices();
  const auto bv = b.values();
  std::vector<Triplet> t;
  for (int i = 0; i < a.rows(); ++i)
    for (int k = ao[i]; k < ao[i + 1]; ++k)
      for (int l = bo[ac[k]]; l < bo[ac[k] + 1]; ++l) t.push_back({i, bc[l], av[k] * bv[l]});
  return SparseMatrix(a.rows(), b.cols(), std::move(t));
}

SparseMatrix galerkin_product(const SparseMatrix& a, const SparseMatrix& p) {
  return multiply(p.transpose(), multiply(a, p));
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm_sq(std::span<const double> a) {
  double s = 0.0;
  for (double x : a) s += x * x;
  return s;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("axpy: length mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

}  // namespace aasm
