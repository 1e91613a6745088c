#pragma once

#include <Eigen/Dense>

#include <random>
#include <vector>

#include "aasm/sparse_matrix.hpp"

namespace testing {

inline Eigen::MatrixXd dense(const aasm::SparseMatrix& a) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(a.rows(), a.cols());
  const auto off = a.row_offsets();
  const auto col = a.col_indices();
  const auto val = a.values();
  for (int i = 0; i < a.rows(); ++i)
    for (int k = off[i]; k < off[i + 1]; ++k) m(i, col[k]) += val[k];
  return m;
}

inline Eigen::VectorXd eig(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline std::vector<double> random_vector(std::size_t n, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = dist(rng);
  return v;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Hat function of the node at the origin on the unit-spaced mesh split along
// the lower-left to upper-right diagonal.
inline double courant_hat(double xi, double eta) {
  return std::max(0.0, 1.0 - std::max({std::abs(xi), std::abs(eta), std::abs(xi - eta)}));
}

}  // namespace testing
