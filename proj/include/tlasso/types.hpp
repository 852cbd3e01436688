#pragma once

#include <algorithm>
#include <cstddef>
#include <iterator>
#include <vector>

#include <Eigen/Dense>

namespace tlasso {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

// Sorted, duplicate-free list of column indices (0-based).
using IndexSet = std::vector<Index>;

// Indices j with v[j] != 0, ascending.
template <class Derived>
IndexSet support_of(const Eigen::MatrixBase<Derived>& v) {
  IndexSet out;
  for (Index j = 0; j < v.size(); ++j) {
    if (v[j] != 0.0) out.push_back(j);
  }
  return out;
}

inline bool is_subset(const IndexSet& a, const IndexSet& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

inline IndexSet set_difference(const IndexSet& a, const IndexSet& b) {
  IndexSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(),
                      std::back_inserter(out));
  return out;
}

inline IndexSet set_union(const IndexSet& a, const IndexSet& b) {
  IndexSet out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(),
                 std::back_inserter(out));
  return out;
}

inline IndexSet complement(const IndexSet& a, Index p) {
  IndexSet out;
  std::size_t k = 0;
  for (Index j = 0; j < p; ++j) {
    if (k < a.size() && a[k] == j) {
      ++k;
    } else {
      out.push_back(j);
    }
  }
  return out;
}

// Columns of X listed in idx, in order.
template <class Derived>
Matrix columns(const Eigen::MatrixBase<Derived>& X, const IndexSet& idx) {
  Matrix out(X.rows(), static_cast<Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) out.col(k) = X.col(idx[k]);
  return out;
}

template <class Derived>
Vector gather(const Eigen::MatrixBase<Derived>& v, const IndexSet& idx) {
  Vector out(static_cast<Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) out[k] = v[idx[k]];
  return out;
}

// Zero-extended scatter of `values` (aligned with idx) into a length-p vector.
inline Vector scatter(const Vector& values, const IndexSet& idx, Index p) {
  Vector out = Vector::Zero(p);
  for (std::size_t k = 0; k < idx.size(); ++k) out[idx[k]] = values[k];
  return out;
}

inline int sign(double x) { return (x > 0.0) - (x < 0.0); }

inline double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

}  // namespace tlasso
