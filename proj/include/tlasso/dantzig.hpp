#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <tlasso/errors.hpp>
#include <tlasso/types.hpp>

namespace tlasso {

struct DantzigSolution {
  Vector beta;
  double lambda_n = 0.0;
  double l1_norm = 0.0;
  double feasibility_gap = 0.0;  // max(0, ||X^T(Y - X beta)/n||_inf - lambda_n)
  std::size_t pivots = 0;
};

// ||X^T (Y - X beta) / n||_inf - lambda_n; negative means strictly feasible.
template <class DX, class DY, class DB>
double ds_feasibility(const Eigen::MatrixBase<DX>& X, const Eigen::MatrixBase<DY>& Y,
                      const Eigen::MatrixBase<DB>& beta, double lambda_n) {
  const double n = static_cast<double>(X.rows());
  const Vector corr = X.transpose() * (Y - X * beta) / n;
  return corr.cwiseAbs().maxCoeff() - lambda_n;
}

struct DantzigOptions {
  double pivot_tol = 1e-9;
  double feasibility_tol = 1e-9;
  std::size_t max_pivots = 200000;
  // Consecutive dual-degenerate pivots tolerated before switching to
  // Bland's rule for the rest of the solve.
  std::size_t degenerate_streak = 50;
};

namespace detail {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Constraint column k of the standard-form LP in terms of the Gram matrix G.
inline Vector ds_column(const Matrix& G, Index k) {
  const Index p = G.rows();
  Vector col = Vector::Zero(2 * p);
  if (k < p) {
    col.head(p) = G.col(k);
    col.tail(p) = -G.col(k);
  } else if (k < 2 * p) {
    col.head(p) = -G.col(k - p);
    col.tail(p) = G.col(k - p);
  } else {
    col[k - 2 * p] = 1.0;
  }
  return col;
}

}  // namespace detail

// Dantzig selector:  min ||beta||_1  s.t.  ||X^T (Y - X beta) / n||_inf <= lambda_n.
//
// Standard-form LP with beta = u - v (u, v >= 0) and one slack per row:
//    G u - G v + s_+ = z + lambda
//   -G u + G v + s_- = lambda - z          G = X^T X / n, z = X^T Y / n
// solved by the dual simplex method on a dense tableau. The all-slack basis
// is dual feasible (costs are 1 on u, v and 0 on slacks), so no phase one is
// needed. Leaving row: most negative basic value; entering column: minimum
// ratio, ties to the lowest index; after a run of degenerate pivots the
// leaving row also falls back to the lowest basic index (Bland). The final
// basis is re-solved with an LU factorization of the basis matrix.
template <class DX, class DY>
DantzigSolution dantzig_selector(const Eigen::MatrixBase<DX>& Xin,
                                 const Eigen::MatrixBase<DY>& Yin, double lambda_n,
                                 const DantzigOptions& opt = {}) {
  const Matrix& X = Xin.derived();
  const Vector Y = Yin;
  if (!(lambda_n >= 0.0)) throw InvalidArgument("dantzig_selector: lambda_n must be >= 0");
  if (Y.size() != X.rows()) throw InvalidArgument("dantzig_selector: Y length differs from n");
  const Index p = X.cols();
  const double nd = static_cast<double>(X.rows());
  const Matrix G = X.transpose() * X / nd;
  const Vector z = X.transpose() * Y / nd;

  const Index rows = 2 * p;
  const Index cols = 4 * p;
  Vector rhs(rows);
  rhs.head(p) = z.array() + lambda_n;
  rhs.tail(p) = lambda_n - z.array();

  DantzigSolution sol;
  sol.lambda_n = lambda_n;

  detail::RowMatrix T(rows, cols);
  T.leftCols(p).topRows(p) = G;
  T.leftCols(p).bottomRows(p) = -G;
  T.middleCols(p, p).topRows(p) = -G;
  T.middleCols(p, p).bottomRows(p) = G;
  T.rightCols(rows).setIdentity();
  Vector b = rhs;
  Vector cost = Vector::Zero(cols);
  cost.head(2 * p).setOnes();
  std::vector<Index> basis(static_cast<std::size_t>(rows));
  for (Index i = 0; i < rows; ++i) basis[static_cast<std::size_t>(i)] = 2 * p + i;

  bool bland = false;
  std::size_t streak = 0;
  std::size_t pivots = 0;
  Vector pivot_col(rows);
  Eigen::RowVectorXd pivot_row(cols);
  while (true) {
    Index leave = -1;
    for (Index i = 0; i < rows; ++i) {
      if (b[i] >= -opt.feasibility_tol) continue;
      if (leave < 0) {
        leave = i;
      } else if (bland) {
        if (basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)]) leave = i;
      } else if (b[i] < b[leave]) {
        leave = i;
      }
    }
    if (leave < 0) break;
    if (pivots >= opt.max_pivots) {
      Vector beta = Vector::Zero(p);
      for (Index i = 0; i < rows; ++i) {
        const Index k = basis[static_cast<std::size_t>(i)];
        if (k < p) beta[k] += b[i];
        else if (k < 2 * p) beta[k - p] -= b[i];
      }
      throw NonConvergence("dantzig_selector: pivot limit reached (objective " +
                               std::to_string(beta.lpNorm<1>()) + ", infeasibility " +
                               std::to_string(-b.minCoeff()) + ")",
                           -b.minCoeff());
    }

    Index enter = -1;
    double best = std::numeric_limits<double>::infinity();
    const auto row = T.row(leave);
    for (Index j = 0; j < cols; ++j) {
      const double a = row[j];
      if (a >= -opt.pivot_tol) continue;
      const double ratio = cost[j] / (-a);
      if (enter < 0 || ratio < best - 1e-12 * (1.0 + best)) {
        best = ratio;
        enter = j;
      }
    }
    if (enter < 0) {
      throw InternalError("dantzig_selector: LP reported infeasible");
    }

    const double piv = T(leave, enter);
    T.row(leave) /= piv;
    b[leave] /= piv;
    pivot_row = T.row(leave);
    pivot_col = T.col(enter);
    pivot_col[leave] = 0.0;
    T.noalias() -= pivot_col * pivot_row;
    b.noalias() -= pivot_col * b[leave];
    cost.noalias() -= cost[enter] * pivot_row.transpose();
    cost[enter] = 0.0;
    basis[static_cast<std::size_t>(leave)] = enter;
    ++pivots;

    if (best <= opt.pivot_tol) {
      if (++streak >= opt.degenerate_streak) bland = true;
    } else {
      streak = 0;
    }
  }

  // Re-solve the optimal basis against the original data.
  Matrix B(rows, rows);
  for (Index i = 0; i < rows; ++i) B.col(i) = detail::ds_column(G, basis[static_cast<std::size_t>(i)]);
  Eigen::PartialPivLU<Matrix> lu(B);
  Vector xb = lu.solve(rhs);
  const bool polished_ok = xb.allFinite() && xb.minCoeff() >= -1e-9 &&
                           (B * xb - rhs).cwiseAbs().maxCoeff() <= 1e-9 * (1.0 + rhs.cwiseAbs().maxCoeff());
  if (!polished_ok) xb = b;

  Vector beta = Vector::Zero(p);
  for (Index i = 0; i < rows; ++i) {
    const Index k = basis[static_cast<std::size_t>(i)];
    const double v = std::max(0.0, xb[i]);
    if (k < p) beta[k] += v;
    else if (k < 2 * p) beta[k - p] -= v;
  }

  sol.beta = std::move(beta);
  sol.l1_norm = sol.beta.lpNorm<1>();
  sol.feasibility_gap = std::max(0.0, ds_feasibility(X, Y, sol.beta, lambda_n));
  sol.pivots = pivots;
  return sol;
}

}  // namespace tlasso
