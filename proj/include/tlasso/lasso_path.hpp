#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include <tlasso/errors.hpp>
#include <tlasso/types.hpp>

// Lasso objective throughout:  (1/2n) ||Y - X beta||^2 + lambda ||beta||_1,
// with gradient of the smooth part g = -X^T (Y - X beta) / n.

namespace tlasso {

struct Knot {
  double lambda = 0.0;
  Vector beta;
  // Active set in effect on the segment that starts at this knot.
  IndexSet active;
};

struct LassoPath {
  std::vector<Knot> knots;  // lambda strictly decreasing
  bool complete = true;     // false when stopped early by max_knots

  double lambda_max() const { return knots.empty() ? 0.0 : knots.front().lambda; }
  Index p() const { return knots.empty() ? 0 : knots.front().beta.size(); }
  std::size_t size() const { return knots.size(); }
};

// Worst violation of the Lasso optimality conditions at (beta, lambda):
//   beta_j != 0 : |g_j + lambda sign(beta_j)|
//   beta_j == 0 : max(0, |g_j| - lambda)
template <class DX, class DY, class DB>
double kkt_residual(const Eigen::MatrixBase<DX>& X, const Eigen::MatrixBase<DY>& Y,
                    const Eigen::MatrixBase<DB>& beta, double lambda) {
  const double n = static_cast<double>(X.rows());
  const Vector g = -(X.transpose() * (Y - X * beta)) / n;
  double worst = 0.0;
  for (Index j = 0; j < g.size(); ++j) {
    const double v = beta[j] != 0.0 ? std::abs(g[j] + lambda * sign(beta[j]))
                                     : std::max(0.0, std::abs(g[j]) - lambda);
    worst = std::max(worst, v);
  }
  return worst;
}

namespace detail {

// Cholesky factor of the active Gram matrix G_A = X_A^T X_A / n, kept in
// insertion order and updated one column at a time.
class ActiveCholesky {
 public:
  explicit ActiveCholesky(Index capacity) : L_(Matrix::Zero(capacity, capacity)) {}

  Index size() const noexcept { return m_; }

  // Append a column with cross products `cross` (= G_{A,j}) and diagonal
  // `diag` (= G_jj). Returns false if the enlarged matrix is numerically
  // singular; the factor is unchanged in that case.
  bool append(const Vector& cross, double diag) {
    Vector w = cross;
    if (m_ > 0) {
      L_.topLeftCorner(m_, m_).triangularView<Eigen::Lower>().solveInPlace(w);
    }
    const double d2 = diag - w.squaredNorm();
    if (!(d2 > 1e-12 * diag)) return false;
    L_.row(m_).head(m_) = w.transpose();
    L_(m_, m_) = std::sqrt(d2);
    ++m_;
    return true;
  }

  // Remove the variable at position k (Givens re-triangularization).
  void remove(Index k) {
    for (Index r = k; r + 1 < m_; ++r) L_.row(r).head(m_) = L_.row(r + 1).head(m_);
    L_.row(m_ - 1).setZero();
    for (Index i = k; i + 1 < m_; ++i) {
      const double a = L_(i, i);
      const double b = L_(i, i + 1);
      const double r = std::hypot(a, b);
      const double c = a / r;
      const double s = b / r;
      for (Index row = i; row + 1 < m_; ++row) {
        const double x = L_(row, i);
        const double y = L_(row, i + 1);
        L_(row, i) = c * x + s * y;
        L_(row, i + 1) = -s * x + c * y;
      }
    }
    L_.col(m_ - 1).setZero();
    --m_;
  }

  Vector solve(const Vector& rhs) const {
    const auto L = L_.topLeftCorner(m_, m_).triangularView<Eigen::Lower>();
    Vector x = L.solve(rhs);
    L.transpose().solveInPlace(x);
    return x;
  }

 private:
  Matrix L_;
  Index m_ = 0;
};

}  // namespace detail

// Full Lasso regularization path by LARS with the lasso modification
// (variables leave the active set when their coefficient crosses zero).
//
// Events closer than 1e-12 * lambda_max are processed together, in index
// order, so exact ties give a deterministic path with one knot. New
// variables stop entering once |A| = min(n, p); from there the path runs
// to lambda = 0 with drops only. Coefficients at each knot are re-solved
// from the active-set normal equations to keep KKT residuals at roundoff.
template <class DX, class DY>
LassoPath lars_path(const Eigen::MatrixBase<DX>& Xin, const Eigen::MatrixBase<DY>& Yin,
                    std::size_t max_knots = std::numeric_limits<std::size_t>::max()) {
  const Matrix& X = Xin.derived();
  const Vector Y = Yin;
  const Index n = X.rows();
  const Index p = X.cols();
  if (n < 1 || p < 1) throw InvalidArgument("lars_path: empty design");
  if (Y.size() != n) throw InvalidArgument("lars_path: Y length differs from n");
  const double nd = static_cast<double>(n);

  const Vector z = X.transpose() * Y / nd;  // correlations at beta = 0
  const double lambda_max = z.cwiseAbs().maxCoeff();

  LassoPath path;
  if (!(lambda_max > 0.0)) {
    path.knots.push_back({0.0, Vector::Zero(p), {}});
    return path;
  }

  const Index cap = std::min(n, p);
  const double tie_tol = 1e-12 * lambda_max;
  const Vector col_sq = X.colwise().squaredNorm().transpose() / nd;

  std::vector<Index> active;   // insertion order, aligned with chol
  std::vector<double> signs;
  std::vector<char> is_active(static_cast<std::size_t>(p), 0);
  detail::ActiveCholesky chol(cap);
  Vector beta = Vector::Zero(p);
  Vector c = z;
  double lambda = lambda_max;
  Index last_dropped = -1;

  auto sorted_active = [&] {
    IndexSet a(active.begin(), active.end());
    std::sort(a.begin(), a.end());
    return a;
  };

  auto add_variable = [&](Index j, double sgn) {
    Vector cross(static_cast<Index>(active.size()));
    for (std::size_t k = 0; k < active.size(); ++k) {
      cross[static_cast<Index>(k)] = X.col(active[k]).dot(X.col(j)) / nd;
    }
    if (!chol.append(cross, col_sq[j])) {
      IndexSet bad = sorted_active();
      bad.insert(std::upper_bound(bad.begin(), bad.end(), j), j);
      throw DegenerateDesign("lars_path: active Gram matrix is singular on " +
                                 detail::format_indices(bad),
                             bad);
    }
    active.push_back(j);
    signs.push_back(sgn);
    is_active[static_cast<std::size_t>(j)] = 1;
  };

  // Initial active set: every coordinate attaining lambda_max.
  for (Index j = 0; j < p; ++j) {
    if (std::abs(z[j]) >= lambda_max - tie_tol) add_variable(j, sign(z[j]));
  }
  path.knots.push_back({lambda_max, beta, sorted_active()});

  while (true) {
    if (path.knots.size() >= max_knots) {
      path.complete = false;
      break;
    }
    const Index m = static_cast<Index>(active.size());
    Vector s_a(m);
    for (Index k = 0; k < m; ++k) s_a[k] = signs[static_cast<std::size_t>(k)];

    // Equiangular direction: beta_A moves by gamma * d as lambda drops by gamma.
    Vector d = m > 0 ? chol.solve(s_a) : Vector();
    Vector u = Vector::Zero(n);
    for (Index k = 0; k < m; ++k) u.noalias() += d[k] * X.col(active[static_cast<std::size_t>(k)]);
    const Vector a = X.transpose() * u / nd;

    double gamma = lambda;  // reaching lambda = 0
    std::vector<Index> joins, drops;
    std::vector<double> join_gamma, drop_gamma;

    if (m < cap) {
      for (Index j = 0; j < p; ++j) {
        if (is_active[static_cast<std::size_t>(j)] || j == last_dropped) continue;
        double g = std::numeric_limits<double>::infinity();
        if (1.0 - a[j] > 1e-15) {
          const double t = (lambda - c[j]) / (1.0 - a[j]);
          if (t > 0.0) g = std::min(g, t);
        }
        if (1.0 + a[j] > 1e-15) {
          const double t = (lambda + c[j]) / (1.0 + a[j]);
          if (t > 0.0) g = std::min(g, t);
        }
        if (g < std::numeric_limits<double>::infinity()) {
          joins.push_back(j);
          join_gamma.push_back(g);
          gamma = std::min(gamma, g);
        }
      }
    }
    for (Index k = 0; k < m; ++k) {
      const Index j = active[static_cast<std::size_t>(k)];
      if (beta[j] == 0.0 || sign(beta[j]) != s_a[k]) continue;
      const double t = -beta[j] / d[k];
      if (t > 0.0) {
        drops.push_back(j);
        drop_gamma.push_back(t);
        gamma = std::min(gamma, t);
      }
    }

    const bool reaches_zero = gamma >= lambda - tie_tol;
    if (reaches_zero) gamma = lambda;

    for (Index k = 0; k < m; ++k) beta[active[static_cast<std::size_t>(k)]] += gamma * d[k];
    const Vector c_next = c - gamma * a;
    lambda = reaches_zero ? 0.0 : lambda - gamma;

    last_dropped = -1;
    std::vector<Index> joined;
    if (!reaches_zero) {
      // Drops first so that the Gram factor never exceeds capacity.
      for (std::size_t e = 0; e < drops.size(); ++e) {
        if (drop_gamma[e] > gamma + tie_tol) continue;
        const Index j = drops[e];
        const auto pos = std::find(active.begin(), active.end(), j) - active.begin();
        chol.remove(static_cast<Index>(pos));
        active.erase(active.begin() + pos);
        signs.erase(signs.begin() + pos);
        is_active[static_cast<std::size_t>(j)] = 0;
        beta[j] = 0.0;
        last_dropped = j;
      }
      for (std::size_t e = 0; e < joins.size(); ++e) {
        if (join_gamma[e] > gamma + tie_tol) continue;
        if (static_cast<Index>(active.size()) >= cap) break;
        add_variable(joins[e], sign(c_next[joins[e]]));
        joined.push_back(joins[e]);
      }
    }

    // Re-solve the active coefficients exactly at this lambda.
    const Index m2 = static_cast<Index>(active.size());
    if (m2 > 0) {
      Vector rhs(m2);
      for (Index k = 0; k < m2; ++k) {
        rhs[k] = z[active[static_cast<std::size_t>(k)]] - lambda * signs[static_cast<std::size_t>(k)];
      }
      const Vector b_a = chol.solve(rhs);
      for (Index k = 0; k < m2; ++k) beta[active[static_cast<std::size_t>(k)]] = b_a[k];
      // A just-joined coordinate is zero at its knot; the solve only gives roundoff.
      for (Index j : joined) beta[j] = 0.0;
    }
    const Vector r = Y - X * beta;
    c = X.transpose() * r / nd;

    path.knots.push_back({lambda, beta, sorted_active()});
    if (reaches_zero || lambda <= 1e-12 * lambda_max) break;
  }
  return path;
}

// Lasso solution at lambda_n, by linear interpolation between the knots
// that bracket it (exact, since the path is piecewise linear).
inline Vector lasso_at(const LassoPath& path, double lambda_n) {
  if (path.knots.empty()) throw InvalidArgument("lasso_at: empty path");
  if (lambda_n < 0.0) throw InvalidArgument("lasso_at: lambda_n must be >= 0");
  const auto& k = path.knots;
  if (lambda_n >= k.front().lambda) return Vector::Zero(path.p());
  for (std::size_t i = 0; i + 1 < k.size(); ++i) {
    const double hi = k[i].lambda;
    const double lo = k[i + 1].lambda;
    if (lambda_n == lo) return k[i + 1].beta;
    if (lambda_n > lo) {
      const double t = (hi - lambda_n) / (hi - lo);
      return k[i].beta + t * (k[i + 1].beta - k[i].beta);
    }
  }
  return k.back().beta;
}

// Cyclic coordinate descent for the Lasso. Stops once the largest
// coordinate move in a sweep is below tol * (1 + ||beta||_inf) and the
// KKT residual is at most 10 * tol.
template <class DX, class DY>
Vector cd_lasso(const Eigen::MatrixBase<DX>& Xin, const Eigen::MatrixBase<DY>& Yin,
                double lambda_n, double tol = 1e-10, std::size_t max_iters = 1000000) {
  const Matrix& X = Xin.derived();
  const Vector Y = Yin;
  if (!(lambda_n > 0.0)) throw InvalidArgument("cd_lasso: lambda_n must be > 0");
  if (Y.size() != X.rows()) throw InvalidArgument("cd_lasso: Y length differs from n");
  const Index p = X.cols();
  const double nd = static_cast<double>(X.rows());
  const Vector diag = X.colwise().squaredNorm().transpose() / nd;

  Vector beta = Vector::Zero(p);
  Vector r = Y;
  double kkt = std::numeric_limits<double>::infinity();
  for (std::size_t it = 0; it < max_iters; ++it) {
    double max_move = 0.0;
    for (Index j = 0; j < p; ++j) {
      if (diag[j] == 0.0) continue;
      const double old = beta[j];
      const double zj = X.col(j).dot(r) / nd + diag[j] * old;
      const double nv = soft_threshold(zj, lambda_n) / diag[j];
      if (nv != old) {
        r.noalias() -= (nv - old) * X.col(j);
        beta[j] = nv;
        max_move = std::max(max_move, std::abs(nv - old));
      }
    }
    if (max_move < tol * (1.0 + beta.cwiseAbs().maxCoeff())) {
      kkt = kkt_residual(X, Y, beta, lambda_n);
      if (kkt <= 10.0 * tol) return beta;
    }
  }
  kkt = kkt_residual(X, Y, beta, lambda_n);
  throw NonConvergence("cd_lasso: no convergence after " + std::to_string(max_iters) +
                           " sweeps (KKT residual " + std::to_string(kkt) + ")",
                       kkt);
}

// CSV dump of the nonzero path entries: knot,lambda,j,beta_j
inline void write_path_csv(const LassoPath& path, std::ostream& os) {
  os << "knot,lambda,j,beta_j\n";
  char buf[96];
  for (std::size_t k = 0; k < path.knots.size(); ++k) {
    const Knot& kn = path.knots[k];
    for (Index j = 0; j < kn.beta.size(); ++j) {
      if (kn.beta[j] == 0.0) continue;
      std::snprintf(buf, sizeof buf, "%zu,%.17g,%ld,%.17g\n", k, kn.lambda,
                    static_cast<long>(j), kn.beta[j]);
      os << buf;
    }
  }
}

}  // namespace tlasso
