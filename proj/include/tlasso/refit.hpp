#pragma once

#include <string>

#include <tlasso/errors.hpp>
#include <tlasso/model.hpp>
#include <tlasso/types.hpp>

namespace tlasso {

inline constexpr double kRankTolerance = 1e-8;

namespace detail {

inline void check_model(Index n, Index p, const IndexSet& I, const char* who) {
  if (static_cast<Index>(I.size()) > n) {
    throw InvalidArgument(std::string(who) + ": |I| = " + std::to_string(I.size()) +
                          " exceeds n = " + std::to_string(n));
  }
  for (std::size_t k = 0; k < I.size(); ++k) {
    if (I[k] < 0 || I[k] >= p || (k > 0 && I[k] <= I[k - 1])) {
      throw InvalidArgument(std::string(who) + ": model must be sorted, unique and in range");
    }
  }
}

// Householder QR of X_I with a singular-value rank check on R.
inline Eigen::HouseholderQR<Matrix> factor_model(const Matrix& XI, const IndexSet& I,
                                                 const char* who) {
  Eigen::HouseholderQR<Matrix> qr(XI);
  const Matrix R = qr.matrixQR().topRows(XI.cols()).triangularView<Eigen::Upper>();
  const Vector sv = Eigen::JacobiSVD<Matrix>(R).singularValues();
  if (!(sv.minCoeff() >= kRankTolerance * sv.maxCoeff()) || !(sv.maxCoeff() > 0.0)) {
    throw RankDeficiency(std::string(who) + ": X_I is rank deficient for I = " +
                             format_indices(I),
                         I);
  }
  return qr;
}

}  // namespace detail

// Least squares on the columns in I: beta_I = argmin ||Y - X_I b||, zero off I.
template <class DX, class DY>
Vector ols(const Eigen::MatrixBase<DX>& Xin, const Eigen::MatrixBase<DY>& Y, const IndexSet& I) {
  const Matrix& X = Xin.derived();
  detail::check_model(X.rows(), X.cols(), I, "ols");
  if (Y.size() != X.rows()) throw InvalidArgument("ols: Y length differs from n");
  if (I.empty()) return Vector::Zero(X.cols());
  const Matrix XI = columns(X, I);
  const auto qr = detail::factor_model(XI, I, "ols");
  const Vector coef = qr.solve(Vector(Y));
  return scatter(coef, I, X.cols());
}

struct LossDecomposition {
  double bias_sq = 0.0;   // ||(P_I - Id) X_{I^c} beta_{I^c}||^2 / n
  double variance = 0.0;  // |I| sigma^2 / n
  double total() const { return bias_sq + variance; }
};

// Expected in-sample prediction risk E||X beta_hat_I - X beta||^2 / n of the
// OLS refit on I, split into squared bias and variance.
inline LossDecomposition ols_loss_decomposition(const DesignMatrix& X, const GroundTruth& truth,
                                                const IndexSet& I, double sigma) {
  const Matrix& A = X.matrix();
  detail::check_model(A.rows(), A.cols(), I, "ols_loss_decomposition");
  const double nd = static_cast<double>(A.rows());
  const IndexSet rest = complement(I, A.cols());
  Vector signal = Vector::Zero(A.rows());
  for (Index j : rest) signal.noalias() += truth.beta[j] * A.col(j);

  LossDecomposition out;
  if (I.empty()) {
    out.bias_sq = signal.squaredNorm() / nd;
    return out;
  }
  const Matrix XI = columns(A, I);
  const auto qr = detail::factor_model(XI, I, "ols_loss_decomposition");
  const Vector projected = XI * qr.solve(signal);
  out.bias_sq = (projected - signal).squaredNorm() / nd;
  out.variance = static_cast<double>(I.size()) * sigma * sigma / nd;
  return out;
}

}  // namespace tlasso
