#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <tlasso/errors.hpp>
#include <tlasso/model.hpp>
#include <tlasso/types.hpp>

namespace tlasso {

// Support-recovery counts. A coefficient is "selected" iff it is exactly
// nonzero; refits produce exact zeros off the model, so no epsilon is used.
struct Confusion {
  Index tp = 0, fp = 0, fn = 0, tn = 0;
  double fpr = 0.0;  // fp / (p - s); 0 when p == s
  double tpr = 1.0;  // tp / s;       1 when s == 0
};

inline Confusion confusion(const Vector& beta_hat, const GroundTruth& truth) {
  if (beta_hat.size() != truth.p()) {
    throw InvalidArgument("confusion: length mismatch");
  }
  Confusion c;
  for (Index j = 0; j < beta_hat.size(); ++j) {
    const bool sel = beta_hat[j] != 0.0;
    const bool rel = truth.beta[j] != 0.0;
    if (sel && rel) ++c.tp;
    else if (sel) ++c.fp;
    else if (rel) ++c.fn;
    else ++c.tn;
  }
  const Index s = c.tp + c.fn;
  const Index neg = c.fp + c.tn;
  c.fpr = neg > 0 ? static_cast<double>(c.fp) / static_cast<double>(neg) : 0.0;
  c.tpr = s > 0 ? static_cast<double>(c.tp) / static_cast<double>(s) : 1.0;
  return c;
}

// sum_i min(beta_i^2, sigma^2 / n): the ideal risk proxy.
inline double ideal_risk_proxy(const GroundTruth& truth, double sigma, Index n) {
  const double floor = sigma * sigma / static_cast<double>(n);
  double acc = 0.0;
  for (Index j = 0; j < truth.p(); ++j) acc += std::min(truth.beta[j] * truth.beta[j], floor);
  return acc;
}

inline double rho_squared(const Vector& beta_hat, const GroundTruth& truth, double sigma, Index n) {
  if (beta_hat.size() != truth.p()) throw InvalidArgument("rho_squared: length mismatch");
  const double denom = ideal_risk_proxy(truth, sigma, n);
  if (!(denom > 0.0)) {
    throw UndefinedMetric("rho_squared: sum min(beta_i^2, sigma^2/n) is zero");
  }
  return (beta_hat - truth.beta).squaredNorm() / denom;
}

inline double ell2_loss(const Vector& beta_hat, const GroundTruth& truth) {
  if (beta_hat.size() != truth.p()) throw InvalidArgument("ell2_loss: length mismatch");
  return (beta_hat - truth.beta).norm();
}

// ||X beta_hat - X beta||_2 / sqrt(n)
inline double prediction_loss(const DesignMatrix& X, const Vector& beta_hat, const GroundTruth& truth) {
  if (beta_hat.size() != X.p() || truth.p() != X.p()) {
    throw InvalidArgument("prediction_loss: dimension mismatch");
  }
  return (X.matrix() * (beta_hat - truth.beta)).norm() / std::sqrt(static_cast<double>(X.n()));
}

inline bool exact_sign_recovery(const Vector& beta_hat, const GroundTruth& truth) {
  if (beta_hat.size() != truth.p()) throw InvalidArgument("exact_sign_recovery: length mismatch");
  for (Index j = 0; j < beta_hat.size(); ++j) {
    if (sign(beta_hat[j]) != sign(truth.beta[j])) return false;
  }
  return true;
}

// Least-squares isotone (nondecreasing) fit by pool-adjacent-violators.
inline std::vector<double> isotonic_fit(const std::vector<double>& y) {
  std::vector<double> level;
  std::vector<std::size_t> count;
  for (double v : y) {
    level.push_back(v);
    count.push_back(1);
    while (level.size() > 1 && level[level.size() - 2] > level.back()) {
      const std::size_t c2 = count.back();
      const double l2 = level.back();
      level.pop_back();
      count.pop_back();
      const double merged = (level.back() * static_cast<double>(count.back()) +
                             l2 * static_cast<double>(c2)) /
                            static_cast<double>(count.back() + c2);
      level.back() = merged;
      count.back() += c2;
    }
  }
  std::vector<double> out;
  out.reserve(y.size());
  for (std::size_t b = 0; b < level.size(); ++b) out.insert(out.end(), count[b], level[b]);
  return out;
}

inline double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

inline double mean(const std::vector<double>& v) {
  if (v.empty()) return std::nan("");
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc / static_cast<double>(v.size());
}

inline double stddev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

}  // namespace tlasso
