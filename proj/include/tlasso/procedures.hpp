#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <tlasso/dantzig.hpp>
#include <tlasso/errors.hpp>
#include <tlasso/lasso_path.hpp>
#include <tlasso/metrics.hpp>
#include <tlasso/model.hpp>
#include <tlasso/refit.hpp>
#include <tlasso/types.hpp>

namespace tlasso {

struct Stage {
  double threshold = 0.0;
  IndexSet selected;
  Vector beta;  // refit on `selected` (or beta_init for the screening stage)
};

struct ProcedureResult {
  std::string procedure;
  std::string initial = "lasso";  // estimator that produced beta_init
  double lambda_n = 0.0;
  Vector beta_init;
  std::vector<Stage> stages;
  Vector beta_hat;
  bool truncated = false;  // some stage had |I| > n and was cut back

  const IndexSet& final_set() const {
    static const IndexSet empty;
    return stages.empty() ? empty : stages.back().selected;
  }
};

// I = {j : |beta_j| >= t0}
template <class D>
IndexSet threshold_select(const Eigen::MatrixBase<D>& beta, double t0) {
  if (!(t0 >= 0.0)) throw InvalidArgument("threshold_select: t0 must be >= 0");
  IndexSet out;
  for (Index j = 0; j < beta.size(); ++j) {
    if (std::abs(beta[j]) >= t0) out.push_back(j);
  }
  return out;
}

namespace detail {

// Keeps the n - 1 largest |beta_j| of I (ties to the lower index) when |I| > n.
inline bool truncate_model(IndexSet& I, const Vector& beta, Index n) {
  if (static_cast<Index>(I.size()) <= n) return false;
  std::stable_sort(I.begin(), I.end(),
                   [&](Index a, Index b) { return std::abs(beta[a]) > std::abs(beta[b]); });
  I.resize(static_cast<std::size_t>(std::max<Index>(n - 1, 0)));
  std::sort(I.begin(), I.end());
  return true;
}

}  // namespace detail

// Generic two-step estimator: threshold beta_init at t0, refit by OLS.
inline ProcedureResult two_step(const Matrix& X, const Vector& Y, Vector beta_init, double lambda_n,
                                double t0, std::string name = "two_step") {
  if (!(t0 > 0.0)) throw InvalidArgument(name + ": t0 must be > 0");
  ProcedureResult r;
  r.procedure = std::move(name);
  r.lambda_n = lambda_n;
  r.beta_init = std::move(beta_init);
  IndexSet I = threshold_select(r.beta_init, t0);
  r.truncated = detail::truncate_model(I, r.beta_init, X.rows());
  Vector refit = ols(X, Y, I);
  r.beta_hat = refit;
  r.stages.push_back({t0, std::move(I), std::move(refit)});
  return r;
}

inline ProcedureResult thresholded_lasso(const Matrix& X, const Vector& Y, const LassoPath& path,
                                         double lambda_n, double t0) {
  if (!(lambda_n > 0.0)) throw InvalidArgument("thresholded_lasso: lambda_n must be > 0");
  return two_step(X, Y, lasso_at(path, lambda_n), lambda_n, t0, "thresholded_lasso");
}

inline ProcedureResult thresholded_lasso(const ProblemInstance& inst, double lambda_n, double t0) {
  if (!(lambda_n > 0.0)) throw InvalidArgument("thresholded_lasso: lambda_n must be > 0");
  const LassoPath path = lars_path(inst.X.matrix(), inst.Y);
  return thresholded_lasso(inst.X.matrix(), inst.Y, path, lambda_n, t0);
}

inline ProcedureResult gauss_dantzig(const Matrix& X, const Vector& Y, double lambda_n, double t0,
                                     const DantzigOptions& opt = {}) {
  if (!(lambda_n > 0.0)) throw InvalidArgument("gauss_dantzig: lambda_n must be > 0");
  DantzigSolution ds = dantzig_selector(X, Y, lambda_n, opt);
  ProcedureResult r = two_step(X, Y, std::move(ds.beta), lambda_n, t0, "gauss_dantzig");
  r.initial = "dantzig";
  return r;
}

inline ProcedureResult gauss_dantzig(const ProblemInstance& inst, double lambda_n, double t0,
                                     const DantzigOptions& opt = {}) {
  return gauss_dantzig(inst.X.matrix(), inst.Y, lambda_n, t0, opt);
}

// lambda_{p,tau} = (sqrt(1 + a) + 1/tau) sqrt(2 log p / n)
inline double lambda_p_tau(double a, double tau, Index p, Index n) {
  if (!(a >= 0.0) || !(tau > 0.0)) throw InvalidArgument("lambda_p_tau: need a >= 0, tau > 0");
  return (std::sqrt(1.0 + a) + 1.0 / tau) * universal_lambda(p, n);
}

// Gauss-Dantzig threshold: C4 lambda_{p,tau} sigma when C4 is known,
// otherwise `fallback` * lambda * sigma with lambda = sqrt(2 log p / n).
inline double gauss_dantzig_default_t0(double sigma, Index p, Index n, std::optional<double> c4,
                                       double a = 0.0, double tau = 1.0, double fallback = 1.0) {
  if (c4) return *c4 * lambda_p_tau(a, tau, p, n) * sigma;
  return fallback * universal_lambda(p, n) * sigma;
}

// Threshold rule of the success-probability experiment:
//   t0 = f_t sqrt(|S0|) lambda sigma,  S0 = {j : |beta_init,j| >= 0.5 lambda_n}.
inline double success_rule_t0(const Vector& beta_init, double lambda_n, double sigma, Index n,
                              double f_t) {
  const auto s0 = static_cast<double>(threshold_select(beta_init, 0.5 * lambda_n).size());
  return f_t * std::sqrt(s0) * universal_lambda(beta_init.size(), n) * sigma;
}

// Iterative multi-step procedure: screen at 4 lambda_n, then two rounds of
// threshold-and-refit with t_i = 4 lambda_n sqrt(|S_i|).
inline ProcedureResult iterative_multistep(const Matrix& X, const Vector& Y, Vector beta_init,
                                           double lambda_n, std::string initial = "lasso") {
  if (!(lambda_n > 0.0)) throw InvalidArgument("iterative_multistep: lambda_n must be > 0");
  ProcedureResult r;
  r.procedure = "iterative_multistep";
  r.initial = std::move(initial);
  r.lambda_n = lambda_n;
  r.beta_init = std::move(beta_init);
  const Index n = X.rows();

  const double screen = 4.0 * lambda_n;
  IndexSet S;
  for (Index j = 0; j < r.beta_init.size(); ++j) {
    if (std::abs(r.beta_init[j]) > screen) S.push_back(j);
  }
  r.truncated = detail::truncate_model(S, r.beta_init, n) || r.truncated;
  r.stages.push_back({screen, S, r.beta_init});

  Vector current = r.beta_init;
  for (int i = 0; i < 2; ++i) {
    const double t = 4.0 * lambda_n * std::sqrt(static_cast<double>(S.size()));
    IndexSet next;
    for (Index j : S) {
      if (std::abs(current[j]) >= t) next.push_back(j);
    }
    r.truncated = detail::truncate_model(next, current, n) || r.truncated;
    current = ols(X, Y, next);
    r.stages.push_back({t, next, current});
    S = std::move(next);
  }
  r.beta_hat = current;
  return r;
}

inline ProcedureResult iterative_multistep(const ProblemInstance& inst, double lambda_n) {
  if (!(lambda_n > 0.0)) throw InvalidArgument("iterative_multistep: lambda_n must be > 0");
  const LassoPath path = lars_path(inst.X.matrix(), inst.Y);
  return iterative_multistep(inst.X.matrix(), inst.Y, lasso_at(path, lambda_n), lambda_n);
}

// Weighted Lasso with penalty weights w_j = 1/|beta_init,j| on the columns
// where beta_init is nonzero. Knots are returned in original coordinates
// (length p, zero on removed columns).
inline LassoPath adaptive_lasso_path(const Matrix& X, const Vector& Y, const Vector& beta_init) {
  if (beta_init.size() != X.cols()) throw InvalidArgument("adaptive_lasso: beta_init length differs from p");
  const IndexSet keep = support_of(beta_init);
  if (keep.empty()) throw EmptyModel("adaptive_lasso: beta_init is identically zero");
  Matrix Xs(X.rows(), static_cast<Index>(keep.size()));
  Vector scale(static_cast<Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    scale[static_cast<Index>(k)] = std::abs(beta_init[keep[k]]);
    Xs.col(static_cast<Index>(k)) = X.col(keep[k]) * scale[static_cast<Index>(k)];
  }
  LassoPath reduced = lars_path(Xs, Y);
  LassoPath out;
  out.complete = reduced.complete;
  out.knots.reserve(reduced.knots.size());
  for (const Knot& kn : reduced.knots) {
    Knot full;
    full.lambda = kn.lambda;
    full.beta = scatter(Vector(kn.beta.cwiseProduct(scale)), keep, X.cols());
    for (Index a : kn.active) full.active.push_back(keep[static_cast<std::size_t>(a)]);
    out.knots.push_back(std::move(full));
  }
  return out;
}

inline std::vector<Vector> adaptive_lasso(const Matrix& X, const Vector& Y, const Vector& beta_init,
                                          const std::vector<double>& lambda_grid) {
  const LassoPath path = adaptive_lasso_path(X, Y, beta_init);
  std::vector<Vector> out;
  out.reserve(lambda_grid.size());
  for (double lam : lambda_grid) out.push_back(lasso_at(path, lam));
  return out;
}

enum class PathCriterion { min_l2_loss, best_support_match };

inline Vector optimal_path_estimate(const LassoPath& path, const GroundTruth& truth,
                                    PathCriterion criterion) {
  if (path.knots.empty()) throw InvalidArgument("optimal_path_estimate: empty path");
  std::size_t best = 0;
  double best_loss = std::numeric_limits<double>::infinity();
  Index best_score = std::numeric_limits<Index>::min();
  for (std::size_t k = 0; k < path.knots.size(); ++k) {
    const Vector& b = path.knots[k].beta;
    const double loss = ell2_loss(b, truth);
    if (criterion == PathCriterion::min_l2_loss) {
      if (loss < best_loss) {
        best_loss = loss;
        best = k;
      }
    } else {
      const Confusion c = confusion(b, truth);
      const Index score = c.tp - c.fp;
      if (score > best_score || (score == best_score && loss < best_loss)) {
        best_score = score;
        best_loss = loss;
        best = k;
      }
    }
  }
  return path.knots[best].beta;
}

}  // namespace tlasso
