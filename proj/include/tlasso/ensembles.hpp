#pragma once

#include <cmath>
#include <string>

#include <tlasso/errors.hpp>
#include <tlasso/model.hpp>
#include <tlasso/rng.hpp>
#include <tlasso/types.hpp>

namespace tlasso {

struct EnsembleSpec {
  enum class Kind { gaussian_iid, toeplitz, bernoulli };

  Kind kind = Kind::gaussian_iid;
  Index n = 1;
  Index p = 1;
  double gamma = 0.5;  // toeplitz only, 0 < gamma < 1

  static EnsembleSpec gaussian(Index n, Index p) { return {Kind::gaussian_iid, n, p, 0.5}; }
  static EnsembleSpec toeplitz_of(Index n, Index p, double gamma) {
    return {Kind::toeplitz, n, p, gamma};
  }
  static EnsembleSpec bernoulli(Index n, Index p) { return {Kind::bernoulli, n, p, 0.5}; }
};

inline std::string to_string(EnsembleSpec::Kind k) {
  switch (k) {
    case EnsembleSpec::Kind::gaussian_iid: return "gaussian_iid";
    case EnsembleSpec::Kind::toeplitz: return "toeplitz";
    case EnsembleSpec::Kind::bernoulli: return "bernoulli";
  }
  return "unknown";
}

inline EnsembleSpec::Kind ensemble_kind_from_string(const std::string& s) {
  if (s == "gaussian_iid" || s == "gaussian") return EnsembleSpec::Kind::gaussian_iid;
  if (s == "toeplitz") return EnsembleSpec::Kind::toeplitz;
  if (s == "bernoulli") return EnsembleSpec::Kind::bernoulli;
  throw InvalidArgument("unknown ensemble kind '" + s + "'");
}

// T(gamma)_{ij} = gamma^{|i-j|}
inline Matrix toeplitz_covariance(double gamma, Index p) {
  Matrix T(p, p);
  for (Index i = 0; i < p; ++i) {
    for (Index j = 0; j < p; ++j) {
      T(i, j) = std::pow(gamma, static_cast<double>(std::abs(i - j)));
    }
  }
  return T;
}

// Lower-triangular L with L L^T = T(gamma).
inline Matrix toeplitz_cholesky(double gamma, Index p) {
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw InvalidArgument("toeplitz_cholesky: gamma must lie in (0, 1)");
  }
  Eigen::LLT<Matrix> llt(toeplitz_covariance(gamma, p));
  if (llt.info() != Eigen::Success) {
    throw InternalError("toeplitz_cholesky: T(gamma) not positive definite");
  }
  return llt.matrixL();
}

namespace detail {

// Entries before column normalization; exposed for covariance checks.
inline Matrix raw_ensemble(const EnsembleSpec& spec, Rng& rng) {
  if (spec.n < 1 || spec.p < 1) {
    throw InvalidArgument("ensemble: need n >= 1 and p >= 1");
  }
  Matrix X(spec.n, spec.p);
  switch (spec.kind) {
    case EnsembleSpec::Kind::gaussian_iid:
      // Row-major fill so the stream order does not depend on storage order.
      for (Index i = 0; i < spec.n; ++i)
        for (Index j = 0; j < spec.p; ++j) X(i, j) = rng.normal();
      break;
    case EnsembleSpec::Kind::toeplitz: {
      const Matrix L = toeplitz_cholesky(spec.gamma, spec.p);
      Vector g(spec.p);
      for (Index i = 0; i < spec.n; ++i) {
        for (Index j = 0; j < spec.p; ++j) g[j] = rng.normal();
        X.row(i) = (L.triangularView<Eigen::Lower>() * g).transpose();
      }
      break;
    }
    case EnsembleSpec::Kind::bernoulli:
      for (Index i = 0; i < spec.n; ++i)
        for (Index j = 0; j < spec.p; ++j) X(i, j) = rng.rademacher();
      break;
  }
  return X;
}

}  // namespace detail

inline DesignMatrix generate(const EnsembleSpec& spec, Rng& rng) {
  if (spec.kind == EnsembleSpec::Kind::toeplitz && !(spec.gamma > 0.0 && spec.gamma < 1.0)) {
    throw InvalidArgument("toeplitz ensemble: gamma must lie in (0, 1)");
  }
  Matrix X = detail::raw_ensemble(spec, rng);
  if (spec.kind == EnsembleSpec::Kind::bernoulli) {
    // +-1 entries already have column norm sqrt(n) exactly.
    return DesignMatrix(std::move(X));
  }
  return DesignMatrix::normalized(std::move(X));
}

inline DesignMatrix generate(const EnsembleSpec& spec, std::uint64_t seed) {
  Rng rng(seed);
  return generate(spec, rng);
}

}  // namespace tlasso
