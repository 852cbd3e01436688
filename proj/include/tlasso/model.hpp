#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <utility>

#include <tlasso/errors.hpp>
#include <tlasso/rng.hpp>
#include <tlasso/types.hpp>

namespace tlasso {

// Rescale every column of X to Euclidean norm sqrt(n). Zero columns are
// rejected since they cannot be normalized.
inline void normalize_columns(Matrix& X) {
  const double target = std::sqrt(static_cast<double>(X.rows()));
  for (Index j = 0; j < X.cols(); ++j) {
    const double norm = X.col(j).norm();
    if (!(norm > 0.0)) {
      throw InvalidArgument("normalize_columns: column " + std::to_string(j) +
                            " is zero");
    }
    X.col(j) *= target / norm;
  }
}

// n x p design. Columns are expected (not forced) to carry norm sqrt(n);
// use DesignMatrix::normalized() to establish that invariant.
class DesignMatrix {
 public:
  DesignMatrix() = default;
  explicit DesignMatrix(Matrix entries) : entries_(std::move(entries)) {
    if (entries_.rows() < 1 || entries_.cols() < 1) {
      throw InvalidArgument("DesignMatrix: need n >= 1 and p >= 1");
    }
  }

  static DesignMatrix normalized(Matrix entries) {
    normalize_columns(entries);
    return DesignMatrix(std::move(entries));
  }

  Index n() const noexcept { return entries_.rows(); }
  Index p() const noexcept { return entries_.cols(); }
  const Matrix& matrix() const noexcept { return entries_; }
  auto col(Index j) const { return entries_.col(j); }

  // Largest relative deviation of a column norm from sqrt(n).
  double normalization_error() const {
    const double target = std::sqrt(static_cast<double>(n()));
    double worst = 0.0;
    for (Index j = 0; j < p(); ++j) {
      worst = std::max(worst, std::abs(entries_.col(j).norm() - target) / target);
    }
    return worst;
  }

 private:
  Matrix entries_;
};

struct GroundTruth {
  Vector beta;
  IndexSet support;

  GroundTruth() = default;
  explicit GroundTruth(Vector b) : beta(std::move(b)), support(support_of(beta)) {}

  Index p() const noexcept { return beta.size(); }
  Index s() const noexcept { return static_cast<Index>(support.size()); }
  double beta_min() const {
    double m = std::numeric_limits<double>::infinity();
    for (Index j : support) m = std::min(m, std::abs(beta[j]));
    return support.empty() ? 0.0 : m;
  }
};

struct BetaScheme {
  enum class Kind { gaussian_mixture, constant, explicit_values };

  Kind kind = Kind::gaussian_mixture;
  double value = 0.9;     // constant(v): entries are +-v
  Vector values;          // explicit: assigned in ascending support order

  static BetaScheme gaussian_mixture() { return {}; }
  static BetaScheme constant(double v) {
    BetaScheme b;
    b.kind = Kind::constant;
    b.value = v;
    return b;
  }
  static BetaScheme explicit_values(Vector v) {
    BetaScheme b;
    b.kind = Kind::explicit_values;
    b.values = std::move(v);
    return b;
  }
};

inline std::string to_string(BetaScheme::Kind k) {
  switch (k) {
    case BetaScheme::Kind::gaussian_mixture: return "gaussian_mixture";
    case BetaScheme::Kind::constant: return "constant";
    case BetaScheme::Kind::explicit_values: return "explicit";
  }
  return "unknown";
}

// Uniform size-s subset of {0..p-1} by partial Fisher-Yates, returned sorted.
inline IndexSet sample_support(Index p, Index s, Rng& rng) {
  if (s < 0 || s > p) {
    throw InvalidArgument("sample_support: need 0 <= s <= p (s=" +
                          std::to_string(s) + ", p=" + std::to_string(p) + ")");
  }
  std::vector<Index> perm(static_cast<std::size_t>(p));
  std::iota(perm.begin(), perm.end(), Index{0});
  for (Index i = 0; i < s; ++i) {
    const auto j = i + static_cast<Index>(rng.below(static_cast<std::uint64_t>(p - i)));
    std::swap(perm[i], perm[j]);
  }
  IndexSet support(perm.begin(), perm.begin() + s);
  std::sort(support.begin(), support.end());
  return support;
}

// Draws beta with exactly s nonzeros on a uniformly random support.
//   gaussian_mixture: beta_i = mu_i (1 + |g_i|), mu_i = +-1, g_i ~ N(0,1)
//   constant(v):      beta_i = +-v
//   explicit:         beta_i = values[k] for the k-th support index
inline GroundTruth sample_beta(Index p, Index s, const BetaScheme& scheme, Rng& rng) {
  if (s > p) {
    throw InvalidArgument("sample_beta: s > p");
  }
  if (scheme.kind == BetaScheme::Kind::explicit_values && scheme.values.size() != s) {
    throw InvalidArgument("sample_beta: explicit scheme needs exactly s values");
  }
  const IndexSet support = sample_support(p, s, rng);
  Vector beta = Vector::Zero(p);
  for (std::size_t k = 0; k < support.size(); ++k) {
    double v = 0.0;
    switch (scheme.kind) {
      case BetaScheme::Kind::gaussian_mixture: {
        const double mu = rng.rademacher();
        v = mu * (1.0 + std::abs(rng.normal()));
        break;
      }
      case BetaScheme::Kind::constant:
        v = rng.rademacher() * scheme.value;
        break;
      case BetaScheme::Kind::explicit_values:
        v = scheme.values[static_cast<Index>(k)];
        break;
    }
    beta[support[k]] = v;
  }
  return GroundTruth(std::move(beta));
}

struct ProblemInstance {
  DesignMatrix X;
  GroundTruth truth;
  double sigma = 0.0;
  Vector Y;
  std::uint64_t seed = 0;

  Index n() const noexcept { return X.n(); }
  Index p() const noexcept { return X.p(); }

  // Realized noise; only available because the instance is synthetic.
  Vector noise() const { return Y - X.matrix() * truth.beta; }
};

// Y = X beta + eps, eps ~ N(0, sigma^2 I). The generator is seeded from
// `seed`, so the result is a pure function of its arguments.
inline ProblemInstance synthesize(DesignMatrix X, GroundTruth truth, double sigma,
                                  std::uint64_t seed) {
  if (X.p() != truth.p()) {
    throw InvalidArgument("synthesize: X has " + std::to_string(X.p()) +
                          " columns but beta has length " + std::to_string(truth.p()));
  }
  if (!(sigma >= 0.0)) {
    throw InvalidArgument("synthesize: sigma must be >= 0");
  }
  Rng rng(seed);
  Vector Y = X.matrix() * truth.beta;
  if (sigma > 0.0) {
    for (Index i = 0; i < Y.size(); ++i) Y[i] += sigma * rng.normal();
  }
  return ProblemInstance{std::move(X), std::move(truth), sigma, std::move(Y), seed};
}

inline double snr(const GroundTruth& truth, double sigma) {
  if (!(sigma > 0.0)) {
    throw InvalidArgument("snr: sigma must be > 0");
  }
  return truth.beta.squaredNorm() / (sigma * sigma);
}

// lambda = sqrt(2 log p / n), the universal noise scale used by every rule.
inline double universal_lambda(Index p, Index n) {
  return std::sqrt(2.0 * std::log(static_cast<double>(p)) / static_cast<double>(n));
}

// Noise-correlation level sigma sqrt(1+a) sqrt(2 log p / n).
inline double lambda_sigma_a_p(double sigma, double a, Index p, Index n) {
  return sigma * std::sqrt(1.0 + a) * universal_lambda(p, n);
}

}  // namespace tlasso
