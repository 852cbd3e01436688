#include <cmath>

#include <gtest/gtest.h>

#include <tlasso/analysis.hpp>
#include <tlasso/io.hpp>

#include "../support/oracles.hpp"

namespace tl = tlasso;
using tl::testing::random_instance;

TEST(SparseEigs, MatchesDirectEigensolve) {
  const tl::DesignMatrix X = tl::generate(tl::EnsembleSpec::gaussian(8, 8), 12);
  for (tl::Index m = 1; m <= 4; ++m) {
    const auto got = tl::sparse_eigs(X.matrix(), m);
    const auto [lo, hi] = tl::testing::brute_sparse_eigs(X.matrix(), m);
    EXPECT_TRUE(got.exact);
    EXPECT_NEAR(got.lambda_min, lo, 1e-12);
    EXPECT_NEAR(got.lambda_max, hi, 1e-12);
  }
}

TEST(SparseEigs, SampledEstimatesAreOneSided) {
  const tl::DesignMatrix X = tl::generate(tl::EnsembleSpec::gaussian(12, 10), 4);
  const auto exact = tl::sparse_eigs(X.matrix(), 3);
  const auto est = tl::sparse_eigs(X.matrix(), 3, tl::EnumerationMode::sampled(50, 9));
  EXPECT_FALSE(est.exact);
  EXPECT_GE(est.lambda_min, exact.lambda_min - 1e-12);
  EXPECT_LE(est.lambda_max, exact.lambda_max + 1e-12);
}

TEST(SparseEigs, BudgetEnforced) {
  const tl::DesignMatrix X = tl::generate(tl::EnsembleSpec::gaussian(20, 30), 4);
  EXPECT_THROW(tl::sparse_eigs(X.matrix(), 10, tl::EnumerationMode::exact_mode(1000)), tl::BudgetExceeded);
  EXPECT_THROW(tl::incoherence_report(X.matrix(), 1, 1e4), tl::BudgetExceeded);
}

TEST(Incoherence, DeltaAndThetaMatchEnumeration) {
  const tl::DesignMatrix X = tl::generate(tl::EnsembleSpec::gaussian(8, 8), 3);
  EXPECT_NEAR(tl::delta_s(X.matrix(), 2), tl::testing::brute_delta(X.matrix(), 2), 1e-12);
  EXPECT_NEAR(tl::theta(X.matrix(), 2, 2), tl::testing::brute_theta(X.matrix(), 2, 2), 1e-12);
  EXPECT_NEAR(tl::theta(X.matrix(), 1, 3), tl::testing::brute_theta(X.matrix(), 1, 3), 1e-12);

  const auto rep = tl::incoherence_report(X.matrix(), 1);
  for (tl::Index a = 1; a <= 4; ++a) {
    EXPECT_NEAR(rep.delta_s(a), tl::testing::brute_delta(X.matrix(), a), 1e-12);
    for (tl::Index b = 1; a + b <= 8; ++b) {
      EXPECT_NEAR(rep.theta(a, b), tl::testing::brute_theta(X.matrix(), a, b), 1e-12) << a << "," << b;
    }
  }
}

TEST(Incoherence, SandwichParallelogramAndMonotonicity) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const tl::Index p = 4 + static_cast<tl::Index>(seed % 5);
    const tl::DesignMatrix X = tl::generate(tl::EnsembleSpec::gaussian(3 + seed % 8, p), seed);
    const auto r = tl::incoherence_report(X.matrix(), 1);
    for (tl::Index k = 1; k <= p; ++k) {
      EXPECT_LE(1.0 - r.delta_s(k), r.lambda_min(k) + 1e-12);
      EXPECT_LE(r.lambda_min(k), r.lambda_max(k) + 1e-12);
      EXPECT_LE(r.lambda_max(k), 1.0 + r.delta_s(k) + 1e-12);
      if (k > 1) EXPECT_GE(r.delta_s(k), r.delta_s(k - 1));
      for (tl::Index b = 1; k + b <= p; ++b) {
        EXPECT_LE(r.theta(k, b), 0.5 * (r.lambda_max(k + b) - r.lambda_min(k + b)) + 1e-12);
        EXPECT_GE(r.theta(k, b), r.theta(k - 1, b));
        EXPECT_GE(r.theta(k, b), r.theta(k, b - 1));
      }
    }
    // Sizes beyond p refer to subsets that do not exist.
    EXPECT_EQ(r.lambda_min(p + 3), r.lambda_min(p));
    EXPECT_EQ(r.lambda_min(0), std::numeric_limits<double>::infinity());
    EXPECT_EQ(r.lambda_max(0), 0.0);
  }
}

TEST(RestrictedEigenvalue, UpperBoundDominatesSampledEstimate) {
  const tl::DesignMatrix X = tl::generate(tl::EnsembleSpec::gaussian(400, 8), 5);
  const auto r = tl::incoherence_report(X.matrix(), 1);
  for (double k0 : {1.0, 2.0}) {
    const auto K = r.re_upper(1, k0);
    ASSERT_TRUE(K.has_value());
    EXPECT_GE(*K, tl::re_constant_lower_estimate(X.matrix(), 1, k0, 4000, 17));
  }
  EXPECT_FALSE(tl::re_constant_upper(0.5, 0.6, 1.0).has_value());
  EXPECT_NEAR(*tl::re_constant_upper(1.0, 0.0, 1.0), 1.0, 1e-15);
}

TEST(OracleQuantities, SparsityCountIsMinimal) {
  tl::Rng rng(3);
  for (int r = 0; r < 2000; ++r) {
    const tl::Index p = 20;
    tl::Vector b = tl::Vector::Zero(p);
    for (tl::Index j = 0; j < p; ++j)
      if (rng.uniform01() < 0.4) b[j] = rng.normal() * (rng.uniform01() < 0.5 ? 0.1 : 2.0);
    const tl::GroundTruth t(b);
    const double sigma = 0.5 + rng.uniform01();
    const auto q = tl::oracle_quantities(t, p, 30, sigma, 0.0);
    const double ls2 = std::pow(q.lambda * sigma, 2);
    double acc = 0.0;
    for (tl::Index j = 0; j < p; ++j) acc += std::min(b[j] * b[j], ls2);
    EXPECT_LE(acc, q.s0 * ls2 * (1 + 1e-9));
    if (q.s0 >= 1) EXPECT_GT(acc, (q.s0 - 1) * ls2);
    EXPECT_LE(q.s0 * ls2, ls2 + acc + 1e-12);
    // Coefficients outside the s0 largest sit below lambda sigma.
    for (tl::Index j : tl::complement(q.T0, p)) EXPECT_LT(std::abs(b[j]), q.lambda * sigma + 1e-12);
    EXPECT_LE(q.a0, q.s0);
  }
}

TEST(OracleQuantities, CountingBoundHolds) {
  tl::Rng rng(4);
  for (int r = 0; r < 10000; ++r) {
    tl::Vector b = tl::Vector::Zero(15);
    for (tl::Index j = 0; j < 15; ++j)
      if (rng.uniform01() < 0.5) b[j] = rng.normal() * std::exp(2.0 * rng.normal());
    const double c_prime = r % 2 ? 1.0 : 0.5 + 2.0 * rng.uniform01() + 1e-3;
    ASSERT_TRUE(tl::counting_bound_check(tl::GroundTruth(b), 15, 25, 1.0, c_prime)) << r;
  }
  EXPECT_THROW(tl::counting_bound_check(tl::GroundTruth(tl::Vector::Ones(3)), 3, 5, 1.0, 0.5),
               tl::InvalidArgument);
}

TEST(IdealMse, OrthogonalDesignHandEnumeration) {
  const tl::Matrix X = std::sqrt(6.0) * tl::Matrix::Identity(6, 6);
  tl::Vector b(6);
  b << 2.0, -0.5, 0.2, 0.05, 0.0, 1.0;
  const tl::GroundTruth t(b);
  const double sigma = 0.6;
  for (tl::Index s = 1; s <= 6; ++s) {
    // Orthogonal design: E||b_I - b||^2 = sum_{j not in I} b_j^2 + |I| sigma^2 / n.
    double best = std::numeric_limits<double>::infinity();
    for (std::uint64_t mask = 0; mask < 64; ++mask) {
      const tl::IndexSet I = tl::testing::mask_to_set(mask, 6);
      if (static_cast<tl::Index>(I.size()) > s) continue;
      double v = static_cast<double>(I.size()) * sigma * sigma / 6.0;
      for (tl::Index j : tl::complement(I, 6)) v += b[j] * b[j];
      best = std::min(best, v);
    }
    const auto got = tl::ideal_estimator_mse(X, t, sigma, s);
    EXPECT_NEAR(got.mse, best, 1e-12) << s;
    EXPECT_GE(got.mse, got.lower_bound - 1e-12);
  }
}

TEST(IdealMse, LowerBoundAndMonteCarlo) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto inst = random_instance(12, 7, 3, 0.8, seed);
    const auto r = tl::ideal_estimator_mse(inst.X.matrix(), inst.truth, 0.8, 3, seed == 0 ? 4000 : 0);
    EXPECT_GE(r.mse, r.lower_bound);
    EXPECT_EQ(r.mse, tl::ols_risk(inst.X.matrix(), inst.truth, r.best, 0.8));
    if (seed == 0) EXPECT_NEAR(r.monte_carlo, r.mse, 0.1 * r.mse);
  }
}

TEST(Constants, DantzigConstantsAtZeroIncoherence) {
  const auto c = tl::ds_constants(0.0, 0.0, 0.0, 1.0, 2.0);
  const double C0 = 4.0 * std::sqrt(2.0) + 1.0 + 1.0 / std::sqrt(2.0);
  EXPECT_NEAR(c.C0, C0, 1e-12);
  EXPECT_NEAR(c.C0p, C0, 1e-12);
  EXPECT_NEAR(c.C1, C0 + 1.0, 1e-12);
  EXPECT_NEAR(c.C2, 2.0 * C0 + 1.0, 1e-12);

  const auto d = tl::ds_constants(0.0, 0.0, 0.0, 1.0, c.C1);
  // C3^2 = 3 (sqrt(1+a) + 1/tau)^2 ((C0' + C4)^2 + 1) + 4 (1+a) / Lmin(2 s0)^2
  const double c3sq = 3.0 * 4.0 * (std::pow(C0 + C0 + 1.0, 2) + 1.0) + 4.0;
  EXPECT_NEAR(d.C3 * d.C3, c3sq, 1e-9);
  EXPECT_THROW(tl::ds_constants(0.6, 0.5, 0, 1, 1), tl::InvalidRegime);
}

TEST(Constants, LassoOracleConstants) {
  const auto c = tl::lasso_oracle_constants(1.0, 1.0, 1.0, 0.0, 2.0);
  EXPECT_NEAR(c.D1, 10.0, 1e-12);
  double prev0 = 0.0, prev1 = 0.0;
  for (double K = 0.5; K < 5.0; K += 0.25) {
    const auto e = tl::lasso_oracle_constants(K, 1.3, 0.7, 0.2, 2.5);
    EXPECT_GE(e.D0, prev0);
    EXPECT_GE(e.D1, prev1);
    prev0 = e.D0;
    prev1 = e.D1;
  }
}

TEST(TheoremAudit, NeedsExactReport) {
  const auto inst = random_instance(8, 6, 2, 0.5, 1);
  const auto res = tl::thresholded_lasso(inst, 0.2, 0.3);
  auto rep = tl::incoherence_report(inst.X.matrix(), 1);
  rep.enumerated = false;
  EXPECT_THROW(tl::check_theorem_bounds(inst, res, rep, 0.0), tl::PrecisionError);
}

TEST(TheoremAudit, NoFailuresOnSmallInstances) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const tl::Index p = 5 + static_cast<tl::Index>(seed % 3);
    const auto inst = random_instance(10, p, 2, 0.3, 2000 + seed, tl::BetaScheme::constant(2.0));
    const auto rep = tl::incoherence_report(inst.X.matrix(), 1);
    const double lam = tl::universal_lambda(p, 10) * inst.sigma;
    for (const auto& res : {tl::thresholded_lasso(inst, 0.69 * lam, lam),
                            tl::iterative_multistep(inst, 0.69 * lam)}) {
      const auto chk = tl::check_theorem_bounds(inst, res, rep, 0.0);
      for (const auto& c : chk.clauses)
        EXPECT_NE(c.status, tl::ClauseStatus::fail) << res.procedure << " " << c.name << " " << c.lhs << " > " << c.rhs;
      ASSERT_NE(chk.find("ols_missing_variables"), nullptr);
      const auto js = tl::to_json(chk);
      EXPECT_TRUE(js.contains("clauses"));
    }
  }
}
