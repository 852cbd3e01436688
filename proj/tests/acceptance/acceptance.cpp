// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails. Pass criterion numbers as arguments to run
// a subset, e.g. `tlasso_acceptance 1 2 3`.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <tlasso/harness/experiments.hpp>
#include <tlasso/tlasso.hpp>

#include "../support/oracles.hpp"

namespace tl = tlasso;
namespace h = tlasso::harness;
using tl::testing::random_instance;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

template <class... A>
std::string fmtn(const char* f, A... a) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

tl::Vector soft(const tl::Vector& z, double lam) {
  tl::Vector out(z.size());
  for (tl::Index j = 0; j < z.size(); ++j) out[j] = tl::soft_threshold(z[j], lam);
  return out;
}

const h::SummaryRow* find_row(const std::vector<h::SummaryRow>& rows, const std::string& est, tl::Index n,
                              tl::Index s) {
  for (const auto& r : rows)
    if (r.estimator == est && r.n == n && r.s == s) return &r;
  return nullptr;
}

// 1. LARS and coordinate descent are KKT-exact and agree.
Outcome solver_correctness() {
  const auto start = std::chrono::steady_clock::now();
  double worst_knot = 0.0, worst_cd = 0.0, worst_gap = 0.0;
  const double tol = 1e-10;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto inst = random_instance(40, 100, 5, 1.0, 10000 + seed);
    const tl::LassoPath path = tl::lars_path(inst.X.matrix(), inst.Y);
    for (const auto& k : path.knots)
      if (k.lambda > 0.0) worst_knot = std::max(worst_knot, tl::kkt_residual(inst.X.matrix(), inst.Y, k.beta, k.lambda));
    const double lam = 0.69 * tl::universal_lambda(100, 40) * 1.0;
    const tl::Vector cd = tl::cd_lasso(inst.X.matrix(), inst.Y, lam, tol);
    worst_cd = std::max(worst_cd, tl::kkt_residual(inst.X.matrix(), inst.Y, cd, lam));
    worst_gap = std::max(worst_gap, (cd - tl::lasso_at(path, lam)).cwiseAbs().maxCoeff());
  }
  const double secs = seconds_since(start);
  return {worst_knot <= 1e-8 && worst_cd <= 10 * tol && worst_gap <= 1e-6 && secs < 30,
          fmtn("max knot KKT %.2e, max CD KKT %.2e, max gap %.2e, %.1fs", worst_knot, worst_cd, worst_gap, secs)};
}

// 2. Orthogonal design: lasso path and Dantzig selector are soft-thresholding.
Outcome orthogonal_closed_forms() {
  const auto start = std::chrono::steady_clock::now();
  const tl::Index n = 32;
  const tl::DesignMatrix X(std::sqrt(static_cast<double>(n)) * tl::Matrix::Identity(n, n));
  tl::Rng rng(2);
  tl::GroundTruth t = tl::sample_beta(n, 8, tl::BetaScheme::gaussian_mixture(), rng);
  const auto inst = tl::synthesize(X, std::move(t), 1.0, rng.next_u64());
  const tl::Vector z = X.matrix().transpose() * inst.Y / static_cast<double>(n);
  const tl::LassoPath path = tl::lars_path(X.matrix(), inst.Y);
  double worst_path = 0.0, worst_ds = 0.0;
  for (double f : {0.9, 0.6, 0.4, 0.2, 0.1, 0.05}) {
    const double lam = f * path.lambda_max();
    worst_path = std::max(worst_path, (tl::lasso_at(path, lam) - soft(z, lam)).cwiseAbs().maxCoeff());
    worst_ds = std::max(worst_ds, (tl::dantzig_selector(X.matrix(), inst.Y, lam).beta - soft(z, lam)).cwiseAbs().maxCoeff());
  }
  for (const auto& k : path.knots)
    worst_path = std::max(worst_path, (k.beta - soft(z, k.lambda)).cwiseAbs().maxCoeff());
  const double secs = seconds_since(start);
  return {worst_path <= 1e-7 && worst_ds <= 1e-7 && secs < 1,
          fmtn("path err %.2e, Dantzig err %.2e, %.2fs", worst_path, worst_ds, secs)};
}

// 3. Dantzig LP against brute-force vertex enumeration.
Outcome dantzig_lp_oracle() {
  const auto start = std::chrono::steady_clock::now();
  tl::Rng pick(3);
  double worst_obj = 0.0, worst_gap = 0.0;
  for (int r = 0; r < 20; ++r) {
    const tl::Index p = 2 + static_cast<tl::Index>(pick.below(5));
    const tl::Index n = 2 + static_cast<tl::Index>(pick.below(5));
    const auto inst = random_instance(n, p, std::min<tl::Index>(2, p), 0.5, 20000 + r);
    const double lam = 0.05 + 0.3 * pick.uniform01();
    const auto ds = tl::dantzig_selector(inst.X.matrix(), inst.Y, lam);
    const auto oracle = tl::testing::lp_vertex_oracle(inst.X.matrix(), inst.Y, lam);
    worst_obj = std::max(worst_obj, std::abs(ds.beta.lpNorm<1>() - oracle.objective));
    worst_gap = std::max(worst_gap, tl::ds_feasibility(inst.X.matrix(), inst.Y, ds.beta, lam));
  }
  const double secs = seconds_since(start);
  return {worst_obj <= 1e-7 && worst_gap <= 1e-7 && secs < 10,
          fmtn("max objective diff %.2e, max feasibility gap %.2e, %.2fs", worst_obj, worst_gap, secs)};
}

// 4. rho^2 histograms at high and low SNR.
Outcome rho_histograms() {
  const auto start = std::chrono::steady_clock::now();
  h::ExperimentConfig c = h::preset(h::Experiment::rho_hist, "paper");
  c.reps = 500;
  auto medians = [](const h::ExperimentConfig& cfg) {
    const auto rows = h::summarize(h::run_experiment(cfg));
    return std::make_pair(find_row(rows, h::est::thresholded_lasso, 72, 8)->median_rho2,
                          find_row(rows, h::est::lasso_optimal, 72, 8)->median_rho2);
  };
  const auto [hi_t, hi_l] = medians(c);
  c.sigma_rule = {h::SigmaRule::Kind::sqrt_s, 1.0};
  c.t0_grid = {0.36};
  const auto [lo_t, lo_l] = medians(c);
  const double secs = seconds_since(start);
  const bool ok = hi_t >= 0.5 && hi_t <= 2.5 && hi_l >= 15 && hi_l <= 120 && lo_t >= 3 && lo_t <= 12 &&
                  lo_l >= 5 && lo_l <= 20 && lo_t <= lo_l && secs < 600;
  return {ok, fmtn("high SNR medians: thresholded %.3f (in [0.5,2.5]), lasso %.3f (in [15,120]); "
                   "low SNR: thresholded %.3f (in [3,12]), lasso %.3f (in [5,20]); %.1fs",
                   hi_t, hi_l, lo_t, lo_l, secs)};
}

// 5. Mean rho^2 across sparsity levels, desk-scale.
Outcome sparsity_trend() {
  const auto start = std::chrono::steady_clock::now();
  const h::ExperimentConfig c = h::preset(h::Experiment::sparsity_table, "small");
  const auto rows = h::summarize(h::run_experiment(c));
  bool ok = true;
  std::string detail;
  for (tl::Index s : c.s_grid) {
    const double a = find_row(rows, h::est::thresholded_lasso, c.n_grid[0], s)->mean_rho2;
    const double b = find_row(rows, h::est::lasso_optimal, c.n_grid[0], s)->mean_rho2;
    ok = ok && a < b / 3.0;
    detail += fmtn("s=%d: %.3f vs %.3f; ", static_cast<int>(s), a, b);
  }
  const double secs = seconds_since(start);
  return {ok && secs < 900, detail + fmt("%.1fs", secs)};
}

// 6. Per-realization monotonicity of FP and FN along the threshold sweep.
Outcome threshold_monotonicity() {
  std::size_t violations = 0, sequences = 0;
  for (int variant = 0; variant < 3; ++variant) {
    h::ExperimentConfig c = h::preset(h::Experiment::type12_sweep, "paper");
    c.reps = 200;
    if (variant == 1) c.sigma_rule = {h::SigmaRule::Kind::sqrt_s, 1.0};
    if (variant == 2) c.ensemble = tl::EnsembleSpec::Kind::toeplitz;
    const auto rs = h::run_experiment(c);
    std::map<std::size_t, std::vector<const h::Record*>> by_rep;
    for (const auto& r : rs)
      if (r.ok() && r.estimator == h::est::thresholded_lasso) by_rep[r.replication].push_back(&r);
    for (auto& [rep, seq] : by_rep) {
      std::sort(seq.begin(), seq.end(), [](auto* a, auto* b) { return a->sweep < b->sweep; });
      ++sequences;
      for (std::size_t k = 1; k < seq.size(); ++k)
        if (seq[k]->fp > seq[k - 1]->fp || seq[k]->fn < seq[k - 1]->fn) ++violations;
    }
  }
  return {violations == 0 && sequences == 600,
          fmtn("%zu violations over %zu realizations (iid high/low SNR, Toeplitz)", violations, sequences)};
}

// 7. Success probability transition in n.
Outcome success_transition() {
  const auto start = std::chrono::steady_clock::now();
  const h::ExperimentConfig c = h::preset(h::Experiment::success_prob, "paper");
  const auto rows = h::summarize(h::run_experiment(c));
  const tl::Index s = c.s_grid[0];
  std::vector<double> rate, base;
  std::vector<tl::Index> ns;
  for (tl::Index n : h::success_n_grid(c.p, s)) {
    ns.push_back(n);
    rate.push_back(find_row(rows, h::est::thresholded_lasso, n, s)->success_rate);
    base.push_back(find_row(rows, h::est::lasso_optimal, n, s)->success_rate);
  }
  const auto fit = tl::isotonic_fit(rate);
  double resid = 0.0;
  for (std::size_t i = 0; i < rate.size(); ++i) resid = std::max(resid, std::abs(rate[i] - fit[i]));
  const double limit = 6.0 * static_cast<double>(s) * std::log(static_cast<double>(c.p) / static_cast<double>(s));
  tl::Index hit = -1;
  for (std::size_t i = 0; i < ns.size() && hit < 0; ++i)
    if (static_cast<double>(ns[i]) <= limit && rate[i] >= 0.9 && base[i] <= rate[i] - 0.15) hit = ns[i];
  std::string curve;
  for (std::size_t i = 0; i < ns.size(); ++i) curve += fmtn("%d:%.2f/%.2f ", static_cast<int>(ns[i]), rate[i], base[i]);
  const double secs = seconds_since(start);
  return {resid < 0.1 && hit > 0 && secs < 900,
          fmtn("isotonic residual %.3f, first qualifying n = %d (limit %.0f); n:thresholded/lasso ",
               resid, static_cast<int>(hit), limit) + curve + fmt("; %.1fs", secs)};
}

// 8. ROC dominance at high SNR.
Outcome roc_dominance() {
  const auto start = std::chrono::steady_clock::now();
  const h::ExperimentConfig c = h::preset(h::Experiment::roc, "paper");
  const auto rows = h::summarize(h::run_experiment(c));
  const auto thr = h::roc_curve(rows, h::est::thresholded_lasso);
  bool ok = true;
  std::string detail;
  for (const std::string other : {h::est::lasso, h::est::adaptive_lasso}) {
    const auto cur = h::roc_curve(rows, other);
    const double lo = std::max({0.01, thr.front().first, cur.front().first});
    const double hi = std::min({0.2, thr.back().first, cur.back().first});
    double worst = std::numeric_limits<double>::infinity();
    double at = std::nan("");
    int points = 0;
    if (lo <= hi) {
      for (int k = 0; k <= 200; ++k) {
        const double f = lo + (hi - lo) * k / 200.0;
        const auto a = h::interpolate_tpr(thr, f);
        const auto b = h::interpolate_tpr(cur, f);
        if (!a || !b) continue;
        ++points;
        if (*a - *b < worst) {
          worst = *a - *b;
          at = f;
        }
      }
    }
    ok = ok && points > 0 && worst >= -0.02;
    detail += fmtn("vs %s: min TPR margin %.4f at FPR %.4f over [%.4f, %.4f]; ", other.c_str(), worst, at, lo, hi);
  }
  const double secs = seconds_since(start);
  return {ok && secs < 1800, detail + fmt("%.1fs", secs)};
}

// 9. Exhaustive theory audit on tiny instances.
Outcome theory_audit() {
  const auto start = std::chrono::steady_clock::now();
  std::map<std::string, std::size_t> fails, passes;
  auto record = [&](const std::string& name, bool ok) { (ok ? passes : fails)[name]++; };
  tl::Rng pick(9);
  for (int r = 0; r < 200; ++r) {
    const tl::Index p = 4 + static_cast<tl::Index>(pick.below(5));   // 4..8
    const tl::Index n = 4 + static_cast<tl::Index>(pick.below(7));   // 4..10
    const std::uint64_t seed = 30000 + static_cast<std::uint64_t>(r);
    tl::Rng drng(seed);
    tl::Matrix raw = tl::detail::raw_ensemble(tl::EnsembleSpec::gaussian(n, p), drng);
    if (r % 2 == 1 && n >= p) {
      // Nearly orthogonal columns.
      const tl::Matrix Q = Eigen::HouseholderQR<tl::Matrix>(raw).householderQ() * tl::Matrix::Identity(n, p);
      raw = Q + 0.05 * raw / std::sqrt(static_cast<double>(n));
    }
    const tl::DesignMatrix X = tl::DesignMatrix::normalized(raw);
    tl::Rng rng(seed + 1);
    const tl::Index s = 1 + static_cast<tl::Index>(pick.below(static_cast<std::uint64_t>(std::min<tl::Index>(3, p))));
    const double mag = r % 3 == 0 ? 0.9 : (r % 3 == 1 ? 3.0 : 12.0);
    const tl::BetaScheme scheme = r % 4 == 0 ? tl::BetaScheme::gaussian_mixture() : tl::BetaScheme::constant(mag);
    tl::GroundTruth truth = tl::sample_beta(p, s, scheme, rng);
    const double sigma = r % 5 == 0 ? 1.0 : (r % 5 < 3 ? 0.25 : 0.05);
    const auto inst = tl::synthesize(X, std::move(truth), sigma, rng.next_u64());

    const auto rep = tl::incoherence_report(X.matrix(), 1);
    bool sandwich = true, parallel = true;
    for (tl::Index k = 1; k <= p; ++k) {
      sandwich = sandwich && 1.0 - rep.delta_s(k) <= rep.lambda_min(k) + 1e-12 &&
                 rep.lambda_max(k) <= 1.0 + rep.delta_s(k) + 1e-12;
      for (tl::Index b = 1; k + b <= p; ++b)
        parallel = parallel && rep.theta(k, b) <= 0.5 * (rep.lambda_max(k + b) - rep.lambda_min(k + b)) + 1e-12;
    }
    record("sandwich", sandwich);
    record("parallelogram_theta", parallel);

    try {
      const auto ideal = tl::ideal_estimator_mse(X.matrix(), inst.truth, sigma, s);
      record("ideal_mse_lower_bound", ideal.mse >= ideal.lower_bound * (1 - 1e-9));
    } catch (const tl::InternalError&) {
      record("ideal_mse_lower_bound", false);
    }
    record("counting_bound", tl::counting_bound_check(inst.truth, p, n, sigma, 1.0) &&
                                 tl::counting_bound_check(inst.truth, p, n, sigma, 1.5));

    // Small, default and large penalties; the oracle clauses need lambda_n >= 2 lambda sigma.
    const double lam = tl::universal_lambda(p, n) * sigma;
    const double ln = lam * (r % 3 == 0 ? 0.69 : (r % 3 == 1 ? 1.0 : 2.0));
    std::vector<tl::ProcedureResult> results;
    try {
      const tl::LassoPath path = tl::lars_path(X.matrix(), inst.Y);
      results.push_back(tl::thresholded_lasso(X.matrix(), inst.Y, path, ln, lam));
      results.push_back(tl::iterative_multistep(X.matrix(), inst.Y, tl::lasso_at(path, ln), ln));
      results.push_back(tl::gauss_dantzig(X.matrix(), inst.Y, ln, lam));
      const tl::Vector ds = tl::dantzig_selector(X.matrix(), inst.Y, ln).beta;
      results.push_back(tl::iterative_multistep(X.matrix(), inst.Y, ds, ln, "dantzig"));
    } catch (const tl::RankDeficiency&) {
      // Refit on a rank-deficient model: nothing to audit for this draw.
    } catch (const tl::DegenerateDesign&) {
    }
    for (const auto& res : results) {
      const auto chk = tl::check_theorem_bounds(inst, res, rep, 0.0);
      for (const auto& cl : chk.clauses)
        if (cl.status != tl::ClauseStatus::not_applicable) record(cl.name, cl.status == tl::ClauseStatus::pass);
    }
  }
  std::size_t total_fail = 0;
  std::string detail;
  for (const auto& [name, k] : passes) detail += fmtn("%s %zu", name.c_str(), k) + (fails.count(name) ? fmtn("/%zu failed", fails[name]) : "") + "; ";
  for (const auto& [name, k] : fails) {
    total_fail += k;
    if (!passes.count(name)) detail += fmtn("%s 0/%zu failed; ", name.c_str(), k);
  }
  const double secs = seconds_since(start);
  return {total_fail == 0 && secs < 300, fmtn("%zu violations; evaluated: ", total_fail) + detail + fmt("%.1fs", secs)};
}

// 10. Byte-identical output for repeated runs.
Outcome determinism() {
  std::size_t mismatches = 0, runs = 0;
  for (auto e : {h::Experiment::type12_sweep, h::Experiment::rho_hist, h::Experiment::sparsity_table,
                 h::Experiment::success_prob, h::Experiment::roc, h::Experiment::illustrative}) {
    h::ExperimentConfig c = h::preset(e, "small");
    c.reps = std::min<std::size_t>(c.reps, 3);
    if (e == h::Experiment::sparsity_table) c.s_grid = {5};
    if (e == h::Experiment::success_prob) c.n_grid = {50, 100};
    if (e == h::Experiment::illustrative) {
      auto text = [&](std::size_t threads) {
        c.threads = threads;
        std::ostringstream os;
        h::write_illustration_csv(os, h::run_illustrative(c));
        return os.str();
      };
      mismatches += text(1) != text(1);
      ++runs;
      continue;
    }
    auto text = [&](std::size_t threads) {
      c.threads = threads;
      std::ostringstream os;
      h::write_csv(os, h::run_experiment(c));
      return os.str();
    };
    const std::string a = text(1);
    mismatches += a != text(1);
    mismatches += a != text(3);
    runs += 2;
  }
  return {mismatches == 0, fmtn("%zu of %zu repeated runs differed", mismatches, runs)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"solver correctness", solver_correctness},
      {"orthogonal closed forms", orthogonal_closed_forms},
      {"Dantzig LP oracle", dantzig_lp_oracle},
      {"rho^2 histograms", rho_histograms},
      {"sparsity trend", sparsity_trend},
      {"threshold monotonicity", threshold_monotonicity},
      {"success-probability transition", success_transition},
      {"ROC dominance", roc_dominance},
      {"theory audit", theory_audit},
      {"determinism", determinism}};
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!wanted.empty() && !wanted.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s criterion %2d (%s): %s\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
