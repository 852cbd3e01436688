#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include <tlasso/analysis.hpp>
#include <tlasso/dantzig.hpp>
#include <tlasso/ensembles.hpp>
#include <tlasso/harness/config.hpp>
#include <tlasso/harness/pool.hpp>
#include <tlasso/harness/records.hpp>
#include <tlasso/lasso_path.hpp>
#include <tlasso/metrics.hpp>
#include <tlasso/model.hpp>
#include <tlasso/procedures.hpp>

namespace tlasso::harness {

struct GridPoint {
  std::size_t index = 0;    // position in the (n, s) grid
  std::size_t n_index = 0;  // selects the fixed design
  Index n = 0;
  Index s = 0;
};

inline std::vector<GridPoint> grid_points(const ExperimentConfig& cfg) {
  std::vector<GridPoint> out;
  for (Index s : cfg.s_grid) {
    const std::vector<Index> ns = cfg.n_grid.empty() ? success_n_grid(cfg.p, std::max<Index>(s, 1)) : cfg.n_grid;
    for (std::size_t k = 0; k < ns.size(); ++k) {
      out.push_back({out.size(), k, ns[k], s});
    }
  }
  return out;
}

// The design for a grid point depends only on (master seed, n position), so
// it is shared by every replication and every s at that n.
inline DesignMatrix design_for(const ExperimentConfig& cfg, const GridPoint& gp) {
  EnsembleSpec spec{cfg.ensemble, gp.n, cfg.p, cfg.gamma};
  return generate(spec, derive_seed(cfg.seed, stream::design, gp.n_index));
}

inline std::uint64_t replication_seed(const ExperimentConfig& cfg, const GridPoint& gp, std::size_t rep) {
  return derive_seed(derive_seed(cfg.seed, stream::replication, gp.index), stream::replication, rep);
}

struct Tuning {
  double sigma = 0.0;
  double sigma_hat = 0.0;
  double lambda = 0.0;    // sqrt(2 log p / n)
  double lambda_n = 0.0;  // Lasso penalty
  double lambda_gd = 0.0; // Dantzig penalty
};

inline Tuning tuning_for(const ExperimentConfig& cfg, const GridPoint& gp) {
  Tuning t;
  t.sigma = cfg.sigma_rule.sigma(gp.s);
  t.sigma_hat = cfg.sigma_hat_factor * t.sigma;
  t.lambda = universal_lambda(cfg.p, gp.n);
  t.lambda_n = cfg.lambda_factor * t.lambda * t.sigma_hat;
  t.lambda_gd = cfg.gd_lambda_rule == "dantzig"
                    ? lambda_p_tau(cfg.gd_a, cfg.gd_tau, cfg.p, gp.n) * t.sigma_hat
                    : t.lambda_n;
  return t;
}

namespace detail {

struct ReplicationContext {
  const ExperimentConfig& cfg;
  const std::string& hash;
  const GridPoint& gp;
  const DesignMatrix& X;
  Tuning tune;
};

inline Record base_record(const ReplicationContext& c, std::size_t rep, const std::string& estimator) {
  Record r;
  r.config_hash = c.hash;
  r.master_seed = c.cfg.seed;
  r.experiment = to_string(c.cfg.experiment);
  r.replication = rep;
  r.estimator = estimator;
  r.n = c.gp.n;
  r.p = c.cfg.p;
  r.s = c.gp.s;
  r.sigma = c.tune.sigma;
  return r;
}

// Threshold-and-refit along the t0 sweep, reusing refits for repeated models.
inline void threshold_sweep(const ReplicationContext& c, std::size_t rep, const std::string& name,
                            const ProblemInstance& inst, const Vector& beta_init, double lambda_used,
                            std::vector<Record>& out) {
  const double unit = c.tune.lambda * c.tune.sigma_hat;
  std::vector<std::pair<double, double>> sweep;  // (sweep label, t0)
  if (c.cfg.f_t > 0.0) {
    // Data-driven threshold: label by f_t so replications aggregate together.
    sweep.push_back({c.cfg.f_t, success_rule_t0(beta_init, lambda_used, c.tune.sigma_hat, inst.n(), c.cfg.f_t)});
  } else {
    for (double m : c.cfg.t0_grid) sweep.push_back({m, m * unit});
  }
  std::map<IndexSet, std::pair<Vector, bool>> cache;
  for (const auto& [mult, t0] : sweep) {
    Record r = base_record(c, rep, name);
    r.sweep = mult;
    r.t0 = t0;
    r.lambda_n = lambda_used;
    Vector beta_hat = Vector::Zero(inst.p());
    if (t0 > 0.0) {
      IndexSet I = threshold_select(beta_init, t0);
      const bool cut = tlasso::detail::truncate_model(I, beta_init, inst.n());
      auto it = cache.find(I);
      if (it == cache.end()) it = cache.emplace(I, std::make_pair(ols(inst.X.matrix(), inst.Y, I), cut)).first;
      beta_hat = it->second.first;
      r.truncated = it->second.second ? 1 : 0;
    }
    fill_metrics(r, beta_hat, inst.truth, inst.X);
    out.push_back(std::move(r));
  }
}

inline void path_sweep(const ReplicationContext& c, std::size_t rep, const std::string& name,
                       const ProblemInstance& inst, const LassoPath& path, std::vector<Record>& out) {
  const double lmax = path.lambda_max();
  for (double f : c.cfg.path_grid) {
    Record r = base_record(c, rep, name);
    r.sweep = f;
    r.lambda_n = f * lmax;
    fill_metrics(r, lasso_at(path, f * lmax), inst.truth, inst.X);
    out.push_back(std::move(r));
  }
}

inline std::vector<Record> run_replication_unchecked(const ReplicationContext& c, std::size_t rep) {
  const ExperimentConfig& cfg = c.cfg;
  Rng rng(replication_seed(cfg, c.gp, rep));
  GroundTruth truth = sample_beta(cfg.p, c.gp.s, cfg.beta, rng);
  const ProblemInstance inst = synthesize(c.X, std::move(truth), c.tune.sigma, rng.next_u64());
  const Matrix& X = inst.X.matrix();
  std::vector<Record> out;

  const bool need_path = cfg.uses(est::thresholded_lasso) || cfg.uses(est::iterative) ||
                         cfg.uses(est::lasso_optimal) || cfg.uses(est::lasso) ||
                         cfg.uses(est::adaptive_lasso);
  LassoPath path;
  Vector beta_init;
  if (need_path) {
    path = lars_path(X, inst.Y);
    beta_init = lasso_at(path, c.tune.lambda_n);
  }
  const PathCriterion criterion = cfg.experiment == Experiment::success_prob
                                      ? PathCriterion::best_support_match
                                      : PathCriterion::min_l2_loss;

  for (const auto& name : cfg.estimators) {
    if (name == est::thresholded_lasso) {
      threshold_sweep(c, rep, name, inst, beta_init, c.tune.lambda_n, out);
    } else if (name == est::gauss_dantzig) {
      const DantzigSolution ds = dantzig_selector(X, inst.Y, c.tune.lambda_gd);
      threshold_sweep(c, rep, name, inst, ds.beta, c.tune.lambda_gd, out);
    } else if (name == est::iterative) {
      const ProcedureResult res = iterative_multistep(X, inst.Y, beta_init, c.tune.lambda_n);
      Record r = base_record(c, rep, name);
      r.lambda_n = c.tune.lambda_n;
      r.t0 = res.stages.back().threshold;
      r.truncated = res.truncated ? 1 : 0;
      fill_metrics(r, res.beta_hat, inst.truth, inst.X);
      out.push_back(std::move(r));
    } else if (name == est::lasso_optimal) {
      Record r = base_record(c, rep, name);
      fill_metrics(r, optimal_path_estimate(path, inst.truth, criterion), inst.truth, inst.X);
      out.push_back(std::move(r));
    } else if (name == est::lasso) {
      path_sweep(c, rep, name, inst, path, out);
    } else if (name == est::adaptive_lasso) {
      const Vector init = optimal_path_estimate(path, inst.truth, PathCriterion::min_l2_loss);
      path_sweep(c, rep, name, inst, adaptive_lasso_path(X, inst.Y, init), out);
    }
  }
  return out;
}

}  // namespace detail

// One replication at one grid point. A solver failure yields a single
// error-flagged record instead of aborting the sweep.
inline std::vector<Record> run_replication(const ExperimentConfig& cfg, const std::string& hash,
                                           const GridPoint& gp, const DesignMatrix& X, std::size_t rep) {
  const detail::ReplicationContext ctx{cfg, hash, gp, X, tuning_for(cfg, gp)};
  const auto start = std::chrono::steady_clock::now();
  std::vector<Record> out;
  std::string failure;
  try {
    out = detail::run_replication_unchecked(ctx, rep);
  } catch (const Error& e) {
    failure = e.kind();
  } catch (const std::exception&) {
    failure = "internal";
  }
  if (!failure.empty()) {
    Record r = detail::base_record(ctx, rep, "all");
    r.error = failure;
    out.assign(1, std::move(r));
  }
  if (cfg.timing) {
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    for (auto& r : out) r.wall_ms = ms;
  }
  return out;
}

inline std::vector<Record> run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::string hash = config_hash(cfg);
  const auto grid = grid_points(cfg);
  std::map<std::size_t, DesignMatrix> designs;
  for (const auto& gp : grid) {
    if (!designs.count(gp.n_index)) designs.emplace(gp.n_index, design_for(cfg, gp));
  }
  const std::size_t tasks = grid.size() * cfg.reps;
  auto chunks = parallel_map<std::vector<Record>>(tasks, cfg.threads, [&](std::size_t k) {
    const GridPoint& gp = grid[k / cfg.reps];
    return run_replication(cfg, hash, gp, designs.at(gp.n_index), k % cfg.reps);
  });
  std::vector<Record> out;
  for (auto& c : chunks)
    for (auto& r : c) out.push_back(std::move(r));
  return out;
}

// Aggregates per (estimator, n, s, sweep) in order of first appearance.
struct SummaryRow {
  std::string estimator;
  Index n = 0;
  Index s = 0;
  double sweep = std::nan("");
  std::size_t count = 0;
  std::size_t errors = 0;
  double mean_fp = 0, sd_fp = 0, mean_fn = 0, sd_fn = 0;
  double mean_fpr = 0, mean_tpr = 0;
  double mean_rho2 = std::nan(""), median_rho2 = std::nan("");
  double success_rate = 0;
};

inline std::vector<SummaryRow> summarize(const std::vector<Record>& records) {
  struct Acc {
    SummaryRow row;
    std::vector<double> fp, fn, fpr, tpr, rho2, success;
  };
  std::vector<Acc> groups;
  auto same = [](double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; };
  std::map<std::pair<Index, Index>, std::size_t> failures;  // per (n, s)
  for (const auto& r : records) {
    if (!r.ok()) {
      ++failures[{r.n, r.s}];
      continue;
    }
    auto it = std::find_if(groups.begin(), groups.end(), [&](const Acc& a) {
      return a.row.estimator == r.estimator && a.row.n == r.n && a.row.s == r.s && same(a.row.sweep, r.sweep);
    });
    if (it == groups.end()) {
      groups.push_back({});
      it = groups.end() - 1;
      it->row.estimator = r.estimator;
      it->row.n = r.n;
      it->row.s = r.s;
      it->row.sweep = r.sweep;
    }
    it->fp.push_back(static_cast<double>(r.fp));
    it->fn.push_back(static_cast<double>(r.fn));
    it->fpr.push_back(r.fpr);
    it->tpr.push_back(r.tpr);
    if (!std::isnan(r.rho2)) it->rho2.push_back(r.rho2);
    it->success.push_back(static_cast<double>(r.success));
  }
  std::vector<SummaryRow> out;
  for (auto& g : groups) {
    SummaryRow row = g.row;
    row.count = g.fp.size();
    const auto f = failures.find({row.n, row.s});
    row.errors = f == failures.end() ? 0 : f->second;
    row.mean_fp = mean(g.fp);
    row.sd_fp = stddev(g.fp);
    row.mean_fn = mean(g.fn);
    row.sd_fn = stddev(g.fn);
    row.mean_fpr = mean(g.fpr);
    row.mean_tpr = mean(g.tpr);
    if (!g.rho2.empty()) {
      row.mean_rho2 = mean(g.rho2);
      row.median_rho2 = median(g.rho2);
    }
    row.success_rate = mean(g.success);
    out.push_back(std::move(row));
  }
  return out;
}

inline void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows) {
  using detail::fmt_double;
  os << "estimator,n,s,sweep,count,errors,mean_fp,sd_fp,mean_fn,sd_fn,mean_fpr,mean_tpr,"
        "mean_rho2,median_rho2,success_rate\n";
  for (const auto& r : rows) {
    os << r.estimator << ',' << r.n << ',' << r.s << ',' << fmt_double(r.sweep) << ',' << r.count << ','
       << r.errors << ',' << fmt_double(r.mean_fp) << ',' << fmt_double(r.sd_fp) << ','
       << fmt_double(r.mean_fn) << ',' << fmt_double(r.sd_fn) << ',' << fmt_double(r.mean_fpr) << ','
       << fmt_double(r.mean_tpr) << ',' << fmt_double(r.mean_rho2) << ',' << fmt_double(r.median_rho2)
       << ',' << fmt_double(r.success_rate) << '\n';
  }
}

// Averaged ROC curve of one estimator, sorted by FPR.
inline std::vector<std::pair<double, double>> roc_curve(const std::vector<SummaryRow>& rows,
                                                        const std::string& estimator) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : rows)
    if (r.estimator == estimator) pts.push_back({r.mean_fpr, r.mean_tpr});
  std::sort(pts.begin(), pts.end());
  return pts;
}

// Piecewise-linear TPR at `fpr`; empty outside the curve's FPR range.
inline std::optional<double> interpolate_tpr(const std::vector<std::pair<double, double>>& curve, double fpr) {
  if (curve.empty() || fpr < curve.front().first || fpr > curve.back().first) return std::nullopt;
  for (std::size_t k = 1; k < curve.size(); ++k) {
    const auto& [x0, y0] = curve[k - 1];
    const auto& [x1, y1] = curve[k];
    if (fpr <= x1) {
      if (x1 == x0) return std::max(y0, y1);
      return y0 + (y1 - y0) * (fpr - x0) / (x1 - x0);
    }
  }
  return curve.back().second;
}

// Single realization with every coefficient vector, for per-coordinate plots.
struct Illustration {
  GroundTruth truth;
  Vector beta_init;
  std::vector<std::pair<std::string, Vector>> estimates;
  Tuning tune;
};

inline Illustration run_illustrative(const ExperimentConfig& cfg) {
  cfg.validate();
  const GridPoint gp = grid_points(cfg).front();
  const DesignMatrix X = design_for(cfg, gp);
  Illustration out;
  out.tune = tuning_for(cfg, gp);
  Rng rng(replication_seed(cfg, gp, 0));
  GroundTruth truth = sample_beta(cfg.p, gp.s, cfg.beta, rng);
  const ProblemInstance inst = synthesize(X, std::move(truth), out.tune.sigma, rng.next_u64());
  const LassoPath path = lars_path(X.matrix(), inst.Y);
  out.beta_init = lasso_at(path, out.tune.lambda_n);
  const double t0 = cfg.t0_grid.empty() ? out.tune.lambda * out.tune.sigma_hat
                                        : cfg.t0_grid.front() * out.tune.lambda * out.tune.sigma_hat;
  for (const auto& name : cfg.estimators) {
    if (name == est::thresholded_lasso) {
      out.estimates.push_back({name, thresholded_lasso(X.matrix(), inst.Y, path, out.tune.lambda_n, t0).beta_hat});
    } else if (name == est::gauss_dantzig) {
      out.estimates.push_back({name, gauss_dantzig(X.matrix(), inst.Y, out.tune.lambda_gd, t0).beta_hat});
    } else if (name == est::iterative) {
      out.estimates.push_back({name, iterative_multistep(X.matrix(), inst.Y, out.beta_init, out.tune.lambda_n).beta_hat});
    } else if (name == est::lasso_optimal) {
      out.estimates.push_back({name, optimal_path_estimate(path, inst.truth, PathCriterion::min_l2_loss)});
    } else if (name == est::lasso) {
      out.estimates.push_back({name, out.beta_init});
    } else if (name == est::adaptive_lasso) {
      const Vector init = optimal_path_estimate(path, inst.truth, PathCriterion::min_l2_loss);
      const LassoPath ap = adaptive_lasso_path(X.matrix(), inst.Y, init);
      out.estimates.push_back({name, optimal_path_estimate(ap, inst.truth, PathCriterion::min_l2_loss)});
    }
  }
  out.truth = inst.truth;
  return out;
}

inline void write_illustration_csv(std::ostream& os, const Illustration& ill) {
  using detail::fmt_double;
  os << "j,beta,beta_init";
  for (const auto& e : ill.estimates) os << ',' << e.first;
  os << '\n';
  for (Index j = 0; j < ill.truth.p(); ++j) {
    os << j << ',' << fmt_double(ill.truth.beta[j]) << ',' << fmt_double(ill.beta_init[j]);
    for (const auto& e : ill.estimates) os << ',' << fmt_double(e.second[j]);
    os << '\n';
  }
}

// Incoherence summary of a design: exact where the enumeration budget allows,
// otherwise sampled one-sided estimates.
inline nlohmann::json diagnose(const Matrix& X, Index max_m, double budget, std::size_t trials,
                               std::uint64_t seed) {
  const Index p = X.cols();
  max_m = std::clamp<Index>(max_m, 1, p);
  nlohmann::json j;
  j["n"] = X.rows();
  j["p"] = p;
  nlohmann::json rows = nlohmann::json::array();
  double delta = 0.0;
  bool all_exact = true;
  for (Index m = 1; m <= max_m; ++m) {
    const bool exact = binomial(p, m) <= budget;
    all_exact = all_exact && exact;
    const EnumerationMode mode = exact ? EnumerationMode::exact_mode(budget) : EnumerationMode::sampled(trials, seed);
    const SparseEigs e = sparse_eigs(X, m, mode);
    delta = std::max({delta, e.lambda_max - 1.0, 1.0 - e.lambda_min});
    nlohmann::json row;
    row["m"] = m;
    row["lambda_min"] = e.lambda_min;
    row["lambda_max"] = e.lambda_max;
    row["delta"] = delta;
    row["exact"] = exact;
    if (3 * m <= p) {
      const bool th_exact = binomial(p, m) * binomial(p - m, 2 * m) <= budget;
      row["theta_m_2m"] = theta(X, m, 2 * m, th_exact ? EnumerationMode::exact_mode(budget)
                                                      : EnumerationMode::sampled(trials, seed));
      row["theta_exact"] = th_exact;
      {
        const bool l2_exact = binomial(p, 2 * m) <= budget;
        const double lmin2 = sparse_eigs(X, 2 * m, l2_exact ? EnumerationMode::exact_mode(budget)
                                                             : EnumerationMode::sampled(trials, seed))
                                 .lambda_min;
        const auto K = re_constant_upper(lmin2, row["theta_m_2m"].get<double>(), 1.0);
        // Sampled inputs make the bound an estimate, not a certificate.
        row["K_upper_k0_1"] = K ? nlohmann::json(*K) : nlohmann::json(nullptr);
        row["K_certified"] = l2_exact && th_exact && K.has_value();
      }
    }
    rows.push_back(row);
  }
  j["by_size"] = rows;
  j["enumerated"] = all_exact;
  return j;
}

}  // namespace tlasso::harness
