#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include <tlasso/harness/experiments.hpp>

#include "../support/oracles.hpp"

namespace tl = tlasso;
namespace h = tlasso::harness;

namespace {

h::ExperimentConfig tiny_type12() {
  h::ExperimentConfig c = h::preset(h::Experiment::type12_sweep, "small");
  c.reps = 4;
  c.t0_grid = {0.2, 0.6, 1.0};
  return c;
}

std::string csv_of(const std::vector<h::Record>& rs, bool timing = false) {
  std::ostringstream os;
  h::write_csv(os, rs, timing);
  return os.str();
}

}  // namespace

TEST(Config, PresetsValidate) {
  for (auto e : {h::Experiment::illustrative, h::Experiment::type12_sweep, h::Experiment::rho_hist,
                 h::Experiment::sparsity_table, h::Experiment::success_prob, h::Experiment::roc}) {
    for (const char* name : {"small", "paper"}) {
      const auto c = h::preset(e, name);
      EXPECT_NO_THROW(c.validate()) << h::to_string(e) << " " << name;
      EXPECT_EQ(h::experiment_from_string(h::to_string(e)), e);
    }
  }
  EXPECT_THROW(h::preset(h::Experiment::roc, "huge"), tl::InvalidArgument);
}

TEST(Config, JsonRoundTripAndHash) {
  h::ExperimentConfig c = h::preset(h::Experiment::roc, "small");
  c.seed = 99;
  c.estimators = {"lasso", "thresholded_lasso"};
  const auto back = h::from_json(h::to_json(c));
  EXPECT_EQ(h::to_json(back), h::to_json(c));
  EXPECT_EQ(h::config_hash(back), h::config_hash(c));
  EXPECT_EQ(h::config_hash(c).size(), 16u);

  h::ExperimentConfig d = c;
  d.threads = 8;
  d.timing = true;
  EXPECT_EQ(h::config_hash(d), h::config_hash(c));
  d.seed = 100;
  EXPECT_NE(h::config_hash(d), h::config_hash(c));
}

TEST(Config, InvalidSettingsRejected) {
  auto c = tiny_type12();
  c.reps = 0;
  EXPECT_THROW(c.validate(), tl::InvalidArgument);
  c = tiny_type12();
  c.estimators = {"nope"};
  EXPECT_THROW(c.validate(), tl::InvalidArgument);
  c = tiny_type12();
  c.s_grid = {c.p + 1};
  EXPECT_THROW(c.validate(), tl::InvalidArgument);
  EXPECT_THROW(h::load_config("/nonexistent/cfg.json"), tl::IoError);
}

TEST(Config, LoadOverridesBase) {
  const std::string path = ::testing::TempDir() + "tlasso_cfg.json";
  {
    std::ofstream f(path);
    f << R"({"reps": 7, "p": 64, "sigma_rule": "fixed", "sigma_value": 0.5})";
  }
  const auto c = h::load_config(path, tiny_type12());
  EXPECT_EQ(c.reps, 7u);
  EXPECT_EQ(c.p, 64);
  EXPECT_EQ(c.sigma_rule.kind, h::SigmaRule::Kind::fixed);
  EXPECT_EQ(c.sigma_rule.sigma(8), 0.5);
  EXPECT_EQ(c.t0_grid, tiny_type12().t0_grid);
  {
    std::ofstream f(path);
    f << "{not json";
  }
  EXPECT_THROW(h::load_config(path), tl::InvalidArgument);
  {
    std::ofstream f(path);
    f << R"({"t0_grid": [0.5]})";
  }
  EXPECT_THROW(h::load_config(path), tl::InvalidArgument);
  std::remove(path.c_str());
}

TEST(Grids, LinspaceLogspaceSuccessGrid) {
  const auto l = h::linspace(0.01, 1.5, 30);
  EXPECT_EQ(l.size(), 30u);
  EXPECT_DOUBLE_EQ(l.front(), 0.01);
  EXPECT_DOUBLE_EQ(l.back(), 1.5);
  const auto g = h::logspace(1, 1e-3, 4);
  EXPECT_NEAR(g[1], 0.1, 1e-15);
  const auto n = h::success_n_grid(256, 8);
  EXPECT_EQ(n.size(), 10u);
  EXPECT_TRUE(std::is_sorted(n.begin(), n.end()));
  EXPECT_NEAR(static_cast<double>(n.back()), 6.0 * 8 * std::log(256.0), 1.0);
}

TEST(Records, OnePerReplicationEstimatorAndSweepPoint) {
  auto c = tiny_type12();
  c.estimators = {"thresholded_lasso", "lasso_optimal", "iterative"};
  const auto rs = h::run_experiment(c);
  EXPECT_EQ(rs.size(), c.reps * (3 + 1 + 1));
  for (const auto& r : rs) {
    EXPECT_TRUE(r.ok());
    EXPECT_EQ(r.tp + r.fp + r.fn + r.tn, r.p);
    EXPECT_EQ(r.config_hash, h::config_hash(c));
  }
}

TEST(Records, CsvRoundTrip) {
  auto c = tiny_type12();
  const auto rs = h::run_experiment(c);
  const std::string text = csv_of(rs);
  std::istringstream is(text);
  const auto back = h::parse_csv(is);
  ASSERT_EQ(back.size(), rs.size());
  EXPECT_EQ(csv_of(back), text);
  for (std::size_t i = 0; i < rs.size(); ++i) {
    EXPECT_EQ(back[i].rho2, rs[i].rho2);
    EXPECT_EQ(back[i].t0, rs[i].t0);
  }
  std::istringstream bad("a,b\n");
  EXPECT_THROW(h::parse_csv(bad), tl::InvalidArgument);
}

TEST(Records, FrozenHeader) {
  std::ostringstream os;
  h::write_csv_header(os, false);
  EXPECT_EQ(os.str(),
            "config_hash,master_seed,experiment,replication,estimator,sweep,t0,lambda_n,n,p,s,sigma,"
            "tp,fp,fn,tn,fpr,tpr,rho2,l2_loss,pred_loss,success,truncated,error\n");
  std::ostringstream ot;
  h::write_csv_header(ot, true);
  EXPECT_NE(ot.str().find(",error,wall_ms\n"), std::string::npos);
}

TEST(Determinism, SameSeedSameBytes) {
  for (auto e : {h::Experiment::type12_sweep, h::Experiment::roc, h::Experiment::success_prob}) {
    auto c = h::preset(e, "small");
    c.reps = 2;
    c.s_grid = {c.s_grid.front()};
    if (e == h::Experiment::success_prob) c.n_grid = {60, 120};
    c.estimators = {c.estimators.front()};
    EXPECT_EQ(csv_of(h::run_experiment(c)), csv_of(h::run_experiment(c))) << h::to_string(e);
  }
}

TEST(Determinism, ThreadCountDoesNotChangeOutput) {
  auto c = tiny_type12();
  c.reps = 9;
  const std::string one = csv_of(h::run_experiment(c));
  c.threads = 4;
  EXPECT_EQ(csv_of(h::run_experiment(c)), one);
  c.seed += 1;
  EXPECT_NE(csv_of(h::run_experiment(c)), one);
}

TEST(Harness, FailureIsolatedToOneRecord) {
  auto c = tiny_type12();
  c.estimators = {"thresholded_lasso", "lasso_optimal"};
  const auto grid = h::grid_points(c);
  const tl::DesignMatrix good = h::design_for(c, grid[0]);
  // A design one column short makes instance synthesis fail for this replication.
  const tl::DesignMatrix bad(good.matrix().leftCols(c.p - 1));
  std::vector<h::Record> all;
  for (std::size_t rep = 0; rep < 3; ++rep) {
    const auto out = h::run_replication(c, "hash", grid[0], rep == 1 ? bad : good, rep);
    all.insert(all.end(), out.begin(), out.end());
  }
  ASSERT_EQ(all.size(), 2 * (c.t0_grid.size() + 1) + 1);
  std::size_t failed = 0;
  for (const auto& r : all) {
    if (r.ok()) continue;
    ++failed;
    EXPECT_EQ(r.estimator, "all");
    EXPECT_EQ(r.replication, 1u);
    EXPECT_EQ(r.error, "invalid_argument");
  }
  EXPECT_EQ(failed, 1u);
  for (const auto& row : h::summarize(all))
    if (row.estimator != "all") EXPECT_EQ(row.count, 2u);
  std::istringstream is(csv_of(all));
  EXPECT_EQ(h::parse_csv(is).size(), all.size());
}

TEST(Harness, SummaryAndRoc) {
  auto c = h::preset(h::Experiment::roc, "small");
  c.reps = 3;
  c.t0_grid = {0.2, 0.6, 1.2};
  c.path_grid = {1.0, 0.3, 0.1, 0.03};
  const auto rs = h::run_experiment(c);
  const auto rows = h::summarize(rs);
  for (const auto& r : rows) {
    EXPECT_EQ(r.count, 3u);
    EXPECT_EQ(r.errors, 0u);
  }
  const auto curve = h::roc_curve(rows, "lasso");
  ASSERT_EQ(curve.size(), 4u);
  EXPECT_TRUE(std::is_sorted(curve.begin(), curve.end()));
  EXPECT_FALSE(h::interpolate_tpr(curve, -1.0).has_value());
  const auto mid = h::interpolate_tpr(curve, 0.5 * (curve[1].first + curve[2].first));
  ASSERT_TRUE(mid.has_value());
  EXPECT_GE(*mid, std::min(curve[1].second, curve[2].second) - 1e-15);
  EXPECT_LE(*mid, std::max(curve[1].second, curve[2].second) + 1e-15);
}

TEST(Harness, TypeOneTwoTrends) {
  auto c = h::preset(h::Experiment::type12_sweep, "paper");
  c.reps = 100;
  c.t0_grid = h::linspace(0.01, 1.5, 15);
  const auto rows = h::summarize(h::run_experiment(c));
  bool clean = false;
  for (const auto& r : rows) clean = clean || (r.mean_fp < 0.1 && r.mean_fn < 0.1);
  EXPECT_TRUE(clean);

  c.sigma_rule = {h::SigmaRule::Kind::sqrt_s, 1.0};
  const auto low = h::summarize(h::run_experiment(c));
  std::vector<double> x, fn;
  for (const auto& r : low) {
    x.push_back(r.sweep);
    fn.push_back(r.mean_fn);
  }
  EXPECT_GT(tl::testing::spearman(x, fn), 0.9);
}

TEST(Harness, IllustrationCoversEveryCoordinate) {
  const auto c = h::preset(h::Experiment::illustrative, "small");
  const auto ill = h::run_illustrative(c);
  std::ostringstream os;
  h::write_illustration_csv(os, ill);
  const std::string text = os.str();
  EXPECT_EQ(static_cast<tl::Index>(std::count(text.begin(), text.end(), '\n')), c.p + 1);
}

TEST(Harness, DiagnoseReportsExactSmallDesign) {
  const auto X = tl::generate(tl::EnsembleSpec::gaussian(20, 6), 1);
  const auto js = h::diagnose(X.matrix(), 3, tl::kDefaultEnumerationBudget, 100, 1);
  ASSERT_TRUE(js.contains("by_size"));
  EXPECT_EQ(js["by_size"].size(), 3u);
  EXPECT_TRUE(js["by_size"][0]["exact"].get<bool>());
}
