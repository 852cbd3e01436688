// Command-line driver for the simulation studies.
//
//   tlasso_cli <experiment> [--preset small|paper] [--config file.json] [flags]
//   tlasso_cli diagnose [--design X.csv | --ensemble gaussian --n 40 --p 10]
//
// Records go to --out (CSV, or JSON for *.json) or stdout; the aggregated
// summary goes to --summary, or stdout when --out is given.

#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <tlasso/harness/experiments.hpp>
#include <tlasso/tlasso.hpp>

namespace {

using tlasso::harness::ExperimentConfig;
using nlohmann::json;

struct Overrides {
  std::string preset = "small";
  std::string config;
  std::string out;
  std::string summary;
  std::uint64_t seed = 0;
  std::size_t reps = 0;
  std::size_t threads = 1;
  std::string estimators;
  std::vector<tlasso::Index> n, s;
  tlasso::Index p = 0;
  std::string sigma_rule;
  double sigma = 0.0;
  std::vector<double> t0;
  double f_t = -1.0;
  bool timing = false;
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--preset", o.preset, "Built-in configuration")->check(CLI::IsMember({"small", "paper"}));
  cmd->add_option("--config", o.config, "JSON configuration file applied over the preset");
  cmd->add_option("--out", o.out, "Record output path (.csv or .json)");
  cmd->add_option("--summary", o.summary, "Summary CSV output path");
  cmd->add_option("--seed", o.seed, "Master seed");
  cmd->add_option("--reps", o.reps, "Replications per grid point");
  cmd->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--estimators", o.estimators, "Comma-separated estimator list");
  cmd->add_option("--p", o.p, "Number of covariates");
  cmd->add_option("--n", o.n, "Sample size(s)")->delimiter(',');
  cmd->add_option("--s", o.s, "Sparsity level(s)")->delimiter(',');
  cmd->add_option("--sigma-rule", o.sigma_rule, "fixed | sqrt_s_over_3 | sqrt_s | unit");
  cmd->add_option("--sigma", o.sigma, "Noise level (implies --sigma-rule fixed)");
  cmd->add_option("--t0", o.t0, "Threshold(s) as multiples of lambda*sigma")->delimiter(',');
  cmd->add_option("--f-t", o.f_t, "Use t0 = f_t sqrt(|S0|) lambda sigma");
  cmd->add_flag("--timing", o.timing, "Add a wall_ms column (output is then not reproducible)");
}

ExperimentConfig build_config(tlasso::harness::Experiment e, const Overrides& o, const CLI::App* cmd) {
  ExperimentConfig c = tlasso::harness::preset(e, o.preset);
  if (!o.config.empty()) c = tlasso::harness::load_config(o.config, c);
  c.experiment = e;
  if (cmd->count("--seed")) c.seed = o.seed;
  if (cmd->count("--reps")) c.reps = o.reps;
  if (cmd->count("--estimators")) c.estimators = split_list(o.estimators);
  if (cmd->count("--p")) c.p = o.p;
  if (cmd->count("--n")) c.n_grid = o.n;
  if (cmd->count("--s")) c.s_grid = o.s;
  if (cmd->count("--sigma-rule")) c.sigma_rule = tlasso::harness::sigma_rule_from_string(o.sigma_rule, c.sigma_rule.value);
  if (cmd->count("--sigma")) c.sigma_rule = {tlasso::harness::SigmaRule::Kind::fixed, o.sigma};
  if (cmd->count("--t0")) {
    c.t0_grid = o.t0;
    c.f_t = 0.0;
  }
  if (cmd->count("--f-t")) c.f_t = o.f_t;
  c.threads = o.threads;
  c.timing = o.timing;
  c.validate();
  return c;
}

void write_to(const std::string& path, const std::function<void(std::ostream&)>& fn) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw tlasso::IoError("cannot open '" + path + "' for writing");
  fn(out);
  out.flush();
  if (!out) throw tlasso::IoError("write to '" + path + "' failed");
}

int run_experiment(tlasso::harness::Experiment e, const Overrides& o, const CLI::App* cmd) {
  namespace h = tlasso::harness;
  const ExperimentConfig cfg = build_config(e, o, cmd);
  if (e == h::Experiment::illustrative) {
    const h::Illustration ill = h::run_illustrative(cfg);
    if (o.out.empty()) h::write_illustration_csv(std::cout, ill);
    else write_to(o.out, [&](std::ostream& os) { h::write_illustration_csv(os, ill); });
    return 0;
  }
  const auto records = h::run_experiment(cfg);
  if (o.out.empty()) h::write_csv(std::cout, records, cfg.timing);
  else h::emit(o.out, cfg, records, cfg.timing);
  const auto rows = h::summarize(records);
  if (!o.summary.empty()) write_to(o.summary, [&](std::ostream& os) { h::write_summary_csv(os, rows); });
  else if (!o.out.empty()) h::write_summary_csv(std::cout, rows);
  return 0;
}

tlasso::Matrix read_design_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw tlasso::IoError("cannot open design file '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    for (const auto& f : split_list(line)) {
      char* end = nullptr;
      const double v = std::strtod(f.c_str(), &end);
      if (end == f.c_str()) throw tlasso::InvalidArgument("design file: bad number '" + f + "'");
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw tlasso::InvalidArgument("design file: ragged rows");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw tlasso::InvalidArgument("design file is empty");
  tlasso::Matrix X(static_cast<tlasso::Index>(rows.size()), static_cast<tlasso::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      X(static_cast<tlasso::Index>(i), static_cast<tlasso::Index>(j)) = rows[i][j];
  return X;
}

void print_error(const std::string& kind, const std::string& message) {
  json j{{"error", kind}, {"message", message}};
  std::cerr << j.dump() << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  namespace h = tlasso::harness;
  CLI::App app{"Thresholded Lasso and Gauss-Dantzig simulation studies"};
  app.require_subcommand(1);

  Overrides o;
  const std::vector<std::pair<std::string, h::Experiment>> experiments{
      {"type12", h::Experiment::type12_sweep},      {"rho-hist", h::Experiment::rho_hist},
      {"sparsity-table", h::Experiment::sparsity_table}, {"success-prob", h::Experiment::success_prob},
      {"roc", h::Experiment::roc},                  {"illustrative", h::Experiment::illustrative}};
  std::vector<std::pair<CLI::App*, h::Experiment>> commands;
  for (const auto& [name, e] : experiments) {
    CLI::App* cmd = app.add_subcommand(name, "Run the " + h::to_string(e) + " study");
    add_common(cmd, o);
    commands.push_back({cmd, e});
  }

  std::string design, ensemble = "gaussian_iid", diag_out;
  tlasso::Index dn = 40, dp = 10, max_m = 4;
  double gamma = 0.5, budget = tlasso::kDefaultEnumerationBudget;
  std::size_t trials = 2000;
  std::uint64_t dseed = 1;
  CLI::App* diag = app.add_subcommand("diagnose", "Incoherence report for a design matrix");
  diag->add_option("--design", design, "CSV file with one row per observation");
  diag->add_option("--ensemble", ensemble, "gaussian_iid | toeplitz | bernoulli");
  diag->add_option("--n", dn, "Rows of the generated design");
  diag->add_option("--p", dp, "Columns of the generated design");
  diag->add_option("--gamma", gamma, "Toeplitz correlation");
  diag->add_option("--seed", dseed, "Design seed");
  diag->add_option("--max-m", max_m, "Largest subset size");
  diag->add_option("--budget", budget, "Exact-enumeration subset budget");
  diag->add_option("--trials", trials, "Random subsets per size when sampling");
  diag->add_option("--out", diag_out, "JSON output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("usage", e.what());
    return 2;
  }

  try {
    for (const auto& [cmd, e] : commands)
      if (cmd->parsed()) return run_experiment(e, o, cmd);
    if (diag->parsed()) {
      tlasso::Matrix X;
      if (!design.empty()) {
        X = read_design_csv(design);
      } else {
        const tlasso::EnsembleSpec spec{tlasso::ensemble_kind_from_string(ensemble), dn, dp, gamma};
        X = tlasso::generate(spec, dseed).matrix();
      }
      const json report = h::diagnose(X, max_m, budget, trials, dseed);
      if (diag_out.empty()) std::cout << report.dump(2) << '\n';
      else write_to(diag_out, [&](std::ostream& os) { os << report.dump(2) << '\n'; });
      return 0;
    }
  } catch (const tlasso::Error& e) {
    print_error(e.kind(), e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error("internal", e.what());
    return 1;
  }
  return 0;
}
