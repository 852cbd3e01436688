#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include <tlasso/ensembles.hpp>
#include <tlasso/errors.hpp>
#include <tlasso/model.hpp>
#include <tlasso/rng.hpp>

namespace tlasso::harness {

using json = nlohmann::json;

enum class Experiment { illustrative, type12_sweep, rho_hist, sparsity_table, success_prob, roc };

inline std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::illustrative: return "illustrative";
    case Experiment::type12_sweep: return "type12_sweep";
    case Experiment::rho_hist: return "rho_hist";
    case Experiment::sparsity_table: return "sparsity_table";
    case Experiment::success_prob: return "success_prob";
    case Experiment::roc: return "roc";
  }
  return "unknown";
}

inline Experiment experiment_from_string(const std::string& s) {
  if (s == "illustrative") return Experiment::illustrative;
  if (s == "type12_sweep" || s == "type12") return Experiment::type12_sweep;
  if (s == "rho_hist" || s == "rho-hist") return Experiment::rho_hist;
  if (s == "sparsity_table" || s == "sparsity-table") return Experiment::sparsity_table;
  if (s == "success_prob" || s == "success-prob") return Experiment::success_prob;
  if (s == "roc") return Experiment::roc;
  throw InvalidArgument("unknown experiment '" + s + "'");
}

struct SigmaRule {
  enum class Kind { fixed, sqrt_s_over_3, sqrt_s, unit };
  Kind kind = Kind::sqrt_s_over_3;
  double value = 1.0;  // fixed only

  double sigma(Index s) const {
    switch (kind) {
      case Kind::fixed: return value;
      case Kind::sqrt_s_over_3: return std::sqrt(static_cast<double>(s)) / 3.0;
      case Kind::sqrt_s: return std::sqrt(static_cast<double>(s));
      case Kind::unit: return 1.0;
    }
    return value;
  }
};

inline std::string to_string(SigmaRule::Kind k) {
  switch (k) {
    case SigmaRule::Kind::fixed: return "fixed";
    case SigmaRule::Kind::sqrt_s_over_3: return "sqrt_s_over_3";
    case SigmaRule::Kind::sqrt_s: return "sqrt_s";
    case SigmaRule::Kind::unit: return "unit";
  }
  return "unknown";
}

inline SigmaRule sigma_rule_from_string(const std::string& s, double value = 1.0) {
  if (s == "fixed") return {SigmaRule::Kind::fixed, value};
  if (s == "sqrt_s_over_3") return {SigmaRule::Kind::sqrt_s_over_3, value};
  if (s == "sqrt_s") return {SigmaRule::Kind::sqrt_s, value};
  if (s == "unit") return {SigmaRule::Kind::unit, value};
  throw InvalidArgument("unknown sigma rule '" + s + "'");
}

// Estimator names used in configs and in the `estimator` CSV column.
namespace est {
inline const std::string thresholded_lasso = "thresholded_lasso";
inline const std::string gauss_dantzig = "gauss_dantzig";
inline const std::string iterative = "iterative";
inline const std::string lasso_optimal = "lasso_optimal";
inline const std::string lasso = "lasso";  // ROC: plain Lasso along its path
inline const std::string adaptive_lasso = "adaptive_lasso";

inline bool known(const std::string& e) {
  return e == thresholded_lasso || e == gauss_dantzig || e == iterative || e == lasso_optimal ||
         e == lasso || e == adaptive_lasso;
}
}  // namespace est

struct ExperimentConfig {
  Experiment experiment = Experiment::type12_sweep;
  EnsembleSpec::Kind ensemble = EnsembleSpec::Kind::gaussian_iid;
  double gamma = 0.5;
  Index p = 256;
  std::vector<Index> n_grid{72};  // empty for success_prob means "derive from s and p"
  std::vector<Index> s_grid{8};
  SigmaRule sigma_rule;
  double sigma_hat_factor = 1.0;  // tuning uses sigma_hat = factor * sigma, factor >= 1
  BetaScheme beta = BetaScheme::gaussian_mixture();
  double lambda_factor = 0.69;    // lambda_n = factor * lambda * sigma_hat
  std::vector<double> t0_grid{1.0};  // multiples of lambda * sigma_hat
  double f_t = 0.0;               // > 0 selects t0 = f_t sqrt(|S0|) lambda sigma_hat
  std::string gd_lambda_rule = "lasso";  // "lasso" (same as lambda_n) or "dantzig"
  double gd_a = 0.0;
  double gd_tau = 1.0;
  std::vector<double> path_grid;  // ROC: lambda / lambda_max fractions
  std::size_t reps = 100;
  std::uint64_t seed = 20100601;
  std::vector<std::string> estimators{est::thresholded_lasso};
  std::size_t threads = 1;
  bool timing = false;

  void validate() const {
    if (reps < 1) throw InvalidArgument("config: reps must be >= 1");
    if (p < 2) throw InvalidArgument("config: p must be >= 2");
    if (s_grid.empty()) throw InvalidArgument("config: s grid is empty");
    if (n_grid.empty() && experiment != Experiment::success_prob) {
      throw InvalidArgument("config: n grid is empty");
    }
    if (t0_grid.empty() && f_t <= 0.0) throw InvalidArgument("config: t0 grid is empty");
    for (Index s : s_grid)
      if (s < 0 || s > p) throw InvalidArgument("config: s must lie in [0, p]");
    for (Index n : n_grid)
      if (n < 2) throw InvalidArgument("config: n must be >= 2");
    for (double t : t0_grid)
      if (!(t > 0.0)) throw InvalidArgument("config: t0 multiples must be > 0");
    if (!(sigma_hat_factor >= 1.0)) throw InvalidArgument("config: sigma_hat_factor must be >= 1");
    if (!(lambda_factor > 0.0)) throw InvalidArgument("config: lambda_factor must be > 0");
    if (estimators.empty()) throw InvalidArgument("config: no estimators selected");
    for (const auto& e : estimators)
      if (!est::known(e)) throw InvalidArgument("config: unknown estimator '" + e + "'");
    if (gd_lambda_rule != "lasso" && gd_lambda_rule != "dantzig") {
      throw InvalidArgument("config: gd_lambda_rule must be 'lasso' or 'dantzig'");
    }
    if (threads < 1) throw InvalidArgument("config: threads must be >= 1");
  }

  bool uses(const std::string& e) const {
    for (const auto& x : estimators)
      if (x == e) return true;
    return false;
  }
};

// Replication-invariant fields only; threads and timing do not affect records.
inline json to_json(const ExperimentConfig& c) {
  json j;
  j["experiment"] = to_string(c.experiment);
  j["ensemble"] = to_string(c.ensemble);
  j["gamma"] = c.gamma;
  j["p"] = c.p;
  j["n"] = c.n_grid;
  j["s"] = c.s_grid;
  j["sigma_rule"] = to_string(c.sigma_rule.kind);
  j["sigma_value"] = c.sigma_rule.value;
  j["sigma_hat_factor"] = c.sigma_hat_factor;
  j["beta_scheme"] = to_string(c.beta.kind);
  j["beta_value"] = c.beta.value;
  j["beta_values"] = std::vector<double>(c.beta.values.data(), c.beta.values.data() + c.beta.values.size());
  j["lambda_factor"] = c.lambda_factor;
  j["t0"] = c.t0_grid;
  j["f_t"] = c.f_t;
  j["gd_lambda_rule"] = c.gd_lambda_rule;
  j["gd_a"] = c.gd_a;
  j["gd_tau"] = c.gd_tau;
  j["path_grid"] = c.path_grid;
  j["reps"] = c.reps;
  j["seed"] = c.seed;
  j["estimators"] = c.estimators;
  return j;
}

inline ExperimentConfig from_json(const json& j, ExperimentConfig c = {}) {
  static const std::set<std::string> known{
      "experiment", "ensemble", "gamma", "p", "n", "s", "t0", "path_grid", "sigma_rule", "sigma_value", "sigma",
      "sigma_hat_factor", "beta_scheme", "beta_value", "beta_values", "lambda_factor", "f_t", "gd_lambda_rule",
      "gd_a", "gd_tau", "reps", "seed", "estimators", "threads", "timing"};
  if (!j.is_object()) throw InvalidArgument("config: expected a JSON object");
  for (const auto& item : j.items())
    if (!known.count(item.key())) throw InvalidArgument("config: unknown key '" + item.key() + "'");
  try {
    if (j.contains("experiment")) c.experiment = experiment_from_string(j["experiment"].get<std::string>());
    if (j.contains("ensemble")) c.ensemble = ensemble_kind_from_string(j["ensemble"].get<std::string>());
    if (j.contains("gamma")) c.gamma = j["gamma"].get<double>();
    if (j.contains("p")) c.p = j["p"].get<Index>();
    auto grid = [&](const char* key, auto& out) {
      if (!j.contains(key)) return;
      using T = typename std::decay_t<decltype(out)>::value_type;
      if (j[key].is_array()) out = j[key].get<std::vector<T>>();
      else out = {j[key].get<T>()};
    };
    grid("n", c.n_grid);
    grid("s", c.s_grid);
    grid("t0", c.t0_grid);
    grid("path_grid", c.path_grid);
    if (j.contains("sigma_rule")) {
      c.sigma_rule = sigma_rule_from_string(j["sigma_rule"].get<std::string>(),
                                            j.value("sigma_value", c.sigma_rule.value));
    } else if (j.contains("sigma_value")) {
      c.sigma_rule.value = j["sigma_value"].get<double>();
    }
    if (j.contains("sigma")) c.sigma_rule = {SigmaRule::Kind::fixed, j["sigma"].get<double>()};
    if (j.contains("sigma_hat_factor")) c.sigma_hat_factor = j["sigma_hat_factor"].get<double>();
    if (j.contains("beta_scheme")) {
      const auto k = j["beta_scheme"].get<std::string>();
      if (k == "gaussian_mixture") c.beta = BetaScheme::gaussian_mixture();
      else if (k == "constant") c.beta = BetaScheme::constant(j.value("beta_value", 0.9));
      else if (k == "explicit") {
        const auto v = j.at("beta_values").get<std::vector<double>>();
        c.beta = BetaScheme::explicit_values(Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size())));
      } else {
        throw InvalidArgument("unknown beta_scheme '" + k + "'");
      }
    }
    if (j.contains("lambda_factor")) c.lambda_factor = j["lambda_factor"].get<double>();
    if (j.contains("f_t")) c.f_t = j["f_t"].get<double>();
    if (j.contains("gd_lambda_rule")) c.gd_lambda_rule = j["gd_lambda_rule"].get<std::string>();
    if (j.contains("gd_a")) c.gd_a = j["gd_a"].get<double>();
    if (j.contains("gd_tau")) c.gd_tau = j["gd_tau"].get<double>();
    if (j.contains("reps")) c.reps = j["reps"].get<std::size_t>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("estimators")) c.estimators = j["estimators"].get<std::vector<std::string>>();
    if (j.contains("threads")) c.threads = j["threads"].get<std::size_t>();
    if (j.contains("timing")) c.timing = j["timing"].get<bool>();
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
  return c;
}

inline ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw InvalidArgument("config '" + path + "' is not valid JSON: " + e.what());
  }
  return from_json(j, std::move(base));
}

// FNV-1a over the canonical (sorted-key) JSON dump.
inline std::string config_hash(const ExperimentConfig& c) {
  const std::uint64_t h = fnv1a64(to_json(c).dump());
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::vector<double> linspace(double a, double b, std::size_t k) {
  std::vector<double> out(k);
  for (std::size_t i = 0; i < k; ++i) {
    out[i] = k == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(k - 1);
  }
  return out;
}

inline std::vector<double> logspace(double a, double b, std::size_t k) {
  std::vector<double> out = linspace(std::log10(a), std::log10(b), k);
  for (double& x : out) x = std::pow(10.0, x);
  return out;
}

// n from 0.5 s log p to 6 s log p in ten steps.
inline std::vector<Index> success_n_grid(Index p, Index s) {
  const double base = static_cast<double>(s) * std::log(static_cast<double>(p));
  std::vector<Index> out;
  for (double x : linspace(0.5 * base, 6.0 * base, 10)) {
    const auto n = static_cast<Index>(std::ceil(x));
    if (out.empty() || n > out.back()) out.push_back(std::max<Index>(n, 2));
  }
  return out;
}

inline ExperimentConfig preset(Experiment e, const std::string& name) {
  if (name != "paper" && name != "small") throw InvalidArgument("unknown preset '" + name + "'");
  const bool paper = name == "paper";
  ExperimentConfig c;
  c.experiment = e;
  switch (e) {
    case Experiment::illustrative:
      c.p = paper ? 256 : 128;
      c.n_grid = {72};
      c.s_grid = {8};
      c.reps = 1;
      c.estimators = {est::thresholded_lasso, est::lasso_optimal, est::gauss_dantzig, est::iterative};
      break;
    case Experiment::type12_sweep:
      c.p = paper ? 256 : 128;
      c.n_grid = {72};
      c.s_grid = {8};
      c.t0_grid = linspace(0.01, 1.5, 30);
      c.reps = paper ? 200 : 100;
      break;
    case Experiment::rho_hist:
      c.p = paper ? 256 : 128;
      c.n_grid = {72};
      c.s_grid = {8};
      c.t0_grid = {1.0};
      c.reps = paper ? 500 : 100;
      c.estimators = {est::thresholded_lasso, est::lasso_optimal};
      break;
    case Experiment::sparsity_table:
      c.p = paper ? 2000 : 500;
      c.n_grid = {paper ? 400 : 200};
      c.s_grid = paper ? std::vector<Index>{5, 18, 20, 40, 60, 80, 100} : std::vector<Index>{5, 15, 25};
      c.t0_grid = {1.0};
      c.reps = 100;
      c.estimators = {est::thresholded_lasso, est::lasso_optimal};
      break;
    case Experiment::success_prob:
      c.p = paper ? 256 : 128;
      c.n_grid = {};
      c.s_grid = {8};
      c.sigma_rule = {SigmaRule::Kind::unit, 1.0};
      c.beta = BetaScheme::constant(0.9);
      c.t0_grid = {};
      c.f_t = 0.18;
      c.reps = 100;
      c.estimators = {est::thresholded_lasso, est::lasso_optimal};
      break;
    case Experiment::roc:
      c.p = paper ? 512 : 256;
      c.n_grid = {paper ? 330 : 165};
      c.s_grid = {paper ? 64 : 32};
      c.t0_grid = linspace(0.01, 1.5, 40);
      c.path_grid = logspace(1.0, 1e-3, 60);
      c.reps = 100;
      c.estimators = {est::thresholded_lasso, est::lasso, est::adaptive_lasso};
      break;
  }
  return c;
}

}  // namespace tlasso::harness
