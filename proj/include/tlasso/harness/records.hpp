#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include <tlasso/errors.hpp>
#include <tlasso/harness/config.hpp>
#include <tlasso/metrics.hpp>

namespace tlasso::harness {

// One row per (replication, estimator, sweep point).
struct Record {
  std::string config_hash;
  std::uint64_t master_seed = 0;
  std::string experiment;
  std::size_t replication = 0;
  std::string estimator;
  double sweep = std::nan("");  // t0 / (lambda sigma), f_t, or lambda / lambda_max, by estimator
  double t0 = std::nan("");
  double lambda_n = std::nan("");
  Index n = 0;
  Index p = 0;
  Index s = 0;
  double sigma = 0.0;
  Index tp = 0, fp = 0, fn = 0, tn = 0;
  double fpr = std::nan("");
  double tpr = std::nan("");
  double rho2 = std::nan("");
  double l2_loss = std::nan("");
  double pred_loss = std::nan("");
  int success = 0;
  int truncated = 0;
  std::string error;  // empty, or the error kind for a failed replication
  double wall_ms = std::nan("");

  bool ok() const { return error.empty(); }
};

inline const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols{
      "config_hash", "master_seed", "experiment", "replication", "estimator", "sweep",
      "t0", "lambda_n", "n", "p", "s", "sigma", "tp", "fp", "fn", "tn", "fpr", "tpr",
      "rho2", "l2_loss", "pred_loss", "success", "truncated", "error"};
  return cols;
}

namespace detail {

inline std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_double(const std::string& s) {
  if (s == "nan") return std::nan("");
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw InvalidArgument("csv: bad number '" + s + "'");
  return v;
}

inline long long parse_int(const std::string& s) {
  char* end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0') throw InvalidArgument("csv: bad integer '" + s + "'");
  return v;
}

inline std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace detail

inline void fill_metrics(Record& r, const Vector& beta_hat, const GroundTruth& truth, const DesignMatrix& X) {
  const Confusion c = confusion(beta_hat, truth);
  r.tp = c.tp;
  r.fp = c.fp;
  r.fn = c.fn;
  r.tn = c.tn;
  r.fpr = c.fpr;
  r.tpr = c.tpr;
  r.rho2 = truth.s() > 0 ? rho_squared(beta_hat, truth, r.sigma, X.n()) : std::nan("");
  r.l2_loss = ell2_loss(beta_hat, truth);
  r.pred_loss = prediction_loss(X, beta_hat, truth);
  r.success = exact_sign_recovery(beta_hat, truth) ? 1 : 0;
}

inline void write_csv_header(std::ostream& os, bool timing) {
  const auto& cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  if (timing) os << ",wall_ms";
  os << '\n';
}

inline void write_csv_row(std::ostream& os, const Record& r, bool timing) {
  using detail::fmt_double;
  os << r.config_hash << ',' << r.master_seed << ',' << r.experiment << ',' << r.replication << ','
     << r.estimator << ',' << fmt_double(r.sweep) << ',' << fmt_double(r.t0) << ','
     << fmt_double(r.lambda_n) << ',' << r.n << ',' << r.p << ',' << r.s << ','
     << fmt_double(r.sigma) << ',' << r.tp << ',' << r.fp << ',' << r.fn << ',' << r.tn << ','
     << fmt_double(r.fpr) << ',' << fmt_double(r.tpr) << ',' << fmt_double(r.rho2) << ','
     << fmt_double(r.l2_loss) << ',' << fmt_double(r.pred_loss) << ',' << r.success << ','
     << r.truncated << ',' << r.error;
  if (timing) os << ',' << fmt_double(r.wall_ms);
  os << '\n';
}

inline void write_csv(std::ostream& os, const std::vector<Record>& records, bool timing = false) {
  write_csv_header(os, timing);
  for (const auto& r : records) write_csv_row(os, r, timing);
}

inline std::vector<Record> parse_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw InvalidArgument("csv: missing header");
  const auto header = detail::split(line);
  const auto& cols = csv_columns();
  const bool timing = header.size() == cols.size() + 1 && header.back() == "wall_ms";
  if (header.size() != cols.size() + (timing ? 1 : 0) ||
      !std::equal(cols.begin(), cols.end(), header.begin())) {
    throw InvalidArgument("csv: unexpected header");
  }
  std::vector<Record> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = detail::split(line);
    if (f.size() != header.size()) throw InvalidArgument("csv: wrong field count");
    using detail::parse_double;
    using detail::parse_int;
    Record r;
    r.config_hash = f[0];
    r.master_seed = std::strtoull(f[1].c_str(), nullptr, 10);
    r.experiment = f[2];
    r.replication = static_cast<std::size_t>(parse_int(f[3]));
    r.estimator = f[4];
    r.sweep = parse_double(f[5]);
    r.t0 = parse_double(f[6]);
    r.lambda_n = parse_double(f[7]);
    r.n = parse_int(f[8]);
    r.p = parse_int(f[9]);
    r.s = parse_int(f[10]);
    r.sigma = parse_double(f[11]);
    r.tp = parse_int(f[12]);
    r.fp = parse_int(f[13]);
    r.fn = parse_int(f[14]);
    r.tn = parse_int(f[15]);
    r.fpr = parse_double(f[16]);
    r.tpr = parse_double(f[17]);
    r.rho2 = parse_double(f[18]);
    r.l2_loss = parse_double(f[19]);
    r.pred_loss = parse_double(f[20]);
    r.success = static_cast<int>(parse_int(f[21]));
    r.truncated = static_cast<int>(parse_int(f[22]));
    r.error = f[23];
    if (timing) r.wall_ms = parse_double(f[24]);
    out.push_back(std::move(r));
  }
  return out;
}

inline nlohmann::json to_json(const Record& r) {
  auto num = [](double v) -> nlohmann::json {
    if (std::isfinite(v)) return v;
    return nullptr;
  };
  nlohmann::json j;
  j["config_hash"] = r.config_hash;
  j["master_seed"] = r.master_seed;
  j["experiment"] = r.experiment;
  j["replication"] = r.replication;
  j["estimator"] = r.estimator;
  j["sweep"] = num(r.sweep);
  j["t0"] = num(r.t0);
  j["lambda_n"] = num(r.lambda_n);
  j["n"] = r.n;
  j["p"] = r.p;
  j["s"] = r.s;
  j["sigma"] = num(r.sigma);
  j["tp"] = r.tp;
  j["fp"] = r.fp;
  j["fn"] = r.fn;
  j["tn"] = r.tn;
  j["fpr"] = num(r.fpr);
  j["tpr"] = num(r.tpr);
  j["rho2"] = num(r.rho2);
  j["l2_loss"] = num(r.l2_loss);
  j["pred_loss"] = num(r.pred_loss);
  j["success"] = r.success;
  j["truncated"] = r.truncated;
  j["error"] = r.error;
  if (!std::isnan(r.wall_ms)) j["wall_ms"] = r.wall_ms;
  return j;
}

inline void write_json(std::ostream& os, const ExperimentConfig& cfg, const std::vector<Record>& records) {
  nlohmann::json j;
  j["config"] = to_json(cfg);
  j["config_hash"] = config_hash(cfg);
  j["master_seed"] = cfg.seed;
  j["records"] = nlohmann::json::array();
  for (const auto& r : records) j["records"].push_back(to_json(r));
  os << j.dump(2) << '\n';
}

// Writes CSV, or JSON when the path ends in ".json".
inline void emit(const std::string& path, const ExperimentConfig& cfg, const std::vector<Record>& records,
                 bool timing = false) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  if (path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0) {
    write_json(out, cfg, records);
  } else {
    write_csv(out, records, timing);
  }
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace tlasso::harness
