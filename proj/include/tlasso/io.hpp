#pragma once

#include <cmath>
#include <string>

#include <json.hpp>

#include <tlasso/analysis.hpp>
#include <tlasso/procedures.hpp>
#include <tlasso/types.hpp>

namespace tlasso {

namespace detail {

inline nlohmann::json finite_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

}  // namespace detail

// Sparse encoding: [[index, value], ...] over the nonzero entries.
inline nlohmann::json sparse_json(const Vector& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Index j = 0; j < v.size(); ++j)
    if (v[j] != 0.0) out.push_back({j, v[j]});
  return out;
}

inline nlohmann::json to_json(const ProcedureResult& r) {
  nlohmann::json j;
  j["procedure"] = r.procedure;
  j["initial"] = r.initial;
  j["lambda_n"] = r.lambda_n;
  j["p"] = r.beta_init.size();
  j["beta_init"] = sparse_json(r.beta_init);
  j["beta_hat"] = sparse_json(r.beta_hat);
  j["truncated"] = r.truncated;
  j["stages"] = nlohmann::json::array();
  for (const auto& st : r.stages) {
    j["stages"].push_back({{"threshold", st.threshold}, {"selected", st.selected}, {"beta", sparse_json(st.beta)}});
  }
  return j;
}

inline nlohmann::json to_json(const IncoherenceReport& r) {
  nlohmann::json j;
  j["p"] = r.p;
  j["m"] = r.m;
  j["enumerated"] = r.enumerated;
  nlohmann::json sizes = nlohmann::json::array();
  for (Index k = 1; k <= r.m; ++k) {
    sizes.push_back({{"size", k},
                     {"lambda_min", r.lambda_min(k)},
                     {"lambda_max", r.lambda_max(k)},
                     {"delta", r.delta_s(k)}});
  }
  j["by_size"] = sizes;
  nlohmann::json th = nlohmann::json::array();
  for (Index a = 1; a <= r.m; ++a)
    for (Index b = 1; a + b <= r.m; ++b) th.push_back({{"s", a}, {"s_prime", b}, {"theta", r.theta(a, b)}});
  j["theta"] = th;
  j["K_s"] = r.K_s;
  j["K_upper"] = r.K_upper ? nlohmann::json(*r.K_upper) : nlohmann::json(nullptr);
  return j;
}

inline nlohmann::json to_json(const BoundCheck& b) {
  nlohmann::json j;
  j["on_Ta"] = b.on_Ta;
  j["noise_corr"] = b.noise_corr;
  j["lambda_sap"] = b.lambda_sap;
  j["clauses"] = nlohmann::json::array();
  for (const auto& c : b.clauses) {
    j["clauses"].push_back({{"name", c.name},
                            {"status", to_string(c.status)},
                            {"lhs", detail::finite_or_null(c.lhs)},
                            {"rhs", detail::finite_or_null(c.rhs)},
                            {"note", c.note}});
  }
  return j;
}

}  // namespace tlasso
