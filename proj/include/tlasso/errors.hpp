#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <tlasso/types.hpp>

namespace tlasso {

// Base for every error raised by the library. `kind()` is a stable,
// machine-readable tag used by the CLI when reporting failures as JSON.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
  virtual const char* kind() const noexcept { return "error"; }
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "invalid_argument"; }
};

// Active-set Gram matrix became numerically singular along the LARS path.
class DegenerateDesign : public Error {
 public:
  DegenerateDesign(const std::string& what, IndexSet indices)
      : Error(what), indices_(std::move(indices)) {}
  const char* kind() const noexcept override { return "degenerate_design"; }
  const IndexSet& indices() const noexcept { return indices_; }

 private:
  IndexSet indices_;
};

class RankDeficiency : public Error {
 public:
  RankDeficiency(const std::string& what, IndexSet indices)
      : Error(what), indices_(std::move(indices)) {}
  const char* kind() const noexcept override { return "rank_deficiency"; }
  const IndexSet& indices() const noexcept { return indices_; }

 private:
  IndexSet indices_;
};

// Iterative solver gave up; carries the last measured residual / gap.
class NonConvergence : public Error {
 public:
  NonConvergence(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  const char* kind() const noexcept override { return "non_convergence"; }
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

class BudgetExceeded : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "budget_exceeded"; }
};

class UndefinedMetric : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "undefined_metric"; }
};

class InvalidRegime : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "invalid_regime"; }
};

class EmptyModel : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "empty_model"; }
};

class PrecisionError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "precision_error"; }
};

class InternalError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "internal_error"; }
};

class IoError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "io_error"; }
};

namespace detail {

inline std::string format_indices(const IndexSet& idx) {
  std::string out = "{";
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(idx[i]);
  }
  return out + "}";
}

}  // namespace detail
}  // namespace tlasso
