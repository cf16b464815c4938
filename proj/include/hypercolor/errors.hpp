#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hypercolor {

/// Input outside the mathematical domain of an operation (negative entry,
/// nonpositive log argument, stochasticity violated, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Invalid parameter combination (q < 2, s >= q, m > C(n,k), ...).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Exhaustive enumeration would exceed the configured state budget.
class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Iterative projection did not reach tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

struct Warning {
  std::string code;
  std::string message;
  bool operator==(const Warning&) const = default;
};

/// Sink for structured warnings. Operations take a nullable pointer and
/// append to it; a null sink silently drops warnings.
using Warnings = std::vector<Warning>;

inline void warn(Warnings* sink, std::string code, std::string message) {
  if (sink == nullptr) return;
  for (const auto& w : *sink)
    if (w.code == code && w.message == message) return;
  sink->push_back({std::move(code), std::move(message)});
}

}  // namespace hypercolor
