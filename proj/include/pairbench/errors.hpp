#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace pairbench {

/// Precondition violation on an operation input (non-finite loss, zero
/// denominator, grid too narrow, ...). The message names the violated
/// requirement and the offending value.
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// A fit whose Jacobian cannot identify one or more model parameters.
class DegenerateFitError : public std::runtime_error {
 public:
  DegenerateFitError(const std::string& what, std::vector<std::string> params)
      : std::runtime_error(what), unidentifiable(std::move(params)) {}

  std::vector<std::string> unidentifiable;
};

/// Loss-ledger contradiction: correcting a measured efficiency through the
/// claimed transmittance produced a value above 1.
class InconsistentBudgetError : public std::runtime_error {
 public:
  InconsistentBudgetError(const std::string& what, double value)
      : std::runtime_error(what), offending_value(value) {}

  double offending_value;
};

/// Internal numerical failure (e.g. a decomposition that did not converge).
/// Carries whatever diagnostics were available at the failure site.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace pairbench
