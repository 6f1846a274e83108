#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mgs {

/// Broad failure classes. The CLI maps these onto process exit codes.
enum class ErrorKind {
  Domain,        // argument outside the operation's domain
  Parse,         // malformed model or config input
  Structure,     // sign structure of f does not fit (A2)/(A2)'
  Assumption,    // a hypothesis on f fails where an operation needs it
  Numerical,     // integrator / quadrature / bisection breakdown
  Multiplicity,  // some hump produced no ground state
  Precondition,  // caller broke an operation precondition
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error domain_error(const std::string& what) { return {ErrorKind::Domain, what}; }
inline Error parse_error(const std::string& what) { return {ErrorKind::Parse, what}; }
inline Error structure_error(const std::string& what) { return {ErrorKind::Structure, what}; }
inline Error assumption_error(const std::string& what) { return {ErrorKind::Assumption, what}; }
inline Error numerical_error(const std::string& what) { return {ErrorKind::Numerical, what}; }
inline Error precondition_error(const std::string& what) { return {ErrorKind::Precondition, what}; }

/// Raised when one or more humps could not be resolved at the given lambda.
/// Carries the hump indices that did succeed so callers can emit partial reports.
class MultiplicityNotReached : public Error {
 public:
  MultiplicityNotReached(double lambda, std::vector<int> succeeded, std::vector<std::pair<int, std::string>> failed)
      : Error(ErrorKind::Multiplicity, describe(lambda, failed)),
        lambda_(lambda),
        succeeded_(std::move(succeeded)),
        failed_(std::move(failed)) {}

  double lambda() const noexcept { return lambda_; }
  const std::vector<int>& succeeded() const noexcept { return succeeded_; }
  const std::vector<std::pair<int, std::string>>& failed() const noexcept { return failed_; }

 private:
  static std::string describe(double lambda, const std::vector<std::pair<int, std::string>>& failed) {
    std::string s = "multiplicity not reached at lambda=" + std::to_string(lambda) + ":";
    for (const auto& [k, why] : failed) s += " [hump " + std::to_string(k) + ": " + why + "]";
    return s;
  }

  double lambda_;
  std::vector<int> succeeded_;
  std::vector<std::pair<int, std::string>> failed_;
};

}  // namespace mgs
