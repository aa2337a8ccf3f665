#pragma once

#include <stdexcept>
#include <string>

namespace hwq {

// Process exit codes used by the hwq tool. Library code throws the matching
// exception type; the tool maps it back to the code.
enum class ExitCode : int {
  kOk = 0,
  kConfig = 2,
  kInfeasible = 3,
  kInvariantViolation = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ExitCode code() const noexcept { return code_; }

 private:
  ExitCode code_;
};

/// Malformed configuration or out-of-domain arguments.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ExitCode::kConfig, what) {}
};

/// Parameters that describe a system outside the Halfin-Whitt feasibility
/// region (nonpositive arrival rate, traffic intensity >= 1, T0 failures).
class InfeasibleError : public Error {
 public:
  explicit InfeasibleError(const std::string& what) : Error(ExitCode::kInfeasible, what) {}
};

/// A numeric invariant failed (solver band, PSD factorization, dominance).
class InvariantViolation : public Error {
 public:
  explicit InvariantViolation(const std::string& what)
      : Error(ExitCode::kInvariantViolation, what) {}
};

}  // namespace hwq
