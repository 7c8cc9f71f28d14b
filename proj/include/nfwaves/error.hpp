#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace nfwaves {

enum class ErrorCode {
  InvalidArgument,
  InvalidKernel,
  NoBracket,
  QuadratureFailed,
  NotBistable,
  MaxIterations,
  LostMonotonicity,
  BadGuess,
  OrderingViolated,
  ComplexBranch,
  SymmetryViolated,
  NonFinite,
  PoorFit,
  Config,
};

std::string_view to_string(ErrorCode code);

// All library failures are reported through this type. `tau` is attached by
// the continuation driver when a solve fails mid-sweep.
class SolverError : public std::runtime_error {
 public:
  SolverError(ErrorCode code, const std::string& what, std::optional<double> tau = std::nullopt)
      : std::runtime_error(what), code_(code), tau_(tau) {}

  ErrorCode code() const noexcept { return code_; }
  std::optional<double> tau() const noexcept { return tau_; }

 private:
  ErrorCode code_;
  std::optional<double> tau_;
};

}  // namespace nfwaves
