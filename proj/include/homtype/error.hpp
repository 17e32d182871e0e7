#pragma once

#include <stdexcept>
#include <string>

namespace homtype {

// Exit codes shared by the CLI.
enum class ExitCode : int { ok = 0, inconsistent = 1, usage = 2, convergence = 3 };

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
  virtual ExitCode code() const noexcept { return ExitCode::usage; }
};

struct ParameterError : Error {
  using Error::Error;
};

struct DegeneratePairError : Error {
  using Error::Error;
};

// Raised when a sampler would exceed its point budget.
struct ResolutionError : Error {
  double suggested_t_min = 0.0;
  ResolutionError(const std::string& msg, double suggested)
      : Error(msg), suggested_t_min(suggested) {}
};

struct AccuracyError : Error {
  using Error::Error;
  ExitCode code() const noexcept override { return ExitCode::convergence; }
};

struct ConvergenceError : Error {
  using Error::Error;
  ExitCode code() const noexcept override { return ExitCode::convergence; }
};

}  // namespace homtype
