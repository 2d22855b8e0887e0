#pragma once

#include <stdexcept>
#include <string>

namespace podlab {

/// Failure categories. The numeric values are shared with the C API status
/// codes in podlab.h.
enum class ErrorCode : int {
  kInvalidArgument = 1,
  kDimensionMismatch = 2,
  kNonlinearSolveFailure = 3,
  kEmptyBasis = 4,
  kIllConditioned = 5,
  kIo = 6,
  kVerificationFailure = 7,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what)
      : Error(ErrorCode::kInvalidArgument, what) {}
};

class DimensionMismatch : public Error {
 public:
  explicit DimensionMismatch(const std::string& what)
      : Error(ErrorCode::kDimensionMismatch, what) {}
};

/// Newton iteration did not reach the residual tolerance.
class NonlinearSolveFailure : public Error {
 public:
  NonlinearSolveFailure(const std::string& what, double residual, int step)
      : Error(ErrorCode::kNonlinearSolveFailure, what),
        residual_(residual),
        step_(step) {}

  [[nodiscard]] double residual() const noexcept { return residual_; }
  /// Index of the failing time step, or -1 for a single isolated step.
  [[nodiscard]] int step() const noexcept { return step_; }

 private:
  double residual_;
  int step_;
};

class EmptyBasis : public Error {
 public:
  explicit EmptyBasis(const std::string& what)
      : Error(ErrorCode::kEmptyBasis, what) {}
};

class IllConditioned : public Error {
 public:
  explicit IllConditioned(const std::string& what)
      : Error(ErrorCode::kIllConditioned, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCode::kIo, what) {}
};

class VerificationFailure : public Error {
 public:
  explicit VerificationFailure(const std::string& what)
      : Error(ErrorCode::kVerificationFailure, what) {}
};

/// Non-fatal diagnostics (ill-conditioned reduced systems, clamped r values).
/// The default sink writes to stderr; replace it to capture or silence.
using WarningSink = void (*)(const char* message, void* context);
void set_warning_sink(WarningSink sink, void* context);
void warn(const std::string& message);

}  // namespace podlab
