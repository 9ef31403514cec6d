#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sttrend {

enum class ErrorCode {
  NotPositiveDefinite,
  DimensionMismatch,
  IndexOutOfRange,
  CollinearInput,
  InvalidParameters,
  PointOutsideMesh,
  DegenerateTriangle,
  NonPositiveParameter,
  PhiOutOfRange,
  InsufficientSamples,
  NoConvergence,
  EmptySeason,
  ZeroVariance,
  MissingConstants,
  ConfigInvalid,
  InputMissing,
  InvalidInput,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Library exception. Every failure the library reports carries a code so
/// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace sttrend
