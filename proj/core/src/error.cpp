#include "sttrend/error.hpp"

namespace sttrend {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::CollinearInput: return "CollinearInput";
    case ErrorCode::InvalidParameters: return "InvalidParameters";
    case ErrorCode::PointOutsideMesh: return "PointOutsideMesh";
    case ErrorCode::DegenerateTriangle: return "DegenerateTriangle";
    case ErrorCode::NonPositiveParameter: return "NonPositiveParameter";
    case ErrorCode::PhiOutOfRange: return "PhiOutOfRange";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::EmptySeason: return "EmptySeason";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::MissingConstants: return "MissingConstants";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::InputMissing: return "InputMissing";
    case ErrorCode::InvalidInput: return "InvalidInput";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace sttrend
