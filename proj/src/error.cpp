#include "chevron/error.hpp"

namespace chevron {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidThickness: return "InvalidThickness";
    case ErrorKind::RealizabilityViolated: return "RealizabilityViolated";
    case ErrorKind::NonPositiveCoefficient: return "NonPositiveCoefficient";
    case ErrorKind::RhoOutOfRange: return "RhoOutOfRange";
    case ErrorKind::InvalidParameter: return "InvalidParameter";
    case ErrorKind::GridTooCoarse: return "GridTooCoarse";
    case ErrorKind::NonFiniteEnergy: return "NonFiniteEnergy";
    case ErrorKind::NonFiniteGradient: return "NonFiniteGradient";
    case ErrorKind::LineSearchStalled: return "LineSearchStalled";
    case ErrorKind::MismatchedGrids: return "MismatchedGrids";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ValidationError: return "ValidationError";
    case ErrorKind::MissingArtifact: return "MissingArtifact";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

ConfigError::ConfigError(ErrorKind kind, std::size_t line, std::string field,
                         const std::string& message)
    : Error(kind, message), line_(line), field_(std::move(field)) {}

}  // namespace chevron
