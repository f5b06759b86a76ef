#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace chevron {

enum class ErrorKind {
  InvalidThickness,
  RealizabilityViolated,
  NonPositiveCoefficient,
  RhoOutOfRange,
  InvalidParameter,
  GridTooCoarse,
  NonFiniteEnergy,
  NonFiniteGradient,
  LineSearchStalled,
  MismatchedGrids,
  ParseError,
  ValidationError,
  MissingArtifact,
  IoError,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Raised by the config loader. `line` is 1-based, 0 when not tied to a line.
class ConfigError : public Error {
 public:
  ConfigError(ErrorKind kind, std::size_t line, std::string field, const std::string& message);

  std::size_t line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

}  // namespace chevron
