#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace persuade {

enum class ErrorKind {
  // model
  BadRates,
  BadSupport,
  NonMonotoneLevels,
  EnvelopeViolation,
  OutOfRange,
  DeltaTooLarge,
  AtStationaryBelief,
  BadConfig,
  // dynamics
  PriorOutsideBracket,
  DegenerateBracket,
  WrongSideOfStationary,
  Unreachable,
  BracketDoesNotStraddle,
  // solver
  NoRoot,
  MultiRoot,
  BadBoundary,
  // oracle / sim
  NoConvergence,
  GridTooCoarse,
  PolicyGap,
  BracketViolation,
  HorizonTooShort,
  // files
  Io,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace persuade
