#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace geneo {

enum class ErrorCode {
  DimensionMismatch,
  InvalidArgument,
  StructurallySingular,
  NumericallySingular,
  DimensionTooLarge,
  SingularPencil,
  ShiftSingular,
  NoConvergence,
  OutOfDomain,
  TooCoarse,
  NotPerfectSquare,
  SubdomainTooSmall,
  BadSubdomainIndex,
  IndexOutOfRange,
  SubdomainSingular,
  CoarseSingular,
  Breakdown,
  ParseError,
  UnknownKey,
  IOError,
};

std::string_view to_string(ErrorCode code);

/// Exception carrying a machine-readable code alongside the message.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string &what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code)
  {
  }

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

} // namespace geneo
