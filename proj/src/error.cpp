#include "geneo/error.hpp"

namespace geneo {

std::string_view to_string(ErrorCode code)
{
  switch (code) {
  case ErrorCode::DimensionMismatch: return "DimensionMismatch";
  case ErrorCode::InvalidArgument: return "InvalidArgument";
  case ErrorCode::StructurallySingular: return "StructurallySingular";
  case ErrorCode::NumericallySingular: return "NumericallySingular";
  case ErrorCode::DimensionTooLarge: return "DimensionTooLarge";
  case ErrorCode::SingularPencil: return "SingularPencil";
  case ErrorCode::ShiftSingular: return "ShiftSingular";
  case ErrorCode::NoConvergence: return "NoConvergence";
  case ErrorCode::OutOfDomain: return "OutOfDomain";
  case ErrorCode::TooCoarse: return "TooCoarse";
  case ErrorCode::NotPerfectSquare: return "NotPerfectSquare";
  case ErrorCode::SubdomainTooSmall: return "SubdomainTooSmall";
  case ErrorCode::BadSubdomainIndex: return "BadSubdomainIndex";
  case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
  case ErrorCode::SubdomainSingular: return "SubdomainSingular";
  case ErrorCode::CoarseSingular: return "CoarseSingular";
  case ErrorCode::Breakdown: return "Breakdown";
  case ErrorCode::ParseError: return "ParseError";
  case ErrorCode::UnknownKey: return "UnknownKey";
  case ErrorCode::IOError: return "IOError";
  }
  return "Unknown";
}

} // namespace geneo
