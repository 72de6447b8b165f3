#include "relugeom/error.hpp"

namespace relugeom {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::NotContracting: return "NotContracting";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::DegenerateBias: return "DegenerateBias";
    case ErrorCode::DegenerateDirection: return "DegenerateDirection";
    case ErrorCode::AllNegative: return "AllNegative";
    case ErrorCode::EmptyPiece: return "EmptyPiece";
    case ErrorCode::InvalidM: return "InvalidM";
    case ErrorCode::EmptyIntersection: return "EmptyIntersection";
    case ErrorCode::Schema: return "Schema";
  }
  return "Unknown";
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::Schema:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::InvalidM:
    case ErrorCode::NotContracting:
      return 2;
    case ErrorCode::RankDeficient:
    case ErrorCode::DegenerateBias:
    case ErrorCode::DegenerateDirection:
    case ErrorCode::AllNegative:
    case ErrorCode::EmptyPiece:
    case ErrorCode::EmptyIntersection:
      return 3;
    case ErrorCode::Overflow:
      return 4;
  }
  return 2;
}

}  // namespace relugeom
