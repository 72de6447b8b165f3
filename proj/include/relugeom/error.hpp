#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace relugeom {

enum class ErrorCode {
  DimensionMismatch,
  RankDeficient,
  NotContracting,
  Overflow,
  DegenerateBias,
  DegenerateDirection,
  AllNegative,
  EmptyPiece,
  InvalidM,
  EmptyIntersection,
  Schema,
};

std::string_view to_string(ErrorCode code);

/// Process exit code for the command-line tool.
/// 1 is reserved for verification failures and never returned here.
int exit_code_for(ErrorCode code);

class GeometryError : public std::runtime_error {
 public:
  GeometryError(ErrorCode code, const std::string& what,
                std::optional<int> depth = std::nullopt)
      : std::runtime_error(what), code_(code), depth_(depth) {}

  ErrorCode code() const noexcept { return code_; }
  /// Layer depth (1-based) for errors raised while composing networks.
  std::optional<int> depth() const noexcept { return depth_; }

 private:
  ErrorCode code_;
  std::optional<int> depth_;
};

}  // namespace relugeom
