#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace raid {

/// Machine-readable error categories shared by the library, CLI and service.
enum class ErrorCode {
  InvalidPolygon,
  DegenerateRegion,
  EmptyRelationship,
  NotFound,
  Conflict,
  ConfigMismatch,
  BadRequest,
  Parse,
  Io,
};

/// Stable snake_case name, e.g. "degenerate_region".
std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace raid
