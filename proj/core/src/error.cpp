#include "raid/error.hpp"

namespace raid {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidPolygon: return "invalid_polygon";
    case ErrorCode::DegenerateRegion: return "degenerate_region";
    case ErrorCode::EmptyRelationship: return "empty_relationship";
    case ErrorCode::NotFound: return "not_found";
    case ErrorCode::Conflict: return "conflict";
    case ErrorCode::ConfigMismatch: return "config_mismatch";
    case ErrorCode::BadRequest: return "bad_request";
    case ErrorCode::Parse: return "parse_error";
    case ErrorCode::Io: return "io_error";
  }
  return "unknown";
}

}  // namespace raid
