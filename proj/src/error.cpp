#include "minkflow/error.hpp"

namespace minkflow {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_dimension: return "invalid-dimension";
    case ErrorCode::resolution_too_small: return "resolution-too-small";
    case ErrorCode::size_mismatch: return "size-mismatch";
    case ErrorCode::grid_mismatch: return "grid-mismatch";
    case ErrorCode::non_convex: return "non-convex";
    case ErrorCode::degenerate_direction: return "degenerate-direction";
    case ErrorCode::invalid_params: return "invalid-params";
    case ErrorCode::dt_underflow: return "dt-underflow";
    case ErrorCode::extinction: return "extinction";
    case ErrorCode::not_converged: return "not-converged";
    case ErrorCode::io: return "io";
    case ErrorCode::config: return "config";
  }
  return "unknown";
}

}  // namespace minkflow
