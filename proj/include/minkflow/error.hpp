#pragma once

#include <stdexcept>
#include <string>

namespace minkflow {

enum class ErrorCode {
  invalid_dimension,
  resolution_too_small,
  size_mismatch,
  grid_mismatch,
  non_convex,
  degenerate_direction,
  invalid_params,
  dt_underflow,
  extinction,
  not_converged,
  io,
  config,
};

const char* to_string(ErrorCode code);

// Every library failure carries a machine-checkable code; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace minkflow
