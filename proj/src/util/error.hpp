#pragma once

#include <stdexcept>
#include <string>

namespace nevo {

enum class ErrorCode {
  invalid_genome = 1,
  subspace_mismatch,
  shape_mismatch,
  length_mismatch,
  series_too_short,
  diverged_training,
  family_mismatch,
  architecture_mismatch,
  parse_error,
  config_error,
  data_error,
  io_error,
  missing_artifact,
  invalid_argument,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message)
      : std::runtime_error(std::move(message)), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace nevo
