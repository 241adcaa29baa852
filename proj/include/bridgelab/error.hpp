#pragma once

#include <stdexcept>
#include <string>

namespace bridgelab {

/// Failure categories shared by every module. The numeric values are mirrored
/// one-to-one by the status codes of the C API.
enum class ErrorCode {
  Domain = 1,
  DomainEscape,
  NonFinite,
  NoConvergence,
  MaxIterations,
  UnsupportedKind,
  UnsupportedEndpoints,
  NonUniformGrid,
  OffGrid,
  OutOfRange,
  DegenerateSeries,
  MissingPrerequisite,
  Config,
  InvalidArgument,
  Io,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace bridgelab
