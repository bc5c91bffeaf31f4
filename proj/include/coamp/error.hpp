// error.hpp - exception type shared by every coamp module.
#pragma once

#include <stdexcept>
#include <string>

namespace coamp {

enum class ErrorCode {
  InvalidArgument,
  DimensionMismatch,
  DimensionOverflow,
  NotPsd,
  IllConditioned,
  Inconclusive,
  NumericFailure,
  Io,
};

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

}  // namespace coamp
