#pragma once

#include <limits>
#include <stdexcept>
#include <string>

namespace stochmatch {

enum class ErrorCode {
  kInvalidArgument = 1,
  kParse = 2,
  kIo = 3,
  kTooLarge = 4,
  kLpFailure = 5,
};

// Single exception type for the core; the C API maps `code()` onto its status
// enum.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool ok, const std::string& what) {
  if (!ok) fail(ErrorCode::kInvalidArgument, what);
}

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline constexpr const char* kVersion = "0.1.0";

}  // namespace stochmatch
