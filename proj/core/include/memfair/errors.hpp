#ifndef MEMFAIR_ERRORS_HPP_
#define MEMFAIR_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace memfair {

enum class ErrorCode {
  Syntax,
  UndeclaredLocation,
  DanglingLabel,
  UnsupportedLoop,
  SilentLoop,
  NotEnabled,
  BoundExceeded,
  Cyclic,
  NotPrefixClosed,
  UnpropagatedWrite,
  InconsistentInput,
  Internal,
};

const char* error_code_name(ErrorCode c);

/// Error type thrown by the parser, the machines and the analyses.
/// `code()` identifies the condition; `what()` carries position/context.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& msg)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + msg),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace memfair

#endif  // MEMFAIR_ERRORS_HPP_
