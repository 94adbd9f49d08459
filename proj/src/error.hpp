#pragma once

#include <stdexcept>
#include <string>

namespace cgail {

enum class ErrorCode {
  kInvalidArgument,
  kConfig,
  kIo,
  kSingular,
  kStepSize,
  kNonFinite,
  kDivergence,
  kDegenerate,
  kInfeasible,
};

// Every failure raised by the core carries a code so the C boundary can map
// it onto a status value without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline Error ValidationError(const std::string& what) {
  return Error(ErrorCode::kConfig, what);
}

}  // namespace cgail
