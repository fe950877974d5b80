#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace collapse {

enum class ErrorCode {
    AllZero,
    TooFewStates,
    InvalidArgument,
    DegenerateGrid,
    NoAlivePair,
    MaxStepsExceeded,
    TooManyExcluded,
    OracleMismatch,
    NoConvergence,
    NoRealRoot,
    RejectionStall,
    UsageError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the toolkit carries one of the codes above so the
/// CLI can map it onto an exit status.
class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code)
    {
    }

    ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

}  // namespace collapse
