#include "collapse/error.hpp"

namespace collapse {

std::string_view to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::AllZero: return "AllZero";
    case ErrorCode::TooFewStates: return "TooFewStates";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DegenerateGrid: return "DegenerateGrid";
    case ErrorCode::NoAlivePair: return "NoAlivePair";
    case ErrorCode::MaxStepsExceeded: return "MaxStepsExceeded";
    case ErrorCode::TooManyExcluded: return "TooManyExcluded";
    case ErrorCode::OracleMismatch: return "OracleMismatch";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::NoRealRoot: return "NoRealRoot";
    case ErrorCode::RejectionStall: return "RejectionStall";
    case ErrorCode::UsageError: return "UsageError";
    }
    return "Unknown";
}

}  // namespace collapse
