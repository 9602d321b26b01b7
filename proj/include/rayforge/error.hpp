#pragma once

#include <stdexcept>
#include <string>

namespace rayforge {

enum class ErrorCode {
    InvalidArgument,
    ParseError,
    Overflow,
    DepthOverflow,
    BelowThreshold,
    NoConvergence,
    DegenerateMap,
    OverlapError,
    DepthExhausted,
    IndexError,
    SameEntry,
    ZeroInput,
    MissingPoint,
    DegeneratePair,
    ContinuationJump,
    NonConvergence,
    SingularJacobian,
    StepTooLarge,
};

constexpr const char* error_name(ErrorCode code)
{
    switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::DepthOverflow: return "DepthOverflow";
    case ErrorCode::BelowThreshold: return "BelowThreshold";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::DegenerateMap: return "DegenerateMap";
    case ErrorCode::OverlapError: return "OverlapError";
    case ErrorCode::DepthExhausted: return "DepthExhausted";
    case ErrorCode::IndexError: return "IndexError";
    case ErrorCode::SameEntry: return "SameEntry";
    case ErrorCode::ZeroInput: return "ZeroInput";
    case ErrorCode::MissingPoint: return "MissingPoint";
    case ErrorCode::DegeneratePair: return "DegeneratePair";
    case ErrorCode::ContinuationJump: return "ContinuationJump";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::SingularJacobian: return "SingularJacobian";
    case ErrorCode::StepTooLarge: return "StepTooLarge";
    }
    return "Unknown";
}

/// Every failure raised by the library. The message is prefixed with the
/// error name so that CLI output identifies the violated condition.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code)
    {
    }

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace rayforge
