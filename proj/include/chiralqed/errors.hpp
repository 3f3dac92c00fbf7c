#pragma once

// Error classes shared by all modules. Every failure carries a kind so the CLI
// can map it onto a process exit code.

#include <stdexcept>
#include <string>
#include <string_view>

namespace chiralqed {

enum class ErrorKind {
    InvalidConfig,
    UnknownTag,
    StepTooLarge,
    NonFiniteValue,
    OutOfRange,
    PoleCollision,
    OrderTooHigh,
    DegeneratePoles,
    PreconditionViolated,
    SourceRangeExceeded,
    BandwidthTooSmall,
    RecurrenceTooShort,
    OutOfBox,
    PrecisionLoss,
};

inline constexpr std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::InvalidConfig: return "InvalidConfig";
        case ErrorKind::UnknownTag: return "UnknownTag";
        case ErrorKind::StepTooLarge: return "StepTooLarge";
        case ErrorKind::NonFiniteValue: return "NonFiniteValue";
        case ErrorKind::OutOfRange: return "OutOfRange";
        case ErrorKind::PoleCollision: return "PoleCollision";
        case ErrorKind::OrderTooHigh: return "OrderTooHigh";
        case ErrorKind::DegeneratePoles: return "DegeneratePoles";
        case ErrorKind::PreconditionViolated: return "PreconditionViolated";
        case ErrorKind::SourceRangeExceeded: return "SourceRangeExceeded";
        case ErrorKind::BandwidthTooSmall: return "BandwidthTooSmall";
        case ErrorKind::RecurrenceTooShort: return "RecurrenceTooShort";
        case ErrorKind::OutOfBox: return "OutOfBox";
        case ErrorKind::PrecisionLoss: return "PrecisionLoss";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Process exit code for an error kind: 2 config, 3 numerical, 4 precondition.
inline constexpr int exit_code(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::InvalidConfig:
        case ErrorKind::UnknownTag:
            return 2;
        case ErrorKind::NonFiniteValue:
        case ErrorKind::PoleCollision:
        case ErrorKind::OrderTooHigh:
        case ErrorKind::PrecisionLoss:
            return 3;
        default:
            return 4;
    }
}

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace chiralqed
