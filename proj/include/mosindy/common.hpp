#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mosindy {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

enum class ErrorCode {
    InvalidArgument,
    DimensionMismatch,
    ShapeMismatch,
    EmptyData,
    EmptyMatrix,
    TooFewSamples,
    StepUnderflow,
    NonFinite,
    NoConvergence,
    WrongStability,
    KindMismatch,
    InfeasibleConstraints,
    UnknownSystem,
    Config,
    Io,
};

[[nodiscard]] constexpr std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::ShapeMismatch: return "ShapeMismatch";
        case ErrorCode::EmptyData: return "EmptyData";
        case ErrorCode::EmptyMatrix: return "EmptyMatrix";
        case ErrorCode::TooFewSamples: return "TooFewSamples";
        case ErrorCode::StepUnderflow: return "StepUnderflow";
        case ErrorCode::NonFinite: return "NonFinite";
        case ErrorCode::NoConvergence: return "NoConvergence";
        case ErrorCode::WrongStability: return "WrongStability";
        case ErrorCode::KindMismatch: return "KindMismatch";
        case ErrorCode::InfeasibleConstraints: return "InfeasibleConstraints";
        case ErrorCode::UnknownSystem: return "UnknownSystem";
        case ErrorCode::Config: return "Config";
        case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

/// Numerical failures (as opposed to bad input or IO) map to a distinct CLI exit code.
[[nodiscard]] constexpr bool is_numerical(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::StepUnderflow:
        case ErrorCode::NonFinite:
        case ErrorCode::NoConvergence:
        case ErrorCode::WrongStability:
        case ErrorCode::InfeasibleConstraints:
        case ErrorCode::TooFewSamples:
        case ErrorCode::EmptyMatrix:
            return true;
        default:
            return false;
    }
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

inline void require(bool condition, ErrorCode code, const std::string& what) {
    if (!condition) throw Error(code, what);
}

}  // namespace mosindy
