#include "mvcone/errors.hpp"

namespace mvcone {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::NotPSD: return "NotPSD";
        case ErrorCode::NonpositiveIntensity: return "NonpositiveIntensity";
        case ErrorCode::NonpositiveHorizon: return "NonpositiveHorizon";
        case ErrorCode::OutOfRange: return "OutOfRange";
        case ErrorCode::ProjectionNotConverged: return "ProjectionNotConverged";
        case ErrorCode::NotConverged: return "NotConverged";
        case ErrorCode::InvalidState: return "InvalidState";
        case ErrorCode::NonPositiveL: return "NonPositiveL";
        case ErrorCode::MinimizerUnbounded: return "MinimizerUnbounded";
        case ErrorCode::GridMismatch: return "GridMismatch";
        case ErrorCode::DegenerateBase: return "DegenerateBase";
        case ErrorCode::StepTooCoarse: return "StepTooCoarse";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace mvcone
