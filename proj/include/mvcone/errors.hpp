/**
 * @file errors.hpp
 * @brief Named error conditions raised by the solver library
 */

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mvcone {

enum class ErrorCode {
    DimensionMismatch,
    NotPSD,
    NonpositiveIntensity,
    NonpositiveHorizon,
    OutOfRange,
    ProjectionNotConverged,
    NotConverged,
    InvalidState,
    NonPositiveL,
    MinimizerUnbounded,
    GridMismatch,
    DegenerateBase,
    StepTooCoarse,
    InvalidArgument,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every library failure carries one of the named codes above.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace mvcone
