/**
 * @file execution.hpp
 * @brief Serial/parallel switch for the kernels that have an OpenMP version
 */

#pragma once

namespace mvcone {

/// Serial is the reference implementation; Parallel must reproduce it bitwise.
enum class Execution { Serial, Parallel };

}  // namespace mvcone
