/**
 * @file stats.hpp
 * @brief Order-fixed summation and sample moments for Monte Carlo reductions
 */

#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace mvcone::stats {

/// Pairwise (cascade) summation with a fixed split, so results do not
/// depend on thread count.
inline double pairwise_sum(std::span<const double> x) noexcept {
    if (x.size() <= 8) {
        double s = 0.0;
        for (double v : x) s += v;
        return s;
    }
    const std::size_t h = x.size() / 2;
    return pairwise_sum(x.first(h)) + pairwise_sum(x.subspan(h));
}

struct Moments {
    double mean = 0.0;
    double variance = 0.0;  ///< unbiased sample variance
    double stderr_mean = 0.0;
    std::size_t count = 0;
};

Moments moments(std::span<const double> x);

}  // namespace mvcone::stats
