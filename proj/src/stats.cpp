#include "mvcone/stats.hpp"

#include <vector>

namespace mvcone::stats {

Moments moments(std::span<const double> x) {
    Moments m;
    m.count = x.size();
    if (x.empty()) return m;
    m.mean = pairwise_sum(x) / static_cast<double>(x.size());
    if (x.size() < 2) return m;
    std::vector<double> sq(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) sq[i] = (x[i] - m.mean) * (x[i] - m.mean);
    m.variance = pairwise_sum(sq) / static_cast<double>(x.size() - 1);
    m.stderr_mean = std::sqrt(m.variance / static_cast<double>(x.size()));
    return m;
}

}  // namespace mvcone::stats
