#pragma once

#include <cstddef>
#include <span>

namespace lossequiv {

/// Blocks at or below this size are summed left to right.
inline constexpr std::size_t pairwise_block = 1024;

/// Pairwise (tree) summation. Error grows as O(log n) ulps instead of O(n)
/// for the naive loop; identical to the naive loop for n <= pairwise_block.
inline double pairwise_sum(std::span<const double> values) noexcept {
    if (values.size() <= pairwise_block) {
        double acc = 0.0;
        for (double v : values) acc += v;
        return acc;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

inline double pairwise_mean(std::span<const double> values) noexcept {
    return values.empty() ? 0.0 : pairwise_sum(values) / static_cast<double>(values.size());
}

}  // namespace lossequiv
