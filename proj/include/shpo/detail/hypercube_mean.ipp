#pragma once

#include <string>

#include "shpo/error.hpp"

namespace shpo {

template <class Fn>
double hypercube_mean(std::size_t n, Fn&& fn)
{
    if (n > max_exhaustive_dimension) {
        throw LimitError("exhaustive scan over 2^" + std::to_string(n) + " points exceeds limit 2^" +
                         std::to_string(max_exhaustive_dimension));
    }
    const std::uint64_t points = std::uint64_t{1} << n;
    long double sum = 0.0L;
    for (std::uint64_t rank = 0; rank < points; ++rank) {
        sum += fn(Configuration::from_lex_rank(rank, n));
    }
    return static_cast<double>(sum / static_cast<long double>(points));
}

} // namespace shpo
