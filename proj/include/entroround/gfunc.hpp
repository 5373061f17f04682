// Entropy bound G and its inverse.
//
// g_bound(lambda) caps the signature entropy contributed by one row whose
// slack is lambda standard deviations; g_inverse(b) returns the slack needed
// to push that contribution below b bits. Both are non-increasing and satisfy
// g_bound(g_inverse(b)) <= b for every b > 0.
#pragma once

#include <cmath>
#include <stdexcept>

namespace entroround {

inline double g_bound(double lambda) {
    if (!(lambda > 0.0))
        throw std::invalid_argument("g_bound: lambda must be positive");
    if (lambda >= 2.0) return 9.0 * std::exp(-lambda * lambda / 5.0);
    return std::log2(32.0 + 64.0 / lambda);
}

inline double g_inverse(double bits) {
    if (!(bits > 0.0))
        throw std::invalid_argument("g_inverse: bits must be positive");
    if (bits <= 6.0) return std::sqrt(10.0 * std::log(9.0 / bits));
    return 128.0 * std::pow(0.5, bits);
}

}  // namespace entroround
