// Small statistics helpers for the Monte Carlo checks.
#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace qpbs {

inline double chi_square_stat(const std::vector<long long>& counts,
                              const std::vector<double>& expected) {
    if (counts.size() != expected.size() || counts.empty()) {
        throw std::invalid_argument("chi_square_stat: size mismatch");
    }
    double stat = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (expected[i] <= 0.0) {
            throw std::invalid_argument("chi_square_stat: nonpositive expectation");
        }
        const double d = static_cast<double>(counts[i]) - expected[i];
        stat += d * d / expected[i];
    }
    return stat;
}

// Upper critical values of the chi-square distribution at p = 0.001 for the
// degrees of freedom used in this project (standard table values).
inline double chi_square_critical_p001(int df) {
    switch (df) {
        case 1: return 10.828;
        case 3: return 16.266;
        case 15: return 37.697;
        default: throw std::invalid_argument("chi_square_critical_p001: df not tabulated");
    }
}

// Standard deviation of an empirical frequency over n Bernoulli(p) trials.
inline double binomial_sigma(double p, long long n) {
    return std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

inline bool within_sigma(double observed, double p, long long n, double k) {
    return std::abs(observed - p) <= k * binomial_sigma(p, n);
}

}  // namespace qpbs
