#pragma once

#include <cmath>
#include <cstddef>

namespace envindex {

// Neumaier-compensated accumulator. All reductions that feed reported
// numbers go through this (or the fixed 4-lane variant in hjb.cpp) in a
// fixed index order, so results do not depend on the worker count.
struct KahanSum {
    double sum = 0.0;
    double comp = 0.0;

    void add(double term) {
        const double t = sum + term;
        if (std::abs(sum) >= std::abs(term))
            comp += (sum - t) + term;
        else
            comp += (term - t) + sum;
        sum = t;
    }
    double value() const { return sum + comp; }
};

// 1 - (1 + y) e^{-y} for y >= 0.  This is the unit relative entropy of the
// distortion e^{-y}; the direct expression cancels for small y, so a series
// takes over below 0.5.
inline double entropy_at_exp(double y) {
    if (y < 0.5) {
        // sum_{k>=2} (-1)^k (k-1)/k! y^k; term ratio t_{k+1}/t_k = -y k / ((k+1)(k-1))
        double term = 0.5 * y * y;
        double sum = term;
        for (double k = 2.0; k < 40.0; k += 1.0) {
            term *= -y * k / ((k + 1.0) * (k - 1.0));
            sum += term;
            if (std::abs(term) <= 1e-18 * std::abs(sum)) break;
        }
        return sum;
    }
    return 1.0 - (1.0 + y) * std::exp(-y);
}

// phi ln phi - phi + 1 for phi > 0, stable near phi = 1.
inline double relative_entropy_unit(double phi) {
    const double u = phi - 1.0;
    if (std::abs(u) < 1e-4)
        return u * u * (0.5 - u / 6.0 + u * u / 12.0);
    return std::fma(phi, std::log(phi), 1.0 - phi);
}

} // namespace envindex
