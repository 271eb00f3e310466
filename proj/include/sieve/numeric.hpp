#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace sieve {

// Neumaier-compensated accumulator. All score aggregation goes through this
// so results do not depend on accumulation luck across inputs of mixed
// magnitude.
struct CompensatedSum {
    double sum = 0.0;
    double comp = 0.0;

    void add(double v) {
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v)) {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }

    double value() const { return sum + comp; }
};

inline double compensated_sum(std::span<const double> values) {
    CompensatedSum acc;
    for (double v : values) acc.add(v);
    return acc.value();
}

// Mean with a remainder-corrected division. The fma recovers the exact
// residual of sum/n, so the mean of n identical values is that value, bit
// for bit, and the general case is correctly rounded up to the compensation
// error of the sum.
inline double compensated_mean(std::span<const double> values) {
    CompensatedSum acc;
    for (double v : values) acc.add(v);
    const double n = static_cast<double>(values.size());
    const double q = acc.sum / n;
    const double r = std::fma(-q, n, acc.sum);
    return q + (r + acc.comp) / n;
}

}  // namespace sieve
