#pragma once

#include <cstdint>
#include <span>

namespace sieve {

struct BootstrapConfig {
    int replicates = 10000;
    double level = 0.95;
    std::uint64_t seed = 0;
};

struct ConfInterval {
    double lo = 0.0;
    double hi = 0.0;

    bool operator==(const ConfInterval&) const = default;
};

// Percentile bootstrap CI for the mean: `replicates` resamples with
// replacement, endpoints taken as order statistics of the replicate means.
// Replicate r draws from a generator keyed on (seed, r), so the result is
// the same regardless of worker count.
ConfInterval bootstrap_ci(std::span<const double> values, const BootstrapConfig& cfg);

// Two-sided permutation test for a difference in means. Uses the smoothed
// estimate p = (1 + #{|t*| >= |t|}) / (1 + replicates), so p is never 0.
// The pooled values are sorted before permuting, which makes the p-value
// invariant to sample order and to swapping the two samples.
double permutation_test(std::span<const double> a, std::span<const double> b, int replicates,
                        std::uint64_t seed);

}  // namespace sieve
