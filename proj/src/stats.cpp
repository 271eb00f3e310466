#include "sieve/stats.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <vector>

#include "sieve/error.hpp"
#include "sieve/numeric.hpp"
#include "sieve/parallel.hpp"
#include "sieve/rng.hpp"

namespace sieve {
namespace {

// Distinct stream ids keep bootstrap and permutation draws independent even
// under a shared seed.
constexpr std::uint64_t kBootstrapStream = 0xB007;
constexpr std::uint64_t kPermutationStream = 0x9E27;

// Nearest-rank order statistic of a sorted vector.
double order_stat(const std::vector<double>& sorted, double q) {
    const auto n = static_cast<double>(sorted.size());
    const double rank = std::ceil(q * n);
    std::size_t idx = 0;
    if (rank >= 1.0) {
        idx = static_cast<std::size_t>(std::min(rank, n)) - 1;
    }
    return sorted[idx];
}

}  // namespace

ConfInterval bootstrap_ci(std::span<const double> values, const BootstrapConfig& cfg) {
    if (values.empty()) {
        throw Error("bootstrap_ci: empty input");
    }
    if (cfg.replicates < 1) {
        throw Error("bootstrap_ci: replicates must be >= 1");
    }
    if (!(cfg.level > 0.0 && cfg.level < 1.0)) {
        throw Error("bootstrap_ci: level must lie in (0, 1)");
    }

    const std::size_t n = values.size();
    const auto replicates = static_cast<std::size_t>(cfg.replicates);
    std::vector<double> means(replicates);
    parallel_for(replicates, [&](std::size_t lo, std::size_t hi) {
        std::vector<double> resample(n);
        for (std::size_t r = lo; r < hi; ++r) {
            auto rng = make_rng(substream_key(cfg.seed, kBootstrapStream, r));
            for (std::size_t i = 0; i < n; ++i) {
                resample[i] = values[next_below(rng, n)];
            }
            means[r] = compensated_mean(resample);
        }
    });

    std::sort(means.begin(), means.end());
    const double alpha = 1.0 - cfg.level;
    return {order_stat(means, alpha / 2.0), order_stat(means, 1.0 - alpha / 2.0)};
}

double permutation_test(std::span<const double> a, std::span<const double> b, int replicates,
                        std::uint64_t seed) {
    if (a.empty() || b.empty()) {
        throw Error("permutation_test: both samples must be nonempty");
    }
    if (replicates < 1) {
        throw Error("permutation_test: replicates must be >= 1");
    }

    const double observed = std::abs(compensated_mean(a) - compensated_mean(b));

    std::vector<double> pooled;
    pooled.reserve(a.size() + b.size());
    pooled.insert(pooled.end(), a.begin(), a.end());
    pooled.insert(pooled.end(), b.begin(), b.end());
    std::sort(pooled.begin(), pooled.end());

    const std::size_t total = pooled.size();
    const std::size_t small = std::min(a.size(), b.size());
    const double pooled_sum = compensated_sum(pooled);

    const auto reps = static_cast<std::size_t>(replicates);
    std::atomic<std::size_t> exceed{0};
    parallel_for(reps, [&](std::size_t lo, std::size_t hi) {
        std::vector<double> buf(total);
        std::size_t local = 0;
        for (std::size_t r = lo; r < hi; ++r) {
            auto rng = make_rng(substream_key(seed, kPermutationStream, r));
            std::copy(pooled.begin(), pooled.end(), buf.begin());
            // Partial Fisher-Yates: only the smaller group needs selecting.
            for (std::size_t i = 0; i < small; ++i) {
                const std::size_t j = i + next_below(rng, total - i);
                std::swap(buf[i], buf[j]);
            }
            const double small_sum = compensated_sum(std::span(buf).first(small));
            const double mean_small = small_sum / static_cast<double>(small);
            const double mean_rest =
                (pooled_sum - small_sum) / static_cast<double>(total - small);
            if (std::abs(mean_small - mean_rest) >= observed) {
                ++local;
            }
        }
        exceed.fetch_add(local, std::memory_order_relaxed);
    });

    return (1.0 + static_cast<double>(exceed.load())) / (1.0 + static_cast<double>(replicates));
}

}  // namespace sieve
