#include "sieve/parallel.hpp"

#include <charconv>
#include <cstdlib>
#include <string_view>
#include <thread>
#include <vector>

#include "sieve/error.hpp"

namespace sieve {

unsigned worker_count() {
    unsigned workers = 0;
    if (const char* env = std::getenv("JUDGMENT_SIEVE_THREADS")) {
        std::string_view s(env);
        unsigned parsed = 0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), parsed);
        if (ec != std::errc() || ptr != s.data() + s.size()) {
            throw Error("JUDGMENT_SIEVE_THREADS must be a nonnegative integer, got '" +
                        std::string(s) + "'");
        }
        workers = parsed;
    }
    if (workers == 0) {
        workers = std::thread::hardware_concurrency();
        if (workers == 0) workers = 1;
    }
    return workers;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn) {
    if (n == 0) return;
    const std::size_t workers = std::min<std::size_t>(worker_count(), n);
    if (workers <= 1) {
        fn(0, n);
        return;
    }
    const std::size_t chunk = (n + workers - 1) / workers;
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(lo + chunk, n);
        if (lo >= hi) break;
        threads.emplace_back([&fn, lo, hi] { fn(lo, hi); });
    }
    for (auto& t : threads) t.join();
}

}  // namespace sieve
