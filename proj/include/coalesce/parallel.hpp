#pragma once

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace coalesce {

/// Thread count: COALESCE_THREADS if set, else hardware concurrency.
inline unsigned thread_count() {
    if (const char* env = std::getenv("COALESCE_THREADS")) {
        long v = std::atol(env);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

/// Runs worker(i) for i in [0, n) across threads. Results land in a vector
/// indexed by i, so any later reduction has a fixed summation order and the
/// outcome is independent of the schedule.
template <typename T>
std::vector<T> parallel_map(long n, const std::function<T(long)>& worker) {
    std::vector<T> out(static_cast<std::size_t>(n));
    unsigned threads = thread_count();
    if (threads <= 1 || n <= 1) {
        for (long i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = worker(i);
        return out;
    }
    std::vector<std::thread> pool;
    std::size_t nt = std::min<std::size_t>(threads, static_cast<std::size_t>(n));
    pool.reserve(nt);
    for (std::size_t t = 0; t < nt; ++t) {
        pool.emplace_back([&, t] {
            for (long i = static_cast<long>(t); i < n; i += static_cast<long>(nt))
                out[static_cast<std::size_t>(i)] = worker(i);
        });
    }
    for (auto& th : pool) th.join();
    return out;
}

} // namespace coalesce
