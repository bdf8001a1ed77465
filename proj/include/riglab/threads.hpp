#pragma once

// Deterministic worker-pool helpers.  Work is split into fixed-size chunks
// whose boundaries do not depend on the worker count; callers combine
// per-chunk results in chunk order, so output bits never depend on
// RIGLAB_THREADS.

#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace riglab {

inline unsigned worker_count() {
    if (const char* env = std::getenv("RIGLAB_THREADS")) {
        long n = std::strtol(env, nullptr, 10);
        if (n >= 1 && n <= 1024) return static_cast<unsigned>(n);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

// Runs fn(chunk_index, begin, end) over [0, n) in chunks of `chunk` items.
// Chunks may execute on any worker; fn must write only chunk-local state
// (e.g. results[chunk_index]).
inline void parallel_chunks(std::size_t n, std::size_t chunk,
                            const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
    if (n == 0) return;
    std::size_t nchunks = (n + chunk - 1) / chunk;
    unsigned workers = worker_count();
    if (workers <= 1 || nchunks <= 1) {
        for (std::size_t k = 0; k < nchunks; ++k) fn(k, k * chunk, std::min(n, (k + 1) * chunk));
        return;
    }
    std::atomic<std::size_t> next{0};
    auto drain = [&] {
        for (;;) {
            std::size_t k = next.fetch_add(1);
            if (k >= nchunks) return;
            fn(k, k * chunk, std::min(n, (k + 1) * chunk));
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(drain);
    drain();
    for (auto& t : pool) t.join();
}

}  // namespace riglab
