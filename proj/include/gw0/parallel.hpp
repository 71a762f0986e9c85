#pragma once

#include "gw0/rational.hpp"

#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace gw0 {

// Thread budget from GW0_THREADS (>= 1); default 1. Sweeps must produce
// identical output regardless of the value.
inline int thread_count() {
    const char* env = std::getenv("GW0_THREADS");
    if (!env || !*env) return 1;
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (!end || *end != '\0' || v < 1)
        throw precondition_error("GW0_THREADS must be an integer >= 1");
    return static_cast<int>(v);
}

// Splits [0, n) into contiguous chunks, one worker per chunk. The functor
// receives (lo, hi) and must only write to its own slots.
template <class F>
void parallel_for(std::size_t n, F&& fn) {
    int threads = thread_count();
    if (threads <= 1 || n <= 1) {
        fn(std::size_t{0}, n);
        return;
    }
    std::size_t chunks = std::min<std::size_t>(threads, n);
    std::vector<std::thread> pool;
    pool.reserve(chunks);
    std::size_t base = n / chunks, rem = n % chunks, lo = 0;
    for (std::size_t c = 0; c < chunks; ++c) {
        std::size_t hi = lo + base + (c < rem ? 1 : 0);
        pool.emplace_back([&fn, lo, hi] { fn(lo, hi); });
        lo = hi;
    }
    for (auto& t : pool) t.join();
}

} // namespace gw0
