#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace geex {

// Runs fn(i) for i in [0, n) across `workers` threads. Callers that need
// reproducible floating-point results must write into per-index slots here
// and reduce in index order afterwards.
template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
    if (workers <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const std::size_t w = static_cast<std::size_t>(workers);
    const std::size_t chunk = (n + w - 1) / w;
    std::vector<std::thread> threads;
    threads.reserve(w);
    for (std::size_t t = 0; t < w; ++t) {
        const std::size_t lo = t * chunk;
        if (lo >= n) break;
        const std::size_t hi = std::min(n, lo + chunk);
        threads.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& th : threads) th.join();
}

}  // namespace geex
