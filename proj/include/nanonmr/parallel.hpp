#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace nanonmr {

inline std::size_t resolve_thread_count(std::size_t requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

// Static partition of [0, n) across threads. Each index must be independent
// and write only to its own output slot, so results do not depend on the
// thread count.
template <class Fn>
void parallel_for_index(std::size_t n, std::size_t n_threads, Fn&& fn) {
    n_threads = resolve_thread_count(n_threads);
    if (n == 0) return;
    if (n_threads <= 1 || n == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    if (n_threads > n) n_threads = n;
    std::vector<std::thread> workers;
    workers.reserve(n_threads);
    const std::size_t chunk = (n + n_threads - 1) / n_threads;
    for (std::size_t w = 0; w < n_threads; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        workers.emplace_back([begin, end, &fn] {
            for (std::size_t i = begin; i < end; ++i) fn(i);
        });
    }
    for (auto& t : workers) t.join();
}

}  // namespace nanonmr
