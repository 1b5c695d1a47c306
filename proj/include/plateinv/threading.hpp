#pragma once

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace plateinv {

namespace detail {
inline std::atomic<int>& thread_count_slot() {
    static std::atomic<int> n{1};
    return n;
}
} // namespace detail

inline void set_thread_count(int n) {
    detail::thread_count_slot().store(std::max(1, n));
}

inline int thread_count() { return detail::thread_count_slot().load(); }

/// Static-partition parallel loop. Each index writes only its own outputs, so
/// results are bit-identical for any worker count.
template <typename F>
void parallel_for(int n, F&& body) {
    const int workers = std::min(thread_count(), std::max(1, n));
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    const int chunk = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const int lo = w * chunk;
        const int hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &body] {
            for (int i = lo; i < hi; ++i) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

} // namespace plateinv
