#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace sle {

// Replica-parallel loop.  Tasks are keyed by index and write only to their
// own slots, so the result is identical for any worker count; scheduling is
// dynamic (atomic counter) since per-task cost varies wildly.
inline void parallel_for(size_t n, int workers, const std::function<void(size_t)>& body) {
    if (workers <= 1 || n <= 1) {
        for (size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<size_t> next{0};
    auto run = [&]() {
        for (;;) {
            size_t i = next.fetch_add(1);
            if (i >= n) return;
            body(i);
        }
    };
    std::vector<std::thread> pool;
    const int k = std::min<int>(workers, static_cast<int>(n));
    pool.reserve(static_cast<size_t>(k));
    for (int w = 0; w < k; ++w) pool.emplace_back(run);
    for (auto& t : pool) t.join();
}

} // namespace sle
