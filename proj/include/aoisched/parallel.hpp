#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace aoisched::detail {

inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Static partition of [0, n) into contiguous chunks, one per thread.
/// Each chunk writes disjoint outputs, so results are identical for any
/// thread count.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
    const int t = resolve_threads(threads);
    if (t <= 1 || n < 2048) {
        fn(std::size_t{0}, n);
        return;
    }
    const std::size_t chunk = (n + static_cast<std::size_t>(t) - 1) /
                              static_cast<std::size_t>(t);
    std::vector<std::thread> workers;
    workers.reserve(static_cast<std::size_t>(t));
    for (int i = 0; i < t; ++i) {
        const std::size_t begin = static_cast<std::size_t>(i) * chunk;
        if (begin >= n) break;
        const std::size_t end = std::min(n, begin + chunk);
        workers.emplace_back([begin, end, &fn] { fn(begin, end); });
    }
    for (auto& w : workers) w.join();
}

}  // namespace aoisched::detail
