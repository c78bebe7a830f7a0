#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace aoisched {

/// Instantaneous age vector, one entry per device, each in [1, delta_max].
using AgeState = std::vector<int>;

/// Post-elimination action: schedule the k devices with the largest current
/// ages (ties broken toward the lowest device index).
struct ScheduleAction {
    int k = 0;
};

/// Number of states (delta_max)^K, throwing if it does not fit the dense
/// table addressing used throughout.
inline std::size_t checked_state_count(int num_devices, int delta_max) {
    if (num_devices < 1) throw std::invalid_argument("state count: num_devices must be >= 1");
    if (delta_max < 1) throw std::invalid_argument("state count: delta_max must be >= 1");
    std::size_t n = 1;
    const std::size_t limit = std::size_t{1} << 31;
    for (int i = 0; i < num_devices; ++i) {
        n *= static_cast<std::size_t>(delta_max);
        if (n > limit)
            throw std::invalid_argument("state count: (delta_max)^K exceeds dense table limit");
    }
    return n;
}

/// Mixed-radix encoding with device 0 as the most significant digit;
/// the all-ones state maps to index 0.
inline std::size_t state_index(const AgeState& s, int delta_max) {
    std::size_t idx = 0;
    for (int age : s) {
        if (age < 1 || age > delta_max)
            throw std::domain_error("state_index: age outside [1, delta_max]");
        idx = idx * static_cast<std::size_t>(delta_max) +
              static_cast<std::size_t>(age - 1);
    }
    return idx;
}

inline AgeState state_from_index(std::size_t idx, int num_devices, int delta_max) {
    if (idx >= checked_state_count(num_devices, delta_max))
        throw std::domain_error("state_from_index: index out of range");
    AgeState s(static_cast<std::size_t>(num_devices));
    for (int i = num_devices - 1; i >= 0; --i) {
        s[static_cast<std::size_t>(i)] =
            static_cast<int>(idx % static_cast<std::size_t>(delta_max)) + 1;
        idx /= static_cast<std::size_t>(delta_max);
    }
    return s;
}

/// Devices scheduled by action k: the indices of the k largest ages, ties
/// resolved toward the lowest index. Returned in ascending device order.
inline std::vector<int> resolve_action(const AgeState& s, int k) {
    const int n = static_cast<int>(s.size());
    if (k < 0 || k > n)
        throw std::domain_error("resolve_action: k outside [0, K]");
    std::vector<int> order(s.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&s](int a, int b) { return s[static_cast<std::size_t>(a)] >
                                                 s[static_cast<std::size_t>(b)]; });
    order.resize(static_cast<std::size_t>(k));
    std::sort(order.begin(), order.end());
    return order;
}

/// One-stage reward: the mean instantaneous age. Independent of the action.
inline double reward(const AgeState& s) {
    double sum = 0.0;
    for (int age : s) sum += static_cast<double>(age);
    return sum / static_cast<double>(s.size());
}

}  // namespace aoisched
