#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "aoisched/channel.hpp"
#include "aoisched/state.hpp"

namespace aoisched {

/// The truncated average-reward MDP: age-vector states in [1, delta_max]^K,
/// the K+1 eliminated actions, and the outage-driven transition kernel.
struct MdpSpec {
    ChannelConfig cfg;
    int delta_max = 50;
    OutageTable outage;

    static MdpSpec make(ChannelConfig cfg, int delta_max) {
        cfg.validate();
        checked_state_count(cfg.num_devices, delta_max);
        MdpSpec spec;
        spec.cfg = std::move(cfg);
        spec.delta_max = delta_max;
        spec.outage = build_outage_table(spec.cfg);
        return spec;
    }

    int num_devices() const { return cfg.num_devices; }
    int num_actions() const { return cfg.num_devices + 1; }
    std::size_t num_states() const {
        return checked_state_count(cfg.num_devices, delta_max);
    }
};

struct TransitionOutcome {
    AgeState next_state;
    double probability = 0.0;
};

namespace detail {

/// Reusable buffers for outcome enumeration; keeps the kernel builders free
/// of per-state heap traffic.
struct OutcomeScratch {
    std::vector<int> scheduled;
    std::vector<std::size_t> strides;            // index stride per device
    std::vector<std::pair<std::uint64_t, double>> merged;  // (state index, prob)
};

/// Enumerates the 2^k joint success/failure outcomes of action k at state s.
/// Each scheduled device independently succeeds with probability
/// 1 - P_e(k); success resets its age to 1, anything else ages by one slot,
/// saturating at delta_max. Outcomes with identical next states are merged
/// and listed in increasing state-index order.
inline void enumerate_outcomes(const MdpSpec& spec, const AgeState& s, int k,
                               OutcomeScratch& scratch) {
    const int num_devices = spec.num_devices();
    scratch.scheduled = resolve_action(s, k);

    if (scratch.strides.empty()) {
        scratch.strides.assign(static_cast<std::size_t>(num_devices), 1);
        for (int i = num_devices - 2; i >= 0; --i)
            scratch.strides[static_cast<std::size_t>(i)] =
                scratch.strides[static_cast<std::size_t>(i + 1)] *
                static_cast<std::size_t>(spec.delta_max);
    }

    // Base next state: every device ages, saturating at delta_max.
    std::uint64_t base = 0;
    for (int i = 0; i < num_devices; ++i) {
        const int aged = std::min(s[static_cast<std::size_t>(i)] + 1, spec.delta_max);
        base += static_cast<std::uint64_t>(aged - 1) *
                scratch.strides[static_cast<std::size_t>(i)];
    }

    const double q = spec.outage.success(k);
    const double p = 1.0 - q;

    scratch.merged.clear();
    const std::uint32_t patterns = std::uint32_t{1} << static_cast<unsigned>(k);
    for (std::uint32_t mask = 0; mask < patterns; ++mask) {
        std::uint64_t idx = base;
        double prob = 1.0;
        for (int bit = 0; bit < k; ++bit) {
            const int dev = scratch.scheduled[static_cast<std::size_t>(bit)];
            if (mask & (std::uint32_t{1} << static_cast<unsigned>(bit))) {
                const int aged =
                    std::min(s[static_cast<std::size_t>(dev)] + 1, spec.delta_max);
                // replace the aged digit with age 1
                idx -= static_cast<std::uint64_t>(aged - 1) *
                       scratch.strides[static_cast<std::size_t>(dev)];
                prob *= q;
            } else {
                prob *= p;
            }
        }
        if (prob > 0.0)
            scratch.merged.emplace_back(idx, prob);
    }

    std::sort(scratch.merged.begin(), scratch.merged.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::size_t out = 0;
    for (std::size_t i = 0; i < scratch.merged.size(); ++i) {
        if (out > 0 && scratch.merged[out - 1].first == scratch.merged[i].first) {
            scratch.merged[out - 1].second += scratch.merged[i].second;
        } else {
            scratch.merged[out] = scratch.merged[i];
            ++out;
        }
    }
    scratch.merged.resize(out);
}

}  // namespace detail

/// Full transition distribution of (s, a); merged outcomes, probabilities
/// summing to one.
inline std::vector<TransitionOutcome> transitions(const MdpSpec& spec,
                                                  const AgeState& s,
                                                  ScheduleAction a) {
    if (static_cast<int>(s.size()) != spec.num_devices())
        throw std::domain_error("transitions: state size does not match K");
    detail::OutcomeScratch scratch;
    detail::enumerate_outcomes(spec, s, a.k, scratch);
    std::vector<TransitionOutcome> result;
    result.reserve(scratch.merged.size());
    for (const auto& [idx, prob] : scratch.merged)
        result.push_back(TransitionOutcome{
            state_from_index(idx, spec.num_devices(), spec.delta_max), prob});
    return result;
}

}  // namespace aoisched
