#pragma once

#include <cstdint>
#include <vector>

#include "aoisched/mdp.hpp"
#include "aoisched/parallel.hpp"

namespace aoisched {

/**
 * Dense flattened transition kernel: for every (state, action) the merged
 * outcome list as (next-state index, probability) runs, plus the one-stage
 * reward per state. Row (s, k) occupies entries
 * [offsets[s * (K+1) + k], offsets[s * (K+1) + k + 1]).
 */
struct StateKernel {
    std::size_t num_states = 0;
    int num_actions = 0;
    std::vector<std::uint64_t> offsets;
    std::vector<std::uint32_t> next;
    std::vector<double> prob;
    std::vector<double> state_reward;

    std::pair<std::uint64_t, std::uint64_t> row(std::size_t state, int action) const {
        const std::size_t r = state * static_cast<std::size_t>(num_actions) +
                              static_cast<std::size_t>(action);
        return {offsets[r], offsets[r + 1]};
    }
};

inline StateKernel build_state_kernel(const MdpSpec& spec) {
    StateKernel kernel;
    kernel.num_states = spec.num_states();
    kernel.num_actions = spec.num_actions();
    if (kernel.num_states > (std::uint64_t{1} << 32))
        throw std::invalid_argument("build_state_kernel: state space too large");

    const std::size_t rows = kernel.num_states * static_cast<std::size_t>(kernel.num_actions);
    kernel.offsets.assign(rows + 1, 0);
    kernel.state_reward.resize(kernel.num_states);

    // Upper bound: action k contributes at most 2^k outcomes.
    std::size_t cap = 0;
    for (int k = 0; k < kernel.num_actions; ++k)
        cap += std::size_t{1} << static_cast<unsigned>(k);
    kernel.next.reserve(kernel.num_states * cap);
    kernel.prob.reserve(kernel.num_states * cap);

    detail::OutcomeScratch scratch;
    AgeState s(static_cast<std::size_t>(spec.num_devices()), 1);
    std::size_t row = 0;
    for (std::size_t idx = 0; idx < kernel.num_states; ++idx) {
        kernel.state_reward[idx] = reward(s);
        for (int k = 0; k < kernel.num_actions; ++k, ++row) {
            detail::enumerate_outcomes(spec, s, k, scratch);
            for (const auto& [nxt, p] : scratch.merged) {
                kernel.next.push_back(static_cast<std::uint32_t>(nxt));
                kernel.prob.push_back(p);
            }
            kernel.offsets[row + 1] = kernel.next.size();
        }
        // advance the age vector in index order (last device fastest)
        for (int i = spec.num_devices() - 1; i >= 0; --i) {
            auto& age = s[static_cast<std::size_t>(i)];
            if (++age <= spec.delta_max) break;
            age = 1;
        }
    }
    return kernel;
}

/// Markov chain induced by fixing one action per state.
struct InducedChain {
    std::size_t num_states = 0;
    std::vector<std::uint64_t> offsets;
    std::vector<std::uint32_t> next;
    std::vector<double> prob;
    std::vector<double> state_reward;
};

/// actions[s] must be a valid action index for every state.
inline InducedChain build_induced_chain(const MdpSpec& spec,
                                        const std::vector<std::uint8_t>& actions) {
    if (actions.size() != spec.num_states())
        throw std::invalid_argument("build_induced_chain: action table size mismatch");
    InducedChain chain;
    chain.num_states = spec.num_states();
    chain.offsets.assign(chain.num_states + 1, 0);
    chain.state_reward.resize(chain.num_states);

    detail::OutcomeScratch scratch;
    AgeState s(static_cast<std::size_t>(spec.num_devices()), 1);
    for (std::size_t idx = 0; idx < chain.num_states; ++idx) {
        chain.state_reward[idx] = reward(s);
        const int k = actions[idx];
        if (k < 0 || k >= spec.num_actions())
            throw std::invalid_argument("build_induced_chain: action out of range");
        detail::enumerate_outcomes(spec, s, k, scratch);
        for (const auto& [nxt, p] : scratch.merged) {
            chain.next.push_back(static_cast<std::uint32_t>(nxt));
            chain.prob.push_back(p);
        }
        chain.offsets[idx + 1] = chain.next.size();
        for (int i = spec.num_devices() - 1; i >= 0; --i) {
            auto& age = s[static_cast<std::size_t>(i)];
            if (++age <= spec.delta_max) break;
            age = 1;
        }
    }
    return chain;
}

}  // namespace aoisched
