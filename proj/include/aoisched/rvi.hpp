#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "aoisched/kernel.hpp"
#include "aoisched/policy.hpp"

namespace aoisched {

/// Relative value function h over the truncated state space plus the
/// average-reward estimate. h is pinned to zero at the reference state.
struct ValueTable {
    std::vector<double> h;
    double j_star = 0.0;
    std::size_t reference_state = 0;
};

struct SolveOptions {
    double tol = 1e-9;
    std::uint64_t max_iters = 100000;
    std::size_t reference_state = 0;  // all-ones state
    int threads = 0;                  // 0: hardware concurrency
};

struct SolveReport {
    std::uint64_t iterations = 0;
    double final_span = std::numeric_limits<double>::infinity();
    bool converged = false;
    double bellman_residual = std::numeric_limits<double>::infinity();
    std::vector<double> span_history;
    ValueTable values;
    PolicyTable policy;
};

/**
 * One Bellman backup of the average-reward optimality equation at state s:
 * min over k in 0..K of r(s) + E[h(s')], returning the minimum and the
 * minimizing k (ties toward the smaller k).
 */
inline std::pair<double, int> bellman_backup(const MdpSpec& spec,
                                             const ValueTable& values,
                                             const AgeState& s) {
    if (values.h.size() != spec.num_states())
        throw std::invalid_argument("bellman_backup: value table size mismatch");
    detail::OutcomeScratch scratch;
    double best = 0.0;
    int best_k = 0;
    for (int k = 0; k <= spec.num_devices(); ++k) {
        detail::enumerate_outcomes(spec, s, k, scratch);
        double expect = 0.0;
        for (const auto& [next, p] : scratch.merged)
            expect += p * values.h[next];
        // r(s) is action independent; comparing continuation values alone
        // keeps tie-breaks identical across backup, sweep and extraction.
        if (k == 0 || expect < best) {
            best = expect;
            best_k = k;
        }
    }
    return {reward(s) + best, best_k};
}

namespace detail {

inline void backup_sweep(const StateKernel& kernel, const std::vector<double>& h,
                         std::vector<double>& backup, std::vector<std::uint8_t>& argmin,
                         int threads) {
    const int num_actions = kernel.num_actions;
    parallel_for(kernel.num_states, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t s = begin; s < end; ++s) {
            double best = 0.0;
            int best_k = 0;
            std::uint64_t off =
                kernel.offsets[s * static_cast<std::size_t>(num_actions)];
            for (int k = 0; k < num_actions; ++k) {
                const std::uint64_t hi =
                    kernel.offsets[s * static_cast<std::size_t>(num_actions) +
                                   static_cast<std::size_t>(k) + 1];
                double expect = 0.0;
                for (std::uint64_t i = off; i < hi; ++i)
                    expect += kernel.prob[i] * h[kernel.next[i]];
                off = hi;
                if (k == 0 || expect < best) {
                    best = expect;
                    best_k = k;
                }
            }
            backup[s] = kernel.state_reward[s] + best;
            argmin[s] = static_cast<std::uint8_t>(best_k);
        }
    });
}

}  // namespace detail

/**
 * Relative value iteration: h_{n+1}(s) = (T h_n)(s) - (T h_n)(ref), stopped
 * when the span seminorm of h_{n+1} - h_n drops to tol. The average-reward
 * estimate is the backup value at the reference state at termination.
 *
 * Sweeps are Jacobi (read h_n, write h_{n+1}) so results are bit-identical
 * for any thread count.
 */
inline SolveReport solve_rvi(const MdpSpec& spec, const SolveOptions& opts = {}) {
    if (!(opts.tol > 0.0)) throw std::invalid_argument("solve_rvi: tol must be > 0");
    const StateKernel kernel = build_state_kernel(spec);
    const std::size_t n = kernel.num_states;
    if (opts.reference_state >= n)
        throw std::invalid_argument("solve_rvi: reference state out of range");

    SolveReport report;
    report.values.reference_state = opts.reference_state;
    std::vector<double> h(n, 0.0);
    std::vector<double> backup(n, 0.0);
    std::vector<std::uint8_t> argmin(n, 0);
    report.span_history.reserve(256);

    double j_star = 0.0;
    for (std::uint64_t iter = 1; iter <= opts.max_iters; ++iter) {
        detail::backup_sweep(kernel, h, backup, argmin, opts.threads);
        const double ref_value = backup[opts.reference_state];

        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (std::size_t s = 0; s < n; ++s) {
            const double updated = backup[s] - ref_value;
            const double diff = updated - h[s];
            lo = std::min(lo, diff);
            hi = std::max(hi, diff);
            h[s] = updated;
        }
        const double span = hi - lo;
        if (!std::isfinite(span))
            throw std::runtime_error("solve_rvi: value iteration diverged (non-finite span)");

        report.iterations = iter;
        report.final_span = span;
        report.span_history.push_back(span);
        j_star = ref_value;
        if (span <= opts.tol) {
            report.converged = true;
            break;
        }
    }

    report.values.h = std::move(h);
    report.values.j_star = j_star;

    // One more sweep against the final h: records the achieved Bellman
    // residual and the policy consistent with the reported values.
    detail::backup_sweep(kernel, report.values.h, backup, argmin, opts.threads);
    double residual = 0.0;
    for (std::size_t s = 0; s < n; ++s)
        residual = std::max(residual,
                            std::abs(backup[s] - j_star - report.values.h[s]));
    report.bellman_residual = residual;
    report.policy.num_devices = spec.num_devices();
    report.policy.delta_max = spec.delta_max;
    report.policy.actions = std::move(argmin);
    return report;
}

/// Greedy policy of a solved value table: per-state argmin of the backup.
inline PolicyTable extract_policy(const MdpSpec& spec, const ValueTable& values) {
    if (values.h.size() != spec.num_states())
        throw std::invalid_argument("extract_policy: value table size mismatch");
    PolicyTable table;
    table.num_devices = spec.num_devices();
    table.delta_max = spec.delta_max;
    table.actions.resize(spec.num_states());

    detail::OutcomeScratch scratch;
    AgeState s(static_cast<std::size_t>(spec.num_devices()), 1);
    for (std::size_t idx = 0; idx < spec.num_states(); ++idx) {
        double best = 0.0;
        int best_k = 0;
        for (int k = 0; k <= spec.num_devices(); ++k) {
            detail::enumerate_outcomes(spec, s, k, scratch);
            double expect = 0.0;
            for (const auto& [next, p] : scratch.merged)
                expect += p * values.h[next];
            const double value = expect;  // r(s) is action independent
            if (k == 0 || value < best) {
                best = value;
                best_k = k;
            }
        }
        table.actions[idx] = static_cast<std::uint8_t>(best_k);
        for (int i = spec.num_devices() - 1; i >= 0; --i) {
            auto& age = s[static_cast<std::size_t>(i)];
            if (++age <= spec.delta_max) break;
            age = 1;
        }
    }
    return table;
}

/// Numerical check of the geometric drift condition with weight
/// omega(s) = mean age: reports the tightest beta with
/// sum_s' omega(s') P(s'|s,a) <= beta * omega(s) + m over all (s, a).
struct DriftReport {
    double beta = std::numeric_limits<double>::infinity();
    double m = 0.0;
    bool satisfied = false;
};

inline DriftReport check_drift_condition(const MdpSpec& spec, double m = 2.0) {
    DriftReport report;
    report.m = m;
    double beta = -std::numeric_limits<double>::infinity();

    detail::OutcomeScratch scratch;
    std::vector<double> mean_age(spec.num_states());
    {
        AgeState s(static_cast<std::size_t>(spec.num_devices()), 1);
        for (std::size_t idx = 0; idx < spec.num_states(); ++idx) {
            mean_age[idx] = reward(s);
            for (int i = spec.num_devices() - 1; i >= 0; --i) {
                auto& age = s[static_cast<std::size_t>(i)];
                if (++age <= spec.delta_max) break;
                age = 1;
            }
        }
    }

    AgeState s(static_cast<std::size_t>(spec.num_devices()), 1);
    for (std::size_t idx = 0; idx < spec.num_states(); ++idx) {
        for (int k = 0; k <= spec.num_devices(); ++k) {
            detail::enumerate_outcomes(spec, s, k, scratch);
            double drift = 0.0;
            for (const auto& [next, p] : scratch.merged)
                drift += p * mean_age[next];
            beta = std::max(beta, (drift - m) / mean_age[idx]);
        }
        for (int i = spec.num_devices() - 1; i >= 0; --i) {
            auto& age = s[static_cast<std::size_t>(i)];
            if (++age <= spec.delta_max) break;
            age = 1;
        }
    }
    report.beta = beta;
    report.satisfied = beta < 1.0 && m > 1.0;
    return report;
}

}  // namespace aoisched
