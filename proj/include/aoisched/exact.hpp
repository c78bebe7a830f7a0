#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "aoisched/kernel.hpp"
#include "aoisched/policy.hpp"

namespace aoisched {

namespace detail {

/// Number of recurrent classes (bottom strongly connected components) of
/// the chain restricted to states reachable from `start`. Iterative Tarjan,
/// so deep chains cannot overflow the call stack.
inline int count_recurrent_classes(const InducedChain& chain, std::size_t start) {
    const std::size_t n = chain.num_states;
    std::vector<std::uint8_t> reachable(n, 0);
    std::vector<std::uint32_t> stack;
    stack.push_back(static_cast<std::uint32_t>(start));
    reachable[start] = 1;
    while (!stack.empty()) {
        const std::uint32_t s = stack.back();
        stack.pop_back();
        for (std::uint64_t i = chain.offsets[s]; i < chain.offsets[s + 1]; ++i) {
            const std::uint32_t t = chain.next[i];
            if (!reachable[t]) {
                reachable[t] = 1;
                stack.push_back(t);
            }
        }
    }

    constexpr std::uint32_t kUnvisited = 0xFFFFFFFFu;
    std::vector<std::uint32_t> index(n, kUnvisited);
    std::vector<std::uint32_t> lowlink(n, 0);
    std::vector<std::uint32_t> scc_id(n, kUnvisited);
    std::vector<std::uint8_t> on_stack(n, 0);
    std::vector<std::uint32_t> tarjan_stack;
    std::uint32_t next_index = 0;
    std::uint32_t num_sccs = 0;

    struct Frame {
        std::uint32_t node;
        std::uint64_t edge;
    };
    std::vector<Frame> frames;

    for (std::size_t root = 0; root < n; ++root) {
        if (!reachable[root] || index[root] != kUnvisited) continue;
        frames.push_back({static_cast<std::uint32_t>(root), chain.offsets[root]});
        index[root] = lowlink[root] = next_index++;
        tarjan_stack.push_back(static_cast<std::uint32_t>(root));
        on_stack[root] = 1;

        while (!frames.empty()) {
            Frame& f = frames.back();
            if (f.edge < chain.offsets[f.node + 1]) {
                const std::uint32_t w = chain.next[f.edge++];
                if (index[w] == kUnvisited) {
                    index[w] = lowlink[w] = next_index++;
                    tarjan_stack.push_back(w);
                    on_stack[w] = 1;
                    frames.push_back({w, chain.offsets[w]});
                } else if (on_stack[w] && index[w] < lowlink[f.node]) {
                    lowlink[f.node] = index[w];
                }
            } else {
                if (lowlink[f.node] == index[f.node]) {
                    std::uint32_t w;
                    do {
                        w = tarjan_stack.back();
                        tarjan_stack.pop_back();
                        on_stack[w] = 0;
                        scc_id[w] = num_sccs;
                    } while (w != f.node);
                    ++num_sccs;
                }
                const std::uint32_t done = f.node;
                frames.pop_back();
                if (!frames.empty() && lowlink[done] < lowlink[frames.back().node])
                    lowlink[frames.back().node] = lowlink[done];
            }
        }
    }

    // A class is recurrent iff no edge leaves its component.
    std::vector<std::uint8_t> leaks(num_sccs, 0);
    for (std::size_t s = 0; s < n; ++s) {
        if (!reachable[s]) continue;
        for (std::uint64_t i = chain.offsets[s]; i < chain.offsets[s + 1]; ++i)
            if (scc_id[chain.next[i]] != scc_id[s]) leaks[scc_id[s]] = 1;
    }
    int recurrent = 0;
    for (std::uint32_t c = 0; c < num_sccs; ++c)
        if (!leaks[c]) ++recurrent;
    return recurrent;
}

/// In-edge (gather) layout of an induced chain, for deterministic parallel
/// distribution sweeps.
struct TransposedChain {
    std::vector<std::uint64_t> offsets;
    std::vector<std::uint32_t> source;
    std::vector<double> prob;
};

inline TransposedChain transpose(const InducedChain& chain) {
    TransposedChain t;
    const std::size_t n = chain.num_states;
    t.offsets.assign(n + 1, 0);
    for (std::uint32_t target : chain.next) ++t.offsets[target + 1];
    for (std::size_t i = 0; i < n; ++i) t.offsets[i + 1] += t.offsets[i];
    t.source.resize(chain.next.size());
    t.prob.resize(chain.next.size());
    std::vector<std::uint64_t> cursor(t.offsets.begin(), t.offsets.end() - 1);
    for (std::size_t s = 0; s < n; ++s)
        for (std::uint64_t i = chain.offsets[s]; i < chain.offsets[s + 1]; ++i) {
            const std::uint32_t target = chain.next[i];
            const std::uint64_t at = cursor[target]++;
            t.source[at] = static_cast<std::uint32_t>(s);
            t.prob[at] = chain.prob[i];
        }
    return t;
}

/// Neumaier-compensated accumulator; keeps the 10^5-term normalization and
/// residual sums accurate enough that the 1e-12 stopping target is not
/// drowned by their own rounding.
class CompensatedSum {
  public:
    void add(double value) {
        const double t = sum_ + value;
        if (std::abs(sum_) >= std::abs(value))
            carry_ += (sum_ - t) + value;
        else
            carry_ += (value - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + carry_; }

  private:
    double sum_ = 0.0;
    double carry_ = 0.0;
};

}  // namespace detail

struct ExactEvalOptions {
    double residual_tol = 1e-12;   // L1 distance between successive sweeps
    std::uint64_t max_sweeps = 500000;
    double damping = 0.9;          // pi <- (1-d) pi + d pi P; kills periodicity
    int threads = 0;
};

/**
 * Exact long-run average age of a policy on the truncated chain: builds the
 * induced transition matrix, verifies that a single recurrent class is
 * reachable from the all-ones state, and runs damped power iteration from
 * that state to the stationary distribution.
 */
inline double evaluate_policy_exact(const MdpSpec& spec, const PolicyRule& rule,
                                    const ExactEvalOptions& opts = {}) {
    const std::size_t n = spec.num_states();
    std::vector<std::uint8_t> actions(n);
    AgeState s(static_cast<std::size_t>(spec.num_devices()), 1);
    for (std::size_t idx = 0; idx < n; ++idx) {
        actions[idx] = static_cast<std::uint8_t>(rule.decide(spec, s).k);
        for (int i = spec.num_devices() - 1; i >= 0; --i) {
            auto& age = s[static_cast<std::size_t>(i)];
            if (++age <= spec.delta_max) break;
            age = 1;
        }
    }
    const InducedChain chain = build_induced_chain(spec, actions);

    const std::size_t start = 0;  // all-ones state
    const int classes = detail::count_recurrent_classes(chain, start);
    if (classes != 1)
        throw std::runtime_error(
            "evaluate_policy_exact: chain is multichain from the all-ones state (" +
            std::to_string(classes) + " recurrent classes)");

    const detail::TransposedChain t = detail::transpose(chain);
    std::vector<double> pi(n, 0.0);
    std::vector<double> pi_next(n, 0.0);
    pi[start] = 1.0;

    const double keep = 1.0 - opts.damping;
    double best_residual = std::numeric_limits<double>::infinity();
    std::uint64_t best_sweep = 0;
    for (std::uint64_t sweep = 1; sweep <= opts.max_sweeps; ++sweep) {
        detail::parallel_for(n, opts.threads, [&](std::size_t begin, std::size_t end) {
            for (std::size_t v = begin; v < end; ++v) {
                double mass = 0.0;
                for (std::uint64_t i = t.offsets[v]; i < t.offsets[v + 1]; ++i)
                    mass += t.prob[i] * pi[t.source[i]];
                pi_next[v] = keep * pi[v] + opts.damping * mass;
            }
        });
        detail::CompensatedSum residual_sum;
        detail::CompensatedSum total_sum;
        for (std::size_t v = 0; v < n; ++v) {
            residual_sum.add(std::abs(pi_next[v] - pi[v]));
            total_sum.add(pi_next[v]);
        }
        const double residual = residual_sum.value();
        const double total = total_sum.value();
        // renormalize against rounding drift
        for (std::size_t v = 0; v < n; ++v) pi[v] = pi_next[v] / total;
        if (!std::isfinite(residual))
            throw std::runtime_error("evaluate_policy_exact: non-finite sweep");
        if (residual < 0.5 * best_residual) {
            best_residual = residual;
            best_sweep = sweep;
        }
        // done when at the target, or pinned to the double-precision floor
        // (no halving in a long while) safely below the accuracy that matters
        const bool at_floor = residual <= 1e-9 && sweep - best_sweep >= 5000;
        if (residual <= opts.residual_tol || at_floor) {
            detail::CompensatedSum avg;
            for (std::size_t v = 0; v < n; ++v)
                avg.add(pi[v] * chain.state_reward[v]);
            return avg.value();
        }
    }
    throw std::runtime_error(
        "evaluate_policy_exact: power iteration did not reach the residual target");
}

}  // namespace aoisched
