#include <catch2/catch_amalgamated.hpp>

#include <map>

#include "aoisched/kernel.hpp"
#include "aoisched/mdp.hpp"
#include "aoisched/rng.hpp"
#include "oracles.hpp"

using aoisched::AgeState;
using aoisched::MdpSpec;
using aoisched::ScheduleAction;
using Catch::Approx;

namespace {

// A spec with hand-picked outage values, bypassing the channel formula so
// kernel tests control P_e(k) directly.
MdpSpec spec_with_errors(int num_devices, int delta_max, std::vector<double> pe) {
    aoisched::ChannelConfig cfg;
    cfg.num_devices = num_devices;
    cfg.num_antennas = num_devices;
    MdpSpec spec = MdpSpec::make(cfg, delta_max);
    pe.insert(pe.begin(), 0.0);
    spec.outage.per_k_error = std::move(pe);
    return spec;
}

std::map<AgeState, double> outcome_map(const std::vector<aoisched::TransitionOutcome>& v) {
    std::map<AgeState, double> m;
    for (const auto& o : v) m[o.next_state] += o.probability;
    return m;
}

}  // namespace

TEST_CASE("transitions: single scheduled device") {
    const auto spec = spec_with_errors(2, 10, {0.2, 0.5});
    const auto outcomes = aoisched::transitions(spec, AgeState{2, 1}, ScheduleAction{1});
    const auto m = outcome_map(outcomes);
    REQUIRE(m.size() == 2);
    REQUIRE(m.at(AgeState{1, 2}) == Approx(0.8).margin(1e-15));
    REQUIRE(m.at(AgeState{3, 2}) == Approx(0.2).margin(1e-15));
}

TEST_CASE("transitions: idle slot ages deterministically") {
    const auto spec = spec_with_errors(2, 10, {0.2, 0.5});
    const auto outcomes = aoisched::transitions(spec, AgeState{2, 1}, ScheduleAction{0});
    REQUIRE(outcomes.size() == 1);
    REQUIRE(outcomes.front().next_state == AgeState{3, 2});
    REQUIRE(outcomes.front().probability == 1.0);
}

TEST_CASE("transitions: full enumeration of two scheduled devices") {
    const auto spec = spec_with_errors(2, 10, {0.2, 0.5});
    const auto outcomes = aoisched::transitions(spec, AgeState{2, 2}, ScheduleAction{2});
    const auto m = outcome_map(outcomes);
    REQUIRE(m.size() == 4);
    REQUIRE(m.at(AgeState{1, 1}) == Approx(0.25).margin(1e-15));
    REQUIRE(m.at(AgeState{1, 3}) == Approx(0.25).margin(1e-15));
    REQUIRE(m.at(AgeState{3, 1}) == Approx(0.25).margin(1e-15));
    REQUIRE(m.at(AgeState{3, 3}) == Approx(0.25).margin(1e-15));
}

TEST_CASE("transitions merge duplicate next states") {
    // Both devices at delta_max: failure and success of either one produce
    // overlapping next states once ages saturate.
    const auto spec = spec_with_errors(2, 3, {0.5, 0.5});
    const auto outcomes = aoisched::transitions(spec, AgeState{3, 3}, ScheduleAction{2});
    REQUIRE(outcomes.size() == 4);  // (1,1) (1,3) (3,1) (3,3)
    double total = 0.0;
    for (const auto& o : outcomes) total += o.probability;
    REQUIRE(total == Approx(1.0).margin(1e-15));
}

TEST_CASE("kernel normalization and marginals, exhaustive at small scale") {
    for (int num_devices : {1, 2, 3}) {
        const auto cfg_pe = [&] {
            std::vector<double> pe;
            for (int k = 1; k <= num_devices; ++k)
                pe.push_back(0.1 + 0.2 * k);  // increasing in k
            return pe;
        }();
        const int delta_max = 10;
        const auto spec = spec_with_errors(num_devices, delta_max, cfg_pe);
        const std::size_t n = spec.num_states();
        for (std::size_t idx = 0; idx < n; ++idx) {
            const AgeState s = aoisched::state_from_index(idx, num_devices, delta_max);
            for (int k = 0; k <= num_devices; ++k) {
                const auto outcomes =
                    aoisched::transitions(spec, s, ScheduleAction{k});
                double total = 0.0;
                std::vector<double> fresh_marginal(s.size(), 0.0);
                for (const auto& o : outcomes) {
                    total += o.probability;
                    REQUIRE(static_cast<int>(o.next_state.size()) == num_devices);
                    for (std::size_t i = 0; i < s.size(); ++i) {
                        REQUIRE(o.next_state[i] >= 1);
                        REQUIRE(o.next_state[i] <= delta_max);  // truncation absorbs
                        if (o.next_state[i] == 1) fresh_marginal[i] += o.probability;
                    }
                }
                REQUIRE(total == Approx(1.0).margin(1e-12));

                const auto scheduled = aoisched::resolve_action(s, k);
                for (std::size_t i = 0; i < s.size(); ++i) {
                    const bool is_scheduled =
                        std::find(scheduled.begin(), scheduled.end(),
                                  static_cast<int>(i)) != scheduled.end();
                    // delta_max=10 > 1 so age 1 is reachable only via success
                    const double expected =
                        is_scheduled ? spec.outage.success(k) : 0.0;
                    REQUIRE(fresh_marginal[i] == Approx(expected).margin(1e-12));
                }
            }
        }
    }
}

TEST_CASE("top-k-by-age dominates every same-size subset in one-step reward") {
    aoisched::SplitMix64 rng(0xD0D0ull);
    const int num_devices = 4;
    const int delta_max = 5;
    const auto spec = spec_with_errors(num_devices, delta_max, {0.1, 0.25, 0.45, 0.7});
    for (int trial = 0; trial < 300; ++trial) {
        AgeState s(num_devices);
        for (auto& age : s)
            age = 1 + static_cast<int>(rng.next() % static_cast<unsigned>(delta_max));
        for (int k = 0; k <= num_devices; ++k) {
            const auto top = aoisched::resolve_action(s, k);
            const double top_value = oracle::subset_expected_next_reward(spec, s, top);
            for (const auto& subset : oracle::subsets_of_size(num_devices, k)) {
                const double other = oracle::subset_expected_next_reward(spec, s, subset);
                REQUIRE(top_value <= other + 1e-12);
            }
        }
    }
}

TEST_CASE("one-step expectation through the kernel equals the subset oracle") {
    const auto spec = spec_with_errors(3, 6, {0.15, 0.35, 0.6});
    aoisched::SplitMix64 rng(0xABCDull);
    for (int trial = 0; trial < 200; ++trial) {
        AgeState s(3);
        for (auto& age : s) age = 1 + static_cast<int>(rng.next() % 6u);
        for (int k = 0; k <= 3; ++k) {
            const auto outcomes = aoisched::transitions(spec, s, ScheduleAction{k});
            double kernel_expect = 0.0;
            for (const auto& o : outcomes)
                kernel_expect += o.probability * aoisched::reward(o.next_state);
            const double direct = oracle::subset_expected_next_reward(
                spec, s, aoisched::resolve_action(s, k));
            REQUIRE(kernel_expect == Approx(direct).margin(1e-12));
        }
    }
}

TEST_CASE("build_state_kernel mirrors transitions()") {
    const auto spec = spec_with_errors(2, 4, {0.3, 0.55});
    const auto kernel = aoisched::build_state_kernel(spec);
    REQUIRE(kernel.num_states == 16);
    REQUIRE(kernel.num_actions == 3);
    for (std::size_t idx = 0; idx < kernel.num_states; ++idx) {
        const AgeState s = aoisched::state_from_index(idx, 2, 4);
        REQUIRE(kernel.state_reward[idx] == aoisched::reward(s));
        for (int k = 0; k <= 2; ++k) {
            const auto outcomes = aoisched::transitions(spec, s, ScheduleAction{k});
            const auto [lo, hi] = kernel.row(idx, k);
            REQUIRE(hi - lo == outcomes.size());
            for (std::size_t i = 0; i < outcomes.size(); ++i) {
                REQUIRE(kernel.next[lo + i] ==
                        aoisched::state_index(outcomes[i].next_state, 4));
                REQUIRE(kernel.prob[lo + i] == outcomes[i].probability);
            }
        }
    }
}
