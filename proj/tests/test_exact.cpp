#include <catch2/catch_amalgamated.hpp>

#include "aoisched/exact.hpp"
#include "aoisched/rvi.hpp"
#include "aoisched/simulate.hpp"

using aoisched::AgeState;
using aoisched::InducedChain;
using aoisched::MdpSpec;
using aoisched::PolicyRule;
using Catch::Approx;

namespace {

MdpSpec spec_with_errors(int num_devices, int delta_max, std::vector<double> pe) {
    aoisched::ChannelConfig cfg;
    cfg.num_devices = num_devices;
    cfg.num_antennas = num_devices;
    MdpSpec spec = MdpSpec::make(cfg, delta_max);
    pe.insert(pe.begin(), 0.0);
    spec.outage.per_k_error = std::move(pe);
    return spec;
}

MdpSpec paper_point(int num_devices, int num_antennas, double snr_db, double distance,
                    int delta_max) {
    aoisched::ChannelConfig cfg;
    cfg.num_devices = num_devices;
    cfg.num_antennas = num_antennas;
    cfg.snr_linear = std::pow(10.0, snr_db / 10.0);
    cfg.distance = distance;
    return MdpSpec::make(cfg, delta_max);
}

// tiny hand-built chain for the recurrence analysis
InducedChain chain_from_rows(
    const std::vector<std::vector<std::pair<std::uint32_t, double>>>& rows) {
    InducedChain chain;
    chain.num_states = rows.size();
    chain.offsets.assign(rows.size() + 1, 0);
    for (std::size_t s = 0; s < rows.size(); ++s) {
        for (const auto& [next, p] : rows[s]) {
            chain.next.push_back(next);
            chain.prob.push_back(p);
        }
        chain.offsets[s + 1] = chain.next.size();
    }
    chain.state_reward.assign(rows.size(), 0.0);
    return chain;
}

}  // namespace

TEST_CASE("geometric chain: exact mean age is 1/(1-p)") {
    for (double p : {0.2, 0.5, 0.8}) {
        const auto spec = spec_with_errors(1, 200, {p});
        const double avg =
            aoisched::evaluate_policy_exact(spec, PolicyRule::stationary(1));
        REQUIRE(avg == Approx(1.0 / (1.0 - p)).margin(1e-6));
    }
}

TEST_CASE("never transmitting drifts into the saturated state") {
    const auto spec = spec_with_errors(1, 30, {0.5});
    const double avg = aoisched::evaluate_policy_exact(spec, PolicyRule::stationary(0));
    REQUIRE(avg == Approx(30.0).margin(1e-9));  // absorbing at delta_max
}

TEST_CASE("recurrent class counting") {
    // two absorbing states, both reachable from 0: multichain
    const auto split = chain_from_rows({{{1, 0.5}, {2, 0.5}}, {{1, 1.0}}, {{2, 1.0}}});
    REQUIRE(aoisched::detail::count_recurrent_classes(split, 0) == 2);

    // second absorbing state unreachable from 0: unichain from the start state
    const auto gated = chain_from_rows({{{1, 1.0}}, {{0, 1.0}}, {{2, 1.0}}});
    REQUIRE(aoisched::detail::count_recurrent_classes(gated, 0) == 1);

    // transient start feeding one cycle
    const auto funnel =
        chain_from_rows({{{1, 0.7}, {2, 0.3}}, {{2, 1.0}}, {{1, 1.0}}});
    REQUIRE(aoisched::detail::count_recurrent_classes(funnel, 0) == 1);
}

TEST_CASE("periodic chains still converge (damping)") {
    // error-free single device scheduled only at age 2: on the truncated
    // space the recurrent class is the deterministic 2-cycle {1, 2}
    const auto spec = spec_with_errors(1, 6, {0.0});
    aoisched::PolicyTable table;
    table.num_devices = 1;
    table.delta_max = 6;
    table.actions = {0, 1, 0, 0, 0, 1};  // schedule at age 2 and at saturation
    const double avg =
        aoisched::evaluate_policy_exact(spec, PolicyRule::optimal(table));
    REQUIRE(avg == Approx(1.5).margin(1e-9));  // half the time age 1, half age 2
}

TEST_CASE("RVI j* equals the exact evaluation of its own policy") {
    const auto spec = paper_point(2, 2, 10.0, 3.0, 6);
    const auto report = aoisched::solve_rvi(spec);
    REQUIRE(report.converged);
    const double exact = aoisched::evaluate_policy_exact(
        spec, PolicyRule::optimal(report.policy));
    REQUIRE(exact == Approx(report.values.j_star).margin(1e-6));
}

TEST_CASE("j* lower-bounds greedy, which beats the best fixed-k policy") {
    const auto spec = paper_point(2, 2, 8.0, 3.0, 6);
    const auto report = aoisched::solve_rvi(spec);

    const double greedy =
        aoisched::evaluate_policy_exact(spec, PolicyRule::greedy());
    double best_fixed = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= 2; ++k)
        best_fixed = std::min(best_fixed, aoisched::evaluate_policy_exact(
                                              spec, PolicyRule::stationary(k)));
    REQUIRE(report.values.j_star <= greedy + 1e-9);
    REQUIRE(greedy <= best_fixed + 1e-9);
}

TEST_CASE("Monte Carlo agrees with the exact chain within 3 sigma") {
    const auto spec = paper_point(2, 2, 6.0, 3.0, 8);
    const PolicyRule rule = PolicyRule::greedy();
    const double exact = aoisched::evaluate_policy_exact(spec, rule);

    aoisched::SimConfig sim;
    sim.horizon = 1000000;
    sim.burn_in = 5000;
    sim.seed = 2024;
    sim.track_truncation = true;  // match the truncated chain
    const auto mc = aoisched::simulate(spec, rule, sim);
    REQUIRE(std::abs(mc.avg_aoi - exact) <= 3.0 * mc.std_error);
}

TEST_CASE("success rate concentrates at 1 - P_e(k)") {
    const auto spec = spec_with_errors(3, 25, {0.25, 0.4, 0.6});
    aoisched::SimConfig sim;
    sim.horizon = 400000;
    sim.seed = 99;
    const auto result = aoisched::simulate(spec, PolicyRule::stationary(2), sim);
    const double expected = spec.outage.success(2);
    const double se = std::sqrt(expected * (1.0 - expected) /
                                static_cast<double>(result.attempts));
    REQUIRE(std::abs(result.success_rate - expected) <= 3.0 * se);
}

TEST_CASE("truncation barely matters at a healthy operating point") {
    // optimal policy at 10 dB, d=3: ages rarely approach the cap
    const auto spec = paper_point(2, 2, 10.0, 3.0, 50);
    const auto report = aoisched::solve_rvi(spec);
    const auto rule = PolicyRule::optimal(report.policy);

    aoisched::SimConfig sim;
    sim.horizon = 400000;
    sim.burn_in = 2000;
    sim.seed = 31337;
    sim.track_truncation = true;
    const auto truncated = aoisched::simulate(spec, rule, sim);
    sim.track_truncation = false;
    const auto unbounded = aoisched::simulate(spec, rule, sim);
    REQUIRE(std::abs(truncated.avg_aoi - unbounded.avg_aoi) / truncated.avg_aoi <
            0.005);
}
