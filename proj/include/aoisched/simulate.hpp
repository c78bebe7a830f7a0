#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "aoisched/policy.hpp"
#include "aoisched/rng.hpp"

namespace aoisched {

struct SimConfig {
    std::int64_t horizon = 1000000;   // T, slots simulated
    std::int64_t burn_in = 0;         // leading slots discarded
    std::uint64_t seed = 1;
    bool track_truncation = true;     // saturate ages at delta_max like the MDP
};

struct SimResult {
    double avg_aoi = 0.0;             // time- and device-averaged age
    double std_error = 0.0;           // batch-means standard error of avg_aoi
    std::vector<double> per_device_avg;
    std::vector<std::uint64_t> action_histogram;  // counts per k = 0..K
    double success_rate = 0.0;        // decoded / attempted transmissions
    std::uint64_t attempts = 0;
    std::uint64_t successes = 0;
    std::int64_t recorded_slots = 0;
};

/**
 * Monte Carlo rollout of the age process under a policy. Ages start at one;
 * each slot the policy is queried, every scheduled device draws an
 * independent uniform and fails when it falls below P_e(k), and the ages
 * recorded are the post-transition ones, so an error-free full schedule
 * scores exactly one. Identical (spec, rule, sim) inputs give bit-identical
 * results.
 */
inline SimResult simulate(const MdpSpec& spec, const PolicyRule& rule,
                          const SimConfig& sim) {
    if (sim.horizon < 1)
        throw std::invalid_argument("simulate: horizon must be >= 1");
    if (sim.burn_in < 0 || sim.burn_in >= sim.horizon)
        throw std::invalid_argument("simulate: burn_in must be in [0, horizon)");

    const int num_devices = spec.num_devices();
    SplitMix64 rng = replica_stream(sim.seed, 0);

    std::vector<std::int64_t> ages(static_cast<std::size_t>(num_devices), 1);
    std::vector<double> device_sum(static_cast<std::size_t>(num_devices), 0.0);
    std::vector<std::uint64_t> histogram(static_cast<std::size_t>(num_devices) + 1, 0);

    const std::int64_t recorded = sim.horizon - sim.burn_in;
    constexpr std::int64_t kBatches = 20;
    const std::int64_t num_batches = recorded < kBatches ? recorded : kBatches;
    const std::int64_t batch_len = recorded / num_batches;
    std::vector<double> batch_sum(static_cast<std::size_t>(num_batches), 0.0);
    std::vector<std::int64_t> batch_count(static_cast<std::size_t>(num_batches), 0);

    std::uint64_t attempts = 0;
    std::uint64_t successes = 0;
    AgeState lookup(static_cast<std::size_t>(num_devices));

    for (std::int64_t t = 0; t < sim.horizon; ++t) {
        // Raw ages: the optimal rule clamps to its own table internally,
        // greedy and fixed rules take ages as they are.
        for (int i = 0; i < num_devices; ++i)
            lookup[static_cast<std::size_t>(i)] =
                static_cast<int>(ages[static_cast<std::size_t>(i)]);
        const int k = rule.decide(spec, lookup).k;
        ++histogram[static_cast<std::size_t>(k)];

        const double pe = spec.outage.error(k);
        if (k > 0) {
            const auto scheduled = resolve_action(lookup, k);
            std::uint32_t success_mask = 0;
            for (std::size_t j = 0; j < scheduled.size(); ++j) {
                ++attempts;
                if (rng.next_double() >= pe) {
                    success_mask |= std::uint32_t{1} << j;
                    ++successes;
                }
            }
            for (int i = 0; i < num_devices; ++i)
                ++ages[static_cast<std::size_t>(i)];
            for (std::size_t j = 0; j < scheduled.size(); ++j)
                if (success_mask & (std::uint32_t{1} << j))
                    ages[static_cast<std::size_t>(scheduled[j])] = 1;
        } else {
            for (int i = 0; i < num_devices; ++i)
                ++ages[static_cast<std::size_t>(i)];
        }
        if (sim.track_truncation)
            for (auto& age : ages)
                if (age > spec.delta_max) age = spec.delta_max;

        if (t >= sim.burn_in) {
            double slot_sum = 0.0;
            for (int i = 0; i < num_devices; ++i) {
                const double age = static_cast<double>(ages[static_cast<std::size_t>(i)]);
                device_sum[static_cast<std::size_t>(i)] += age;
                slot_sum += age;
            }
            std::int64_t b = (t - sim.burn_in) / batch_len;
            if (b >= num_batches) b = num_batches - 1;  // remainder joins the last batch
            batch_sum[static_cast<std::size_t>(b)] += slot_sum / num_devices;
            ++batch_count[static_cast<std::size_t>(b)];
        }
    }

    SimResult result;
    result.recorded_slots = recorded;
    result.per_device_avg.resize(static_cast<std::size_t>(num_devices));
    for (int i = 0; i < num_devices; ++i)
        result.per_device_avg[static_cast<std::size_t>(i)] =
            device_sum[static_cast<std::size_t>(i)] / static_cast<double>(recorded);
    double mean = 0.0;
    for (double v : result.per_device_avg) mean += v;
    result.avg_aoi = mean / num_devices;

    if (num_batches > 1) {
        double bmean = 0.0;
        std::vector<double> batch_avg(static_cast<std::size_t>(num_batches));
        for (std::int64_t b = 0; b < num_batches; ++b) {
            batch_avg[static_cast<std::size_t>(b)] =
                batch_sum[static_cast<std::size_t>(b)] /
                static_cast<double>(batch_count[static_cast<std::size_t>(b)]);
            bmean += batch_avg[static_cast<std::size_t>(b)];
        }
        bmean /= static_cast<double>(num_batches);
        double var = 0.0;
        for (double v : batch_avg) var += (v - bmean) * (v - bmean);
        var /= static_cast<double>(num_batches - 1);
        result.std_error = std::sqrt(var / static_cast<double>(num_batches));
    }

    result.action_histogram = std::move(histogram);
    result.attempts = attempts;
    result.successes = successes;
    result.success_rate =
        attempts == 0 ? 0.0
                      : static_cast<double>(successes) / static_cast<double>(attempts);
    return result;
}

/// Equal-weight merge of replica results (distinct seeds, same horizon).
/// The combined standard error is the spread of the replica means when
/// there are several, and the single replica's batch-means error otherwise.
inline SimResult merge_replicas(const std::vector<SimResult>& replicas) {
    if (replicas.empty())
        throw std::invalid_argument("merge_replicas: no results");
    SimResult merged = replicas.front();
    if (replicas.size() == 1) return merged;

    const std::size_t devices = merged.per_device_avg.size();
    merged.avg_aoi = 0.0;
    merged.attempts = merged.successes = 0;
    merged.recorded_slots = 0;
    merged.per_device_avg.assign(devices, 0.0);
    merged.action_histogram.assign(merged.action_histogram.size(), 0);
    for (const auto& r : replicas) {
        merged.avg_aoi += r.avg_aoi;
        merged.attempts += r.attempts;
        merged.successes += r.successes;
        merged.recorded_slots += r.recorded_slots;
        for (std::size_t i = 0; i < devices; ++i)
            merged.per_device_avg[i] += r.per_device_avg[i];
        for (std::size_t i = 0; i < merged.action_histogram.size(); ++i)
            merged.action_histogram[i] += r.action_histogram[i];
    }
    const double n = static_cast<double>(replicas.size());
    merged.avg_aoi /= n;
    for (auto& v : merged.per_device_avg) v /= n;
    merged.success_rate = merged.attempts == 0
                              ? 0.0
                              : static_cast<double>(merged.successes) /
                                    static_cast<double>(merged.attempts);
    double var = 0.0;
    for (const auto& r : replicas)
        var += (r.avg_aoi - merged.avg_aoi) * (r.avg_aoi - merged.avg_aoi);
    var /= (n - 1.0);
    merged.std_error = std::sqrt(var / n);
    return merged;
}

}  // namespace aoisched
