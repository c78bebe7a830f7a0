#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace aoisched {

/**
 * Physical link parameters of the uplink: K single-antenna devices report
 * to an access point with N receive antennas over a shared channel. The
 * receiver separates simultaneous streams by zero-forcing, so the only
 * channel quantity the rest of the system ever sees is the per-stream
 * outage probability computed here.
 *
 * snr_linear is the transmit SNR P/sigma^2 in linear scale; distance
 * attenuation enters through the path gain d^-path_loss_exponent.
 */
struct ChannelConfig {
    int num_devices = 3;            // K
    int num_antennas = 3;           // N, must satisfy N >= K
    double snr_linear = 100.0;      // P/sigma^2
    double distance = 3.0;
    double path_loss_exponent = 2.0;
    double snr_threshold = 1.0;     // gamma_th required for decoding

    void validate() const {
        if (num_devices < 1)
            throw std::invalid_argument("ChannelConfig: num_devices must be >= 1");
        if (num_antennas < num_devices)
            throw std::invalid_argument(
                "ChannelConfig: num_antennas must be >= num_devices (N >= K)");
        if (!(snr_linear > 0.0))
            throw std::invalid_argument("ChannelConfig: snr_linear must be > 0");
        if (!(distance > 0.0))
            throw std::invalid_argument("ChannelConfig: distance must be > 0");
        if (path_loss_exponent < 0.0)
            throw std::invalid_argument("ChannelConfig: path_loss_exponent must be >= 0");
        if (!(snr_threshold > 0.0))
            throw std::invalid_argument("ChannelConfig: snr_threshold must be > 0");
    }
};

/// gamma_th * d^tau / snr: the noise-to-received-power ratio that drives the
/// outage tail. Zero only in the infinite-SNR limit.
inline double effective_noise_ratio(const ChannelConfig& cfg) {
    return cfg.snr_threshold * std::pow(cfg.distance, cfg.path_loss_exponent) /
           cfg.snr_linear;
}

/**
 * Per-stream zero-forcing outage probability when k of the K devices
 * transmit simultaneously:
 *
 *   P_e(k) = 1 - sum_{i=0}^{N-k} x^i / i! * exp(-x),   x = effective noise ratio.
 *
 * The sum is the CDF at N-k of a Poisson(x) variable, accumulated with a
 * multiplicative term update so no factorial is ever formed. The result is
 * clamped into [0, 1] to absorb last-ulp rounding.
 */
inline double error_probability(const ChannelConfig& cfg, int k) {
    cfg.validate();
    if (k < 1 || k > cfg.num_devices)
        throw std::domain_error("error_probability: k must be in [1, K], got " +
                                std::to_string(k));
    const double x = effective_noise_ratio(cfg);
    const int tail = cfg.num_antennas - k;  // N - k >= 0 since N >= K >= k
    double term = std::exp(-x);
    double cdf = term;
    for (int i = 1; i <= tail; ++i) {
        term *= x / static_cast<double>(i);
        cdf += term;
    }
    double pe = 1.0 - cdf;
    if (pe < 0.0) pe = 0.0;
    if (pe > 1.0) pe = 1.0;
    return pe;
}

/// Precomputed P_e(k) for k = 0..K. Entry 0 is 0 by convention (an idle slot
/// has nothing to fail) and is never used by the dynamics.
struct OutageTable {
    std::vector<double> per_k_error;

    double error(int k) const { return per_k_error.at(static_cast<std::size_t>(k)); }
    double success(int k) const { return 1.0 - error(k); }
    int max_devices() const { return static_cast<int>(per_k_error.size()) - 1; }
};

inline OutageTable build_outage_table(const ChannelConfig& cfg) {
    cfg.validate();
    OutageTable table;
    table.per_k_error.resize(static_cast<std::size_t>(cfg.num_devices) + 1);
    table.per_k_error[0] = 0.0;
    for (int k = 1; k <= cfg.num_devices; ++k)
        table.per_k_error[static_cast<std::size_t>(k)] = error_probability(cfg, k);
    return table;
}

}  // namespace aoisched
