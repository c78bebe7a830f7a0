#pragma once

#include <cstdint>

namespace aoisched {

/**
 * SplitMix64: a 64-bit counter-based generator (Steele, Lea & Flood). The
 * state walks a Weyl sequence and each output is a finalizing hash of the
 * counter, so streams seeded through replica_stream are independent and a
 * run is reproducible bit-for-bit on any platform (no reliance on
 * implementation-defined std:: distributions).
 */
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

  private:
    std::uint64_t state_;
};

/// Independent stream for one replica: the master seed and replica index are
/// mixed through the SplitMix64 finalizer before seeding the stream.
inline SplitMix64 replica_stream(std::uint64_t master_seed, std::uint64_t replica) {
    SplitMix64 mixer(master_seed ^ (0xA5A5A5A55A5A5A5Aull + replica * 0x9E3779B97F4A7C15ull));
    return SplitMix64(mixer.next());
}

}  // namespace aoisched
