#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "aoisched/policy.hpp"
#include "aoisched/rvi.hpp"

namespace aoisched {

namespace detail {

inline void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
inline void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
inline void put_f64(std::string& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    put_u64(out, bits);
}

class Reader {
  public:
    Reader(const char* data, std::size_t size) : data_(data), size_(size) {}
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i]))
                 << (8 * i);
        pos_ += 8;
        return v;
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_ + i]))
                 << (8 * i);
        pos_ += 4;
        return v;
    }
    double f64() {
        const std::uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, sizeof v);
        return v;
    }
    void raw(void* out, std::size_t len) {
        need(len);
        std::memcpy(out, data_ + pos_, len);
        pos_ += len;
    }
    bool exhausted() const { return pos_ == size_; }

  private:
    void need(std::size_t len) const {
        if (pos_ + len > size_)
            throw std::runtime_error("solution artifact: truncated file");
    }
    const char* data_;
    std::size_t size_;
    std::size_t pos_ = 0;
};

inline std::uint64_t fnv1a(std::uint64_t hash, const void* data, std::size_t len) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        hash ^= bytes[i];
        hash *= 0x100000001B3ull;
    }
    return hash;
}

}  // namespace detail

/// Hash of everything that determines a solve: channel point, truncation
/// and solver settings. Used as the cache key for solve-once workflows.
inline std::uint64_t config_hash(const ChannelConfig& cfg, int delta_max,
                                 double tol, std::uint64_t max_iters) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    const std::int64_t ints[3] = {cfg.num_devices, cfg.num_antennas, delta_max};
    h = detail::fnv1a(h, ints, sizeof ints);
    const double reals[4] = {cfg.snr_linear, cfg.distance, cfg.path_loss_exponent,
                             cfg.snr_threshold};
    h = detail::fnv1a(h, reals, sizeof reals);
    h = detail::fnv1a(h, &tol, sizeof tol);
    h = detail::fnv1a(h, &max_iters, sizeof max_iters);
    return h;
}

/// A solved (value table, policy) pair with the channel point it was solved
/// for; round-trips through the little-endian binary dump below.
struct SolutionArtifact {
    ChannelConfig cfg;
    int delta_max = 0;
    std::uint64_t cfg_hash = 0;
    std::uint64_t iterations = 0;
    ValueTable values;
    PolicyTable policy;
};

inline constexpr char kSolutionMagic[8] = {'A', 'O', 'I', 'S', 'O', 'L', 'V', '1'};

inline void save_solution(const std::string& path, const SolutionArtifact& artifact) {
    std::string out;
    out.append(kSolutionMagic, sizeof kSolutionMagic);
    detail::put_u32(out, static_cast<std::uint32_t>(artifact.cfg.num_devices));
    detail::put_u32(out, static_cast<std::uint32_t>(artifact.cfg.num_antennas));
    detail::put_u32(out, static_cast<std::uint32_t>(artifact.delta_max));
    detail::put_u64(out, artifact.cfg_hash);
    detail::put_f64(out, artifact.cfg.snr_linear);
    detail::put_f64(out, artifact.cfg.distance);
    detail::put_f64(out, artifact.cfg.path_loss_exponent);
    detail::put_f64(out, artifact.cfg.snr_threshold);
    detail::put_f64(out, artifact.values.j_star);
    detail::put_u64(out, artifact.values.reference_state);
    detail::put_u64(out, artifact.iterations);
    detail::put_u64(out, artifact.values.h.size());
    for (double v : artifact.values.h) detail::put_f64(out, v);
    out.append(reinterpret_cast<const char*>(artifact.policy.actions.data()),
               artifact.policy.actions.size());

    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) throw std::runtime_error("save_solution: cannot open " + path);
    file.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!file) throw std::runtime_error("save_solution: write failed for " + path);
}

inline SolutionArtifact load_solution(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw std::runtime_error("load_solution: cannot open " + path);
    std::string blob((std::istreambuf_iterator<char>(file)),
                     std::istreambuf_iterator<char>());
    detail::Reader reader(blob.data(), blob.size());

    char magic[8];
    reader.raw(magic, sizeof magic);
    if (std::memcmp(magic, kSolutionMagic, sizeof magic) != 0)
        throw std::runtime_error("load_solution: bad magic in " + path);

    SolutionArtifact artifact;
    artifact.cfg.num_devices = static_cast<int>(reader.u32());
    artifact.cfg.num_antennas = static_cast<int>(reader.u32());
    artifact.delta_max = static_cast<int>(reader.u32());
    artifact.cfg_hash = reader.u64();
    artifact.cfg.snr_linear = reader.f64();
    artifact.cfg.distance = reader.f64();
    artifact.cfg.path_loss_exponent = reader.f64();
    artifact.cfg.snr_threshold = reader.f64();
    artifact.values.j_star = reader.f64();
    artifact.values.reference_state = reader.u64();
    artifact.iterations = reader.u64();
    const std::uint64_t count = reader.u64();
    const std::uint64_t expect =
        checked_state_count(artifact.cfg.num_devices, artifact.delta_max);
    if (count != expect)
        throw std::runtime_error("load_solution: table size does not match header");
    artifact.values.h.resize(count);
    for (auto& v : artifact.values.h) v = reader.f64();
    artifact.policy.num_devices = artifact.cfg.num_devices;
    artifact.policy.delta_max = artifact.delta_max;
    artifact.policy.actions.resize(count);
    reader.raw(artifact.policy.actions.data(), count);
    if (!reader.exhausted())
        throw std::runtime_error("load_solution: trailing bytes in " + path);
    return artifact;
}

}  // namespace aoisched
