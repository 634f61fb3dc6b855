#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace yo {

/// Independent random stream. Streams derived from the same (seed, index)
/// pair produce identical sequences, which is what lets chains run on
/// separate threads and still reproduce the sequential reference run.
class RngStream {
public:
    using engine_type = std::mt19937_64;

    RngStream() : RngStream(0, 0) {}

    RngStream(std::uint64_t seed, std::uint64_t stream_index) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream_index),
                          static_cast<std::uint32_t>(stream_index >> 32), 0x59u, 0x4fu};
        engine_.seed(seq);
    }

    /// Uniform on [0, 1).
    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }

    /// Uniform integer on [0, n).
    std::size_t index(std::size_t n) {
        return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
    }

    engine_type& engine() { return engine_; }

private:
    engine_type engine_;
};

}  // namespace yo
