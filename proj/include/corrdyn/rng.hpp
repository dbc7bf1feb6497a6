#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace corrdyn {

/// Counter-based generator (Philox4x32-10).
///
/// A draw is a pure function of (seed, particle, step, stream), so a particle
/// sees the same numbers whatever the thread schedule.
class CounterRng {
  public:
    explicit CounterRng(std::uint64_t seed) : key_{static_cast<std::uint32_t>(seed),
                                                   static_cast<std::uint32_t>(seed >> 32)} {}

    std::array<std::uint32_t, 4> block(std::uint64_t particle, std::uint32_t step,
                                       std::uint32_t stream = 0) const
    {
        std::array<std::uint32_t, 4> ctr{static_cast<std::uint32_t>(particle),
                                         static_cast<std::uint32_t>(particle >> 32), step,
                                         stream};
        auto key = key_;
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * ctr[0];
            const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * ctr[2];
            ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
                   static_cast<std::uint32_t>(p1),
                   static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
                   static_cast<std::uint32_t>(p0)};
            key[0] += 0x9E3779B9u;
            key[1] += 0xBB67AE85u;
        }
        return ctr;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform(std::uint64_t particle, std::uint32_t step, std::uint32_t stream = 0) const
    {
        const auto b = block(particle, step, stream);
        const std::uint64_t bits = (std::uint64_t{b[0]} << 21) ^ (std::uint64_t{b[1]} >> 11);
        return static_cast<double>(bits & ((std::uint64_t{1} << 53) - 1)) * 0x1.0p-53;
    }

    /// Uniform index in [0, n).
    std::uint32_t index(std::uint32_t n, std::uint64_t particle, std::uint32_t step,
                        std::uint32_t stream = 0) const
    {
        const auto b = block(particle, step, stream);
        return static_cast<std::uint32_t>((std::uint64_t{b[0]} * n) >> 32);
    }

    /// Standard normal via Box-Muller on one block.
    double normal(std::uint64_t particle, std::uint32_t step, std::uint32_t stream = 0) const
    {
        const auto b = block(particle, step, stream);
        const double u1 = (static_cast<double>(b[0]) + 1.0) * 0x1.0p-32;
        const double u2 = static_cast<double>(b[1]) * 0x1.0p-32;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

  private:
    std::array<std::uint32_t, 2> key_;
};

} // namespace corrdyn
