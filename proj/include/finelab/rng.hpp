#pragma once

#include <array>
#include <cstdint>

namespace finelab {

// Philox 4x64-10 counter-based generator (Salmon et al., "Parallel random
// numbers: as easy as 1, 2, 3").  Pure function of (counter, key), so every
// Monte Carlo sample owns an independent stream derived from
// (seed, sample index) and results cannot depend on scheduling.
struct philox4x64 {
    static constexpr std::uint64_t M0 = 0xD2E7470EE14C6C93ull;
    static constexpr std::uint64_t M1 = 0xCA5A826395121157ull;
    static constexpr std::uint64_t W0 = 0x9E3779B97F4A7C15ull;
    static constexpr std::uint64_t W1 = 0xBB67AE8584CAA73Bull;

    static std::array<std::uint64_t, 4> block(std::array<std::uint64_t, 4> ctr,
                                              std::array<std::uint64_t, 2> key) {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += W0;
                key[1] += W1;
            }
            const unsigned __int128 p0 = static_cast<unsigned __int128>(M0) * ctr[0];
            const unsigned __int128 p1 = static_cast<unsigned __int128>(M1) * ctr[2];
            const std::uint64_t hi0 = static_cast<std::uint64_t>(p0 >> 64);
            const std::uint64_t lo0 = static_cast<std::uint64_t>(p0);
            const std::uint64_t hi1 = static_cast<std::uint64_t>(p1 >> 64);
            const std::uint64_t lo1 = static_cast<std::uint64_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        }
        return ctr;
    }
};

// One logical random stream: key = (seed, stream id), counter walks forward.
class rng_stream {
  public:
    rng_stream(std::uint64_t seed, std::uint64_t stream)
        : key_{seed, stream} {}

    std::uint64_t next_u64() {
        if (have_ == 0) {
            buf_ = philox4x64::block({block_++, 0, 0, 0}, key_);
            have_ = 4;
        }
        return buf_[4 - have_--];
    }

    // uniform in [0, 1), 53-bit resolution
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double a, double b) { return a + (b - a) * next_double(); }

  private:
    std::array<std::uint64_t, 2> key_;
    std::uint64_t block_ = 0;
    std::array<std::uint64_t, 4> buf_{};
    int have_ = 0;
};

// Cheap 64-bit mixer for deriving sub-seeds from labels (splitmix64 finalizer).
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

}  // namespace finelab
