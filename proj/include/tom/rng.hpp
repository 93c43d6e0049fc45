#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>

// Deterministic, platform-independent randomness. Every simulated world gets
// its own xoshiro256++ stream derived by hashing (seed, stream id), so results
// never depend on how worlds are scheduled across threads.

namespace tom::rng {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += kGolden);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

class Xoshiro256pp {
public:
    Xoshiro256pp() : Xoshiro256pp(0, 0) {}

    Xoshiro256pp(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t sm = seed ^ (kGolden * (stream + 1));
        for (auto& word : s_) word = splitmix64(sm);
        // all-zero state is the one fixed point of the generator
        if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[3] = kGolden;
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // uniform double in [0,1), 53 significant bits
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    std::uint64_t s_[4];
};

inline std::uint64_t derive_stream_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t sm = seed ^ (kGolden * (stream + 1));
    return splitmix64(sm);
}

// Inverse-CDF draw over unnormalized nonnegative weights. O(n) per draw,
// plenty at the market sizes here.
inline std::size_t sample_categorical(std::span<const double> weights, double total, double u) {
    if (weights.empty() || total <= 0.0)
        throw std::invalid_argument("sample_categorical: no positive weight");
    const double threshold = u * total;
    double cum = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] > 0.0) last_positive = i;
        cum += weights[i];
        if (threshold < cum) return i;
    }
    return last_positive;  // guards against roundoff at u ~ 1
}

}  // namespace tom::rng
