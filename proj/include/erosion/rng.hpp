#pragma once

#include <cstdint>
#include <string_view>

namespace erosion {

// Counter-based generator: output i of a stream is mix(key + (i+1)*gamma).
// Streams are keyed by (seed, replica, tag), so any replica can be
// reproduced without replaying the others.
class Rng {
public:
    static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

    Rng() = default;
    explicit Rng(std::uint64_t key) : key_(key) {}
    Rng(std::uint64_t seed, std::uint64_t replica, std::uint64_t tag)
        : key_(derive(seed, replica, tag)) {}

    static constexpr std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    static constexpr std::uint64_t derive(std::uint64_t seed, std::uint64_t replica,
                                          std::uint64_t tag) {
        std::uint64_t h = mix(seed ^ 0x5851f42d4c957f2dULL);
        h = mix(h + replica * kGamma + 0x14057b7ef767814fULL);
        h = mix(h ^ (tag * 0xd1b54a32d192ed03ULL + 0x2545f4914f6cdd1dULL));
        return h;
    }

    // FNV-1a, for turning purpose names into tags.
    static constexpr std::uint64_t tag(std::string_view name) {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (char c : name) {
            h ^= static_cast<unsigned char>(c);
            h *= 0x100000001b3ULL;
        }
        return h;
    }

    Rng split(std::uint64_t replica, std::uint64_t tag) const {
        return Rng(derive(key_, replica, tag));
    }

    std::uint64_t next_u64() { return mix(key_ + (++counter_) * kGamma); }

    // Uniform integer in [0, bound), Lemire's multiply-shift with rejection.
    std::uint64_t uniform_index(std::uint64_t bound) {
        std::uint64_t x = next_u64();
        __uint128_t m = static_cast<__uint128_t>(x) * bound;
        auto low = static_cast<std::uint64_t>(m);
        if (low < bound) {
            const std::uint64_t threshold = (0 - bound) % bound;
            while (low < threshold) {
                x = next_u64();
                m = static_cast<__uint128_t>(x) * bound;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    std::uint64_t key() const { return key_; }
    std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t key_ = 0x853c49e6748fea9bULL;
    std::uint64_t counter_ = 0;
};

} // namespace erosion
