#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace mne {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t hash64(std::string_view s) {
    // FNV-1a
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Seed for a named substream of a master seed. All randomness in a run flows
/// from one master seed through labels ("sketch", "Z", "mala", ...) so that
/// changing one stage's label changes only that stage's draws.
inline std::uint64_t substream_seed(std::uint64_t master, std::string_view label) {
    std::uint64_t s = master ^ hash64(label);
    splitmix64(s);
    return splitmix64(s);
}

/// Child stream for per-walker / per-sample parallelism.
inline std::uint64_t child_seed(std::uint64_t stream, std::uint64_t index) {
    std::uint64_t s = stream + 0x9e3779b97f4a7c15ULL * (index + 1);
    splitmix64(s);
    return splitmix64(s);
}

/// mt19937_64 with project-owned uniform/normal mappings. The raw generator is
/// standardized, and we do not use std:: distributions (their sequences are
/// implementation-defined), so streams are portable across compilers.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t raw() { return gen_(); }

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1]; safe as a log() argument.
    double uniform_pos() { return (static_cast<double>(gen_() >> 11) + 1.0) * 0x1.0p-53; }

    /// Unbiased integer in [0, bound) via rejection.
    std::uint64_t uniform_below(std::uint64_t bound) {
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
        std::uint64_t x;
        do {
            x = gen_();
        } while (x >= limit);
        return x % bound;
    }

    /// Standard normal via Box-Muller; pairs are cached.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform_pos();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    double sign() { return (gen_() >> 63) ? 1.0 : -1.0; }

private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace mne
