#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace fusebench {

// Deterministic, platform-independent draws. std::mt19937_64 output is
// standard-defined; the library's distributions are not, so all real/index
// draws are derived here from raw engine words.

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Seed for an independent substream, e.g. per bootstrap replicate or per
// segment, so parallel generation is order-free.
inline std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(seed ^ (0x9E3779B97F4A7C15ULL * (index + 1)));
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53 random bits.
    double next_double() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Uniform index in [0, n). Modulo bias is ~n/2^64, irrelevant here, and
    // the draw stays bit-identical across platforms.
    std::size_t next_index(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }

    // Index drawn proportionally to non-negative weights.
    std::size_t next_weighted(std::span<const double> weights);

    // k distinct indices drawn by weight without replacement, in draw order.
    std::vector<std::size_t> sample_weighted_without_replacement(std::span<const double> weights,
                                                                 std::size_t k);

private:
    std::mt19937_64 engine_;
};

inline std::size_t Rng::next_weighted(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    double u = next_double() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        acc += weights[i];
        if (u < acc) return i;
    }
    return weights.size() - 1;
}

inline std::vector<std::size_t> Rng::sample_weighted_without_replacement(
    std::span<const double> weights, std::size_t k) {
    std::vector<double> w(weights.begin(), weights.end());
    std::vector<std::size_t> alive(w.size());
    for (std::size_t i = 0; i < alive.size(); ++i) alive[i] = i;
    std::vector<std::size_t> out;
    out.reserve(k);
    while (out.size() < k && !alive.empty()) {
        std::vector<double> cur;
        cur.reserve(alive.size());
        for (std::size_t i : alive) cur.push_back(w[i]);
        std::size_t pick = next_weighted(cur);
        out.push_back(alive[pick]);
        alive.erase(alive.begin() + static_cast<std::ptrdiff_t>(pick));
    }
    return out;
}

} // namespace fusebench
