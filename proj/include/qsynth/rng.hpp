#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace qsynth {

/// Seeded random stream built on std::mt19937_64.
///
/// Uniform and normal variates are derived from raw engine words instead of
/// the standard-library distributions, whose algorithms are
/// implementation-defined; this keeps every draw bit-identical across
/// standard libraries and platforms. Substreams are labelled by name so the
/// stages of a run (preprocess/train/eval/downstream) cannot perturb each
/// other's draws.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed),
                          static_cast<std::uint32_t>(seed >> 32)};
        engine_.seed(seq);
    }

    Rng(std::uint64_t root_seed, std::string_view stream_name) {
        const std::uint64_t h = fnv1a(stream_name);
        std::seed_seq seq{static_cast<std::uint32_t>(root_seed),
                          static_cast<std::uint32_t>(root_seed >> 32),
                          static_cast<std::uint32_t>(h),
                          static_cast<std::uint32_t>(h >> 32)};
        engine_.seed(seq);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller (no caching, so the stream position
    /// is a pure function of the number of calls).
    double normal() {
        const double u1 = 1.0 - uniform(); // (0, 1]
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * std::numbers::pi * u2);
    }

    /// Uniform integer in [0, n). Rejection sampling, no modulo bias.
    std::uint64_t uniform_int(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t draw = engine_();
        while (draw >= limit) {
            draw = engine_();
        }
        return draw % n;
    }

    /// Fisher-Yates shuffle.
    template <typename T> void shuffle(std::vector<T>& values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            std::swap(values[i - 1], values[uniform_int(i)]);
        }
    }

    /// Engine state as text, for checkpoint provenance.
    std::string state() const {
        std::ostringstream os;
        os << engine_;
        return os.str();
    }

    void restore(const std::string& text) {
        std::istringstream is(text);
        is >> engine_;
    }

  private:
    static std::uint64_t fnv1a(std::string_view text) {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (const char c : text) {
            h ^= static_cast<std::uint8_t>(c);
            h *= 0x100000001b3ULL;
        }
        return h;
    }

    std::mt19937_64 engine_;
};

} // namespace qsynth
