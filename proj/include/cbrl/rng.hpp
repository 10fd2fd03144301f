#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace cbrl {

using Rng = std::mt19937_64;

/// Builds an independent generator for one logical stream, identified by a
/// master seed plus any number of stream coordinates (run index, grid cell,
/// purpose tag, ...). Equal inputs give equal streams on every invocation.
inline Rng make_rng(std::uint64_t master_seed, std::initializer_list<std::uint64_t> stream = {}) {
    std::vector<std::uint32_t> words;
    words.reserve(2 + 2 * stream.size());
    auto push = [&words](std::uint64_t v) {
        words.push_back(static_cast<std::uint32_t>(v & 0xffffffffu));
        words.push_back(static_cast<std::uint32_t>(v >> 32));
    };
    push(master_seed);
    for (auto s : stream) push(s);
    std::seed_seq seq(words.begin(), words.end());
    return Rng(seq);
}

/// Uniform double in [0, 1).
inline double uniform01(Rng& rng) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline double uniform(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Uniform integer in [0, n).
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

inline bool bernoulli(Rng& rng, double p) {
    return uniform01(rng) < p;
}

// Stream tags shared by the agent and the runners.
namespace stream {
inline constexpr std::uint64_t kEnvTrain = 0x656e7674;  // "envt"
inline constexpr std::uint64_t kEnvEval = 0x656e7665;   // "enve"
inline constexpr std::uint64_t kAgent = 0x6167656e;     // "agen"
inline constexpr std::uint64_t kInit = 0x696e6974;      // "init"
inline constexpr std::uint64_t kBandit = 0x62616e64;    // "band"
}  // namespace stream

}  // namespace cbrl
