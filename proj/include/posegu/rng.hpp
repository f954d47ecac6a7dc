#pragma once

#include <cstdint>
#include <random>

namespace posegu {

using Rng = std::mt19937_64;

// Independent generator for (seed, stream, tag). Same inputs, same stream.
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0, std::uint64_t tag = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(tag >> 32)};
  return Rng(seq);
}

// Uniform draw on [lo, hi); returns lo exactly when lo == hi.
inline double uniform(Rng& rng, double lo, double hi) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  return lo + (hi - lo) * unit(rng);
}

// Stream tags, so that unrelated consumers of one seed never share draws.
namespace rng_tag {
inline constexpr std::uint64_t kSequence = 0x5e9;
inline constexpr std::uint64_t kSeedSelect = 0x5eed;
inline constexpr std::uint64_t kGtSubsample = 0x9751;
inline constexpr std::uint64_t kInit = 0x1417;
inline constexpr std::uint64_t kShuffleGenerated = 0x54a1;
inline constexpr std::uint64_t kShuffleGt = 0x54a2;
inline constexpr std::uint64_t kBenchmark = 0xbe7c;
}  // namespace rng_tag

}  // namespace posegu
