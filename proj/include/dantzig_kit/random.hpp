#pragma once

#include <cstdint>
#include <random>

namespace dantzig_kit {

// Independent stream for one replicate, keyed by (seed, n, replicate, tag).
// Streams are addressable directly, so any worker can build any replicate.
inline std::mt19937_64 replicate_stream(std::uint64_t seed, std::uint64_t n, std::uint64_t rep,
                                        std::uint64_t tag = 0) {
  auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); };
  auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  std::seed_seq seq{lo(seed), hi(seed), lo(n), hi(n), lo(rep), hi(rep), lo(tag), hi(tag)};
  return std::mt19937_64(seq);
}

}  // namespace dantzig_kit
