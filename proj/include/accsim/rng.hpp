#pragma once

#include <cstdint>
#include <random>

namespace accsim {

/// SplitMix64 finalizer; used to derive independent seeds for named streams.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Fixed stream identifiers. Agent i draws from stream kAgentBase + i, so the
/// data of one agent does not depend on how many agents precede it.
namespace stream {
inline constexpr std::uint64_t kCovariance = 1;
inline constexpr std::uint64_t kGroundTruth = 2;
inline constexpr std::uint64_t kShuffle = 3;
inline constexpr std::uint64_t kTopology = 4;
inline constexpr std::uint64_t kAgentBase = 1000;
}  // namespace stream

/// Engine for stream `stream_id` (and sub-stream `sub`) of a master seed.
inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream_id,
                                   std::uint64_t sub = 0) {
  std::uint64_t s = splitmix64(seed);
  s = splitmix64(s ^ splitmix64(stream_id));
  s = splitmix64(s ^ splitmix64(sub + 0x632BE59BD9B4E019ull));
  return std::mt19937_64(s);
}

}  // namespace accsim
