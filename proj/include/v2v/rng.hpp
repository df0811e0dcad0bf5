#pragma once

#include <cstdint>
#include <random>

namespace v2v {

using Rng = std::mt19937_64;

// Independent random streams derived from one master seed. Each simulation
// component draws from its own stream so that, for a fixed episode seed, the
// vehicle drop and fading sequence do not depend on which policy is running.
enum class Stream : std::uint64_t {
  kEpisode = 1,
  kDrop = 2,
  kCueDrop = 3,
  kLinkSelect = 4,
  kLargeScale = 5,
  kFading = 6,
  kMobility = 7,
  kPolicy = 8,
  kInit = 9,
  kReplay = 10,
  kExploration = 11,
};

std::uint64_t splitmix64(std::uint64_t x);

// Counter-based seed derivation: seed = mix(mix(master ^ stream) + index).
// Pure function, so per-episode seeds can be computed in any order or thread.
std::uint64_t derive_seed(std::uint64_t master, Stream stream, std::uint64_t index = 0);

inline Rng make_rng(std::uint64_t master, Stream stream, std::uint64_t index = 0) {
  return Rng(derive_seed(master, stream, index));
}

}  // namespace v2v
