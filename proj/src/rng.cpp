#include "v2v/rng.hpp"

namespace v2v {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, Stream stream, std::uint64_t index) {
  const std::uint64_t base = splitmix64(master ^ (static_cast<std::uint64_t>(stream) * 0xD1B54A32D192ED03ULL));
  return splitmix64(base + index * 0x9E3779B97F4A7C15ULL);
}

}  // namespace v2v
