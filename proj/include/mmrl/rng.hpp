#pragma once

#include <cstdint>
#include <random>

namespace mmrl {

/// SplitMix64 finalizer. Used only to derive seeds, never as a stream.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed of substream `index` under `master`. Substreams of one master are
/// pairwise distinct and independent of the order in which they are drawn.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

/// Platform-independent generator: std::mt19937_64 (its output sequence is
/// fixed by the standard) with uniforms built from the top 53 bits.
class Rng {
 public:
  static constexpr const char* kName = "mt19937_64/splitmix64-split/v1";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace mmrl
