#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace polalign {

/// Mixes a 64-bit value (splitmix64 finalizer). Used for stable seed derivation.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Derives the seed for a numbered sub-stream from a root seed.
/// Stable indexing: the same (root, stream) pair always yields the same seed,
/// independent of how many other streams exist or in what order they are created.
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream) {
  return mix64(root + 0x9E3779B97F4A7C15ull * (stream + 1));
}

/// Seeded random source with self-contained distributions.
///
/// All draws are implemented on top of the raw mt19937_64 output rather than
/// std::*_distribution, so sequences are bit-identical for a given seed across
/// compilers and standard libraries. Each concurrent worker owns its own source.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform double in (0, 1); safe as a log() argument.
  double uniform_pos() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller (both branches cached, no rejection).
  double normal();

  /// Poisson draw with the given mean. Inversion by sequential search for
  /// small means, Hormann's PTRS transformed rejection for mean >= 10.
  long long poisson(double mean);

  /// Uniform point on the unit sphere (normalized 3D Gaussian).
  Eigen::Vector3d unit_vector();

 private:
  std::mt19937_64 engine_;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace polalign
