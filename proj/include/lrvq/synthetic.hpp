#pragma once

#include <cstdint>
#include <string>

#include "lrvq/image.hpp"

namespace lrvq {

/// splitmix64; the corpus generator's only randomness source, chosen so the
/// draw sequence is reproducible from the seed alone.
struct SplitMix64 {
  std::uint64_t state = 0;

  std::uint64_t next() {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  double u01() { return (next() >> 11) * (1.0 / 9007199254740992.0); }
};

/// Seeded sum of 2-D sinusoids plus a linear gradient, affinely normalized
/// to [0,1] per channel. (seed, index) fully determine the image.
ImageTensor synthesizeImage(std::uint64_t seed, std::size_t index,
                            std::size_t height, std::size_t width,
                            std::size_t channels = 1);

/// Writes `count` images img###.pgm/ppm into `dir`, numbered and seeded from
/// `offset` so disjoint index ranges give disjoint image sets.
void generateCorpus(const std::string& dir, std::uint64_t seed,
                    std::size_t count, std::size_t offset, std::size_t height,
                    std::size_t width, std::size_t channels = 1);

}  // namespace lrvq
