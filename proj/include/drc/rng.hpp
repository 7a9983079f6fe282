#pragma once

#include <cstdint>
#include <random>

namespace drc {

// splitmix64, used to derive independent per-index streams from one seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic stream for sample `index` under a global seed. Streams do not
// depend on worker count, so runs are reproducible under any parallel split.
inline std::mt19937_64 stream_for(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t s = seed ^ (0x517cc1b727220a95ULL * (index + 1));
  std::uint64_t a = splitmix64(s);
  std::uint64_t b = splitmix64(s);
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return std::mt19937_64(seq);
}

inline double uniform01(std::mt19937_64& g) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(g);
}

}  // namespace drc
