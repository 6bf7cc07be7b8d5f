#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace treerecon {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent stream for work unit `index` of a run keyed by `master`.
// `tag` separates different consumers (trees vs broadcasts, say) that share
// a master seed and index.
inline std::mt19937_64 make_stream(std::uint64_t master, std::uint64_t index,
                                   std::uint64_t tag = 0) {
  const std::uint64_t s =
      splitmix64(splitmix64(master ^ splitmix64(tag)) + index);
  return std::mt19937_64(s);
}

// Uniform in [0, 1) built from the top 53 bits; unlike
// std::uniform_real_distribution this is identical across standard libraries.
inline double uniform01(std::mt19937_64& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

// Uniform in (0, 1].
inline double uniform_open0(std::mt19937_64& eng) {
  return (static_cast<double>(eng() >> 11) + 1.0) * 0x1.0p-53;
}

inline double standard_exponential(std::mt19937_64& eng) {
  return -std::log(uniform_open0(eng));
}

inline double standard_normal(std::mt19937_64& eng) {
  // Box-Muller, one value per call.
  const double u1 = uniform_open0(eng);
  const double u2 = uniform01(eng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace treerecon
