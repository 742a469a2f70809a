#pragma once
#include <cstddef>
#include <cstdint>
#include <random>

namespace adlab {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  return splitmix64(a ^ splitmix64(b ^ 0x632be59bd9b4e019ULL));
}

using Rng = std::mt19937_64;

// independent stream per (seed, trial); worker count never enters
inline Rng trial_rng(std::uint64_t seed, std::uint64_t trial) { return Rng(mix(seed, trial)); }

inline double uniform01(Rng& r) { return std::uniform_real_distribution<double>(0.0, 1.0)(r); }

inline std::size_t pick(Rng& r, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(r);
}

inline bool bernoulli(Rng& r, double p) { return uniform01(r) < p; }

// u in [0,1) from a hash, used for order-independent lazy draws
inline double hash_unit(std::uint64_t h) { return static_cast<double>(h >> 11) * 0x1.0p-53; }

}  // namespace adlab
