#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace nopab {

// All randomness in the toolkit flows through one seedable generator per
// session/run. The helpers below replace std::uniform_*_distribution and
// std::shuffle, whose outputs are implementation-defined: the reproducibility
// contract (identical seed -> bit-identical outputs) has to hold across
// compilers, so the sampling algorithms are pinned here.
using Rng = std::mt19937_64;

// Unbiased integer in [0, bound) via rejection sampling.
template <class Urbg>
inline std::uint64_t uniform_below(Urbg& rng, std::uint64_t bound) {
  if (bound == 0) return 0;
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

// Uniform double in [0, 1) with 53 random bits.
template <class Urbg>
inline double uniform_double(Urbg& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

template <class Urbg>
inline bool random_bit(Urbg& rng) {
  return (rng() >> 63) != 0;
}

// Fisher-Yates; deterministic replacement for std::shuffle.
template <class T, class Urbg>
inline void shuffle(std::vector<T>& v, Urbg& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(uniform_below(rng, i));
    std::swap(v[i - 1], v[j]);
  }
}

// Identity permutation of the given length, shuffled.
template <class Urbg>
inline std::vector<std::uint32_t> random_permutation(std::size_t len, Urbg& rng) {
  std::vector<std::uint32_t> perm(len);
  for (std::size_t i = 0; i < len; ++i) perm[i] = static_cast<std::uint32_t>(i);
  shuffle(perm, rng);
  return perm;
}

// k distinct indices from [0, total), ascending.
template <class Urbg>
inline std::vector<std::uint32_t> sample_positions(std::size_t total, std::size_t k,
                                                   Urbg& rng) {
  std::vector<std::uint32_t> idx(total);
  for (std::size_t i = 0; i < total; ++i) idx[i] = static_cast<std::uint32_t>(i);
  for (std::size_t i = 0; i < k && i + 1 < total; ++i) {
    std::size_t j = i + static_cast<std::size_t>(uniform_below(rng, total - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace nopab
