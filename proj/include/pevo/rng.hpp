// Copyright 2026 the pevo authors
// SPDX-License-Identifier: Apache-2.0
//
// Deterministic randomness. All draws are hand-rolled on top of
// std::mt19937_64 (the generator is pinned by the standard; the std
// distributions are not), so streams replay bit-identically across
// compilers and standard libraries.

#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <random>
#include <string_view>
#include <vector>

namespace pevo {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ull;
  }
  return h;
}

// Positional seed derivation: stable across processes and independent of
// the order in which concurrent pairs complete. Distinct purpose tags give
// unrelated streams.
inline std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t generation_index,
                                 std::uint64_t pair_index, std::string_view purpose) {
  std::uint64_t h = splitmix64(master_seed ^ 0xA0761D6478BD642Full);
  h = splitmix64(h ^ splitmix64(generation_index));
  h = splitmix64(h ^ splitmix64(pair_index ^ 0xE7037ED1A0B428DBull));
  h = splitmix64(h ^ fnv1a64(purpose));
  return h;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next() { return gen_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Unbiased uniform in [0, n) via rejection.
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::below: n must be positive");
    const std::uint64_t threshold = (-n) % n;
    for (;;) {
      std::uint64_t r = gen_();
      if (r >= threshold) return r % n;
    }
  }

  // Box-Muller; two draws per call, no cached spare.
  double gaussian() {
    double u1 = uniform01();
    double u2 = uniform01();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    constexpr double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
  }

  // Fisher-Yates with unbiased index draws.
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      using std::swap;
      swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace pevo
