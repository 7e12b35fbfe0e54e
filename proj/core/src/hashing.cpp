// Copyright 2026 The DAR Authors
// SPDX-License-Identifier: Apache-2.0

#include "dar/hashing.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace dar {

std::uint64_t mix64(std::uint64_t x) noexcept {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

std::uint64_t hash64(std::string_view bytes, std::uint64_t seed) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ mix64(seed);
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return mix64(h);
}

std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) noexcept {
  return mix64(a ^ (mix64(b) + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2)));
}

std::vector<double> seeded_gaussian(std::uint64_t seed, std::size_t n) {
  std::mt19937_64 gen(seed);
  constexpr double kScale = 1.0 / 9007199254740992.0;  // 2^-53
  std::vector<double> out;
  out.reserve(n + 1);
  while (out.size() < n) {
    const double u1 = 1.0 - static_cast<double>(gen() >> 11) * kScale;
    const double u2 = static_cast<double>(gen() >> 11) * kScale;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    out.push_back(r * std::cos(theta));
    out.push_back(r * std::sin(theta));
  }
  out.resize(n);
  return out;
}

std::uint64_t derive_generation_seed(std::uint64_t seed_base, std::string_view session_id,
                                     unsigned turn, unsigned k) noexcept {
  std::uint64_t h = hash64(session_id, seed_base);
  h = hash_combine(h, turn);
  return hash_combine(h, k);
}

}  // namespace dar
