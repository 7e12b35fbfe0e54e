// Copyright 2026 The DAR Authors
// SPDX-License-Identifier: Apache-2.0

// Stable hashing and seeded noise used by the reference backends and by
// per-image generation seeds. The algorithms are frozen: changing them
// changes every reference embedding and every benchmark report.
//
//   mix64(x)        splitmix64 finalizer:
//                     x ^= x >> 30; x *= 0xbf58476d1ce4e5b9;
//                     x ^= x >> 27; x *= 0x94d049bb133111eb;
//                     x ^= x >> 31
//   hash64(b, s)    FNV-1a 64 over the bytes b, starting from
//                   0xcbf29ce484222325 ^ mix64(s), then mix64 of the result.
//   hash_combine    mix64(a ^ (mix64(b) + 0x9e3779b97f4a7c15 + (a << 6) + (a >> 2)))
//   generation seed hash_combine(hash_combine(hash64(session_id, seed_base), t), k)
//   gaussian noise  std::mt19937_64 seeded with the 64-bit seed; each pair of
//                   draws u1, u2 is mapped to (0,1] as (x >> 11) * 2^-53 with
//                   u1 -> 1 - u1, then Box-Muller:
//                   sqrt(-2 ln u1) * cos(2 pi u2), sqrt(-2 ln u1) * sin(2 pi u2).

#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace dar {

std::uint64_t mix64(std::uint64_t x) noexcept;
std::uint64_t hash64(std::string_view bytes, std::uint64_t seed = 0) noexcept;

/// Order-sensitive combination of two hashes.
std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) noexcept;

/// `n` standard-normal draws, identical on every platform for a given seed.
std::vector<double> seeded_gaussian(std::uint64_t seed, std::size_t n);

/// Generation seed for image k of turn t in a session.
std::uint64_t derive_generation_seed(std::uint64_t seed_base, std::string_view session_id,
                                     unsigned turn, unsigned k) noexcept;

}  // namespace dar
