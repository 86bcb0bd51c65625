/*
 * Copyright 2026 The Tweedie Conformal Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef TWEEDIE_CONFORMAL_RESAMPLING_HPP_
#define TWEEDIE_CONFORMAL_RESAMPLING_HPP_

#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "tweedie_conformal/errors.hpp"

namespace tweedie_conformal::resampling {

// Fisher-Yates permutation of 0..n-1 driven by a 64-bit Mersenne twister.
// Draws use rejection sampling on raw engine output so the permutation is
// identical across standard library implementations.
inline std::vector<std::size_t> permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    const std::uint64_t bound = i;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t r;
    do {
      r = rng();
    } while (r >= limit);
    std::swap(idx[i - 1], idx[static_cast<std::size_t>(r % bound)]);
  }
  return idx;
}

// Fold label in [0, folds) per row; depends only on (n, folds, seed).
inline std::vector<int> fold_assignment(std::size_t n, int folds, std::uint64_t seed) {
  if (folds < 1) throw ParameterError("fold count must be positive");
  if (n < static_cast<std::size_t>(folds)) {
    throw ParameterError("fewer rows than cross-validation folds");
  }
  const auto perm = permutation(n, seed);
  std::vector<int> out(n);
  for (std::size_t k = 0; k < n; ++k) out[perm[k]] = static_cast<int>(k % static_cast<std::size_t>(folds));
  return out;
}

// Disjoint random index sets of the requested sizes, in permutation order.
inline std::vector<std::vector<std::size_t>> split_sizes(std::size_t n,
                                                         const std::vector<std::size_t>& sizes,
                                                         std::uint64_t seed) {
  std::size_t total = 0;
  for (std::size_t s : sizes) total += s;
  if (total > n) throw ParameterError("requested partition sizes exceed the row count");
  const auto perm = permutation(n, seed);
  std::vector<std::vector<std::size_t>> out;
  std::size_t pos = 0;
  for (std::size_t s : sizes) {
    out.emplace_back(perm.begin() + static_cast<long>(pos), perm.begin() + static_cast<long>(pos + s));
    pos += s;
  }
  return out;
}

// Deterministic per-stream seed derived from a base seed (splitmix64).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace tweedie_conformal::resampling

#endif  // TWEEDIE_CONFORMAL_RESAMPLING_HPP_
