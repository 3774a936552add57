#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "hitpredict/error.hpp"
#include "hitpredict/random.hpp"

namespace hitpredict {

inline constexpr double kTestFraction = 0.20;
inline constexpr double kValidationFraction = 0.25;  // of the non-test rows
inline constexpr double kTwoWayTestFraction = 0.30;

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
  std::uint64_t seed = 0;

  friend bool operator==(const SplitIndices&, const SplitIndices&) = default;
};

// floor(x + 0.5); the epsilon absorbs representation error in products such
// as 0.3 * 2063.
inline std::size_t round_half_up(double x) {
  return static_cast<std::size_t>(std::floor(x + 0.5 + 1e-9));
}

namespace detail {

inline std::vector<std::size_t> shuffled_indices(std::size_t n, SplitMix64& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  rng.shuffle(idx);
  return idx;
}

// Cuts `pool` (already shuffled) into test / validation / train by the
// rounding rule. validation_fraction == 0 gives a two-way split.
inline void carve(std::span<const std::size_t> pool, double test_fraction,
                  double validation_fraction, SplitIndices& out) {
  const std::size_t n = pool.size();
  const std::size_t n_test = round_half_up(test_fraction * static_cast<double>(n));
  const std::size_t n_val =
      round_half_up(validation_fraction * static_cast<double>(n - n_test));
  out.test.insert(out.test.end(), pool.begin(), pool.begin() + n_test);
  out.validation.insert(out.validation.end(), pool.begin() + n_test,
                        pool.begin() + n_test + n_val);
  out.train.insert(out.train.end(), pool.begin() + n_test + n_val, pool.end());
}

inline SplitIndices stratified(std::span<const int> labels, std::uint64_t seed,
                               double test_fraction, double validation_fraction) {
  SplitMix64 rng(seed);
  std::vector<std::size_t> idx = shuffled_indices(labels.size(), rng);
  std::vector<std::size_t> neg, pos;
  for (std::size_t i : idx) (labels[i] == 1 ? pos : neg).push_back(i);
  SplitIndices s;
  s.seed = seed;
  carve(neg, test_fraction, validation_fraction, s);
  carve(pos, test_fraction, validation_fraction, s);
  return s;
}

}  // namespace detail

// Shuffles 0..n-1 with SplitMix64(seed), then takes
// n_test = round_half_up(0.20 n), n_val = round_half_up(0.25 (n - n_test)),
// train = the rest, in that order of the permutation.
inline SplitIndices split(std::size_t n_rows, std::uint64_t seed) {
  if (n_rows < 5)
    throw ValidationError("three-way split needs at least 5 rows, got " +
                          std::to_string(n_rows));
  SplitMix64 rng(seed);
  const auto idx = detail::shuffled_indices(n_rows, rng);
  SplitIndices s;
  s.seed = seed;
  detail::carve(idx, kTestFraction, kValidationFraction, s);
  return s;
}

inline SplitIndices split_two_way(std::size_t n_rows, std::uint64_t seed,
                                  double test_fraction = kTwoWayTestFraction) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw ValidationError("test fraction " + std::to_string(test_fraction) +
                          " outside (0, 1)");
  if (n_rows < 2)
    throw ValidationError("two-way split needs at least 2 rows, got " +
                          std::to_string(n_rows));
  SplitMix64 rng(seed);
  const auto idx = detail::shuffled_indices(n_rows, rng);
  SplitIndices s;
  s.seed = seed;
  detail::carve(idx, test_fraction, 0.0, s);
  return s;
}

// Stratified variants: each class is shuffled and cut separately, so part
// sizes can differ by one from the unstratified rule.
inline SplitIndices split_stratified(std::span<const int> labels, std::uint64_t seed) {
  if (labels.size() < 5)
    throw ValidationError("three-way split needs at least 5 rows, got " +
                          std::to_string(labels.size()));
  return detail::stratified(labels, seed, kTestFraction, kValidationFraction);
}

inline SplitIndices split_two_way_stratified(std::span<const int> labels,
                                             std::uint64_t seed,
                                             double test_fraction = kTwoWayTestFraction) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw ValidationError("test fraction " + std::to_string(test_fraction) +
                          " outside (0, 1)");
  return detail::stratified(labels, seed, test_fraction, 0.0);
}

}  // namespace hitpredict
