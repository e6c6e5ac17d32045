#pragma once

#include <cstddef>
#include <cstdint>

#include "sattn/masks.hpp"
#include "sattn/rng.hpp"

namespace sattn {

/// Pr[j in sigma^-1(N_w(sigma(i)))] = (w-1)/(n-1) for i != j under a circular window.
double connection_probability(std::size_t n, std::size_t w);

/// Off-diagonal density expected after the causal intersection: (w-1)/(2(n-1)).
double causal_connection_probability(std::size_t n, std::size_t w);

struct ExactProbability {
  std::uint64_t hits = 0;
  std::uint64_t total = 0;
  double value() const noexcept { return total ? static_cast<double>(hits) / static_cast<double>(total) : 0.0; }
};

/// Enumerates all n! permutations (n <= 10) and counts those where query i's
/// stochastic window contains key j.
ExactProbability connection_probability_exhaustive(std::size_t n, const WindowSpec& spec, std::size_t i,
                                                   std::size_t j);

struct ProbabilityEstimate {
  std::size_t n = 0;
  std::size_t w = 0;
  bool causal = false;
  std::size_t trials = 0;
  double estimate = 0;
  double std_error = 0;
  double analytic = 0;
};

/// Monte Carlo over fresh circular-window permutations.
///
/// Non-causal: the fraction of trials in which query `i` has key `j` in its
/// stochastic window (defaults i = 0, j = n-1). Causal: the mean over trials of
/// the off-diagonal density of intersect_causal(build_stochastic_mask(...)).
///
/// One draw from `rng` fixes a base seed; trial t uses derive_seed(base, 0, t),
/// so the result does not depend on the thread count.
ProbabilityEstimate connection_probability_mc(std::size_t n, std::size_t w, std::size_t trials, bool causal,
                                              SeededRng& rng, std::size_t i = 0, std::size_t j = SIZE_MAX);

}  // namespace sattn
