#include "sattn/connectivity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "sattn/error.hpp"
#include "sattn/parallel.hpp"
#include "sattn/permutation.hpp"

namespace sattn {

double connection_probability(std::size_t n, std::size_t w) {
  if (n < 2) throw ConfigError("connection_probability: need n >= 2");
  return static_cast<double>(w - 1) / static_cast<double>(n - 1);
}

double causal_connection_probability(std::size_t n, std::size_t w) {
  return connection_probability(n, w) / 2.0;
}

ExactProbability connection_probability_exhaustive(std::size_t n, const WindowSpec& spec, std::size_t i,
                                                   std::size_t j) {
  validate_window(n, spec);
  if (n > 10) throw ConfigError("connection_probability_exhaustive: n! enumeration is capped at n = 10");
  if (i >= n || j >= n) throw ConfigError("connection_probability_exhaustive: pair out of range");
  std::vector<std::size_t> f(n);
  std::iota(f.begin(), f.end(), std::size_t{0});
  ExactProbability r;
  do {
    ++r.total;
    if (window_contains(n, spec, f[i], f[j])) ++r.hits;
  } while (std::next_permutation(f.begin(), f.end()));
  return r;
}

ProbabilityEstimate connection_probability_mc(std::size_t n, std::size_t w, std::size_t trials, bool causal,
                                              SeededRng& rng, std::size_t i, std::size_t j) {
  const WindowSpec spec{w, WindowConvention::SymmetricCircular};
  validate_window(n, spec);
  if (n < 2) throw ConfigError("connection_probability_mc: need n >= 2");
  if (trials < 1) throw ConfigError("connection_probability_mc: trials must be >= 1");
  if (j == SIZE_MAX) j = n - 1;
  if (i >= n || j >= n || i == j) throw ConfigError("connection_probability_mc: need distinct in-range i, j");

  ProbabilityEstimate est;
  est.n = n;
  est.w = w;
  est.causal = causal;
  est.trials = trials;
  est.analytic = causal ? causal_connection_probability(n, w) : connection_probability(n, w);

  const Seed base = rng.next_u64();
  const double pairs = static_cast<double>(n) * static_cast<double>(n - 1);
  double sum = 0.0, sum_sq = 0.0;
  ordered_parallel_for(
      trials,
      [&](std::size_t t) {
        SeededRng trial_rng(derive_seed(base, 0, t));
        const Permutation sigma = sample_permutation(n, trial_rng);
        if (!causal) return window_contains(n, spec, sigma(i), sigma(j)) ? 1.0 : 0.0;
        const KeyLists keys = stochastic_key_lists(n, spec, sigma, true);
        std::size_t ones = 0;
        for (const auto& row : keys) ones += row.size();
        return static_cast<double>(ones - n) / pairs;
      },
      [&](std::size_t, double x) {
        sum += x;
        sum_sq += x * x;
      },
      256);

  const double T = static_cast<double>(trials);
  est.estimate = sum / T;
  if (trials > 1) {
    const double var = std::max(0.0, (sum_sq - T * est.estimate * est.estimate) / (T - 1));
    est.std_error = std::sqrt(var / T);
  }
  return est;
}

}  // namespace sattn
