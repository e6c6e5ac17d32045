#pragma once

#include <algorithm>
#include <cstddef>
#include <type_traits>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace sattn {

inline bool openmp_enabled() noexcept {
#ifdef _OPENMP
  return true;
#else
  return false;
#endif
}

inline int max_threads() noexcept {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

/// Evaluates compute(t) for t in [0, count) in parallel blocks and feeds the
/// results to reduce() strictly in ascending t, so any floating-point
/// accumulation in reduce() is independent of the thread count.
template <class Compute, class Reduce>
void ordered_parallel_for(std::size_t count, Compute&& compute, Reduce&& reduce, std::size_t block = 64) {
  using Result = std::invoke_result_t<Compute&, std::size_t>;
  std::vector<Result> buffer(std::min(block, count));
  for (std::size_t start = 0; start < count; start += block) {
    const std::size_t len = std::min(block, count - start);
    const auto slen = static_cast<std::ptrdiff_t>(len);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t t = 0; t < slen; ++t) {
      buffer[static_cast<std::size_t>(t)] = compute(start + static_cast<std::size_t>(t));
    }
    for (std::size_t t = 0; t < len; ++t) reduce(start + t, buffer[t]);
  }
}

}  // namespace sattn
