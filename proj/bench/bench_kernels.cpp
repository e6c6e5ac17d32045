// Serial references against the OpenMP kernels. Run with OMP_NUM_THREADS set to
// compare thread counts; outputs are bit-identical either way.

#include <benchmark/benchmark.h>

#include "sattn/attention.hpp"
#include "sattn/numerics.hpp"
#include "sattn/parallel.hpp"
#include "sattn/reachability.hpp"
#include "sattn/verify.hpp"

using namespace sattn;

namespace {

AttentionInputs inputs(std::size_t n, std::size_t dh) {
  SeededRng rng(1);
  return AttentionInputs::make(random_matrix(n, dh, rng), random_matrix(n, dh, rng), random_matrix(n, dh, rng));
}

MaskMatrix sa_mask(std::size_t n, std::size_t w) {
  SeededRng rng(2);
  return intersect_causal(build_stochastic_mask(n, {w, WindowConvention::SymmetricCircular}, sample_permutation(n, rng)));
}

void BM_MatmulSerial(benchmark::State& st) {
  SeededRng rng(3);
  const auto n = static_cast<std::size_t>(st.range(0));
  const Matrix a = random_matrix(n, n, rng), b = random_matrix(n, n, rng);
  for (auto _ : st) benchmark::DoNotOptimize(serial::matmul(a, b));
}

void BM_MatmulParallel(benchmark::State& st) {
  SeededRng rng(3);
  const auto n = static_cast<std::size_t>(st.range(0));
  const Matrix a = random_matrix(n, n, rng), b = random_matrix(n, n, rng);
  st.counters["threads"] = max_threads();
  for (auto _ : st) benchmark::DoNotOptimize(matmul(a, b));
}

void BM_AttentionSerial(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  const auto inp = inputs(n, 64);
  const auto mask = sa_mask(n, 64);
  for (auto _ : st) benchmark::DoNotOptimize(serial::attention_forward(inp, mask).y);
}

void BM_AttentionParallel(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  const auto inp = inputs(n, 64);
  const auto mask = sa_mask(n, 64);
  st.counters["threads"] = max_threads();
  for (auto _ : st) benchmark::DoNotOptimize(attention_forward(inp, mask).y);
}

// The O(n w) kernel, for scale against the dense-mask paths above.
void BM_SaForwardBanded(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  const auto inp = inputs(n, 64);
  SeededRng rng(2);
  const auto p = sample_permutation(n, rng);
  for (auto _ : st) benchmark::DoNotOptimize(sa_forward(inp, 64, p));
}

void BM_ReachabilitySerial(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  for (auto _ : st)
    benchmark::DoNotOptimize(simulate_reachability_serial(n, {32, WindowConvention::SymmetricCircular}, 4,
                                                          RoutingMode::SA, {1}));
}

void BM_ReachabilityParallel(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  st.counters["threads"] = max_threads();
  for (auto _ : st)
    benchmark::DoNotOptimize(
        simulate_reachability(n, {32, WindowConvention::SymmetricCircular}, 4, RoutingMode::SA, {1}));
}

}  // namespace

BENCHMARK(BM_MatmulSerial)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MatmulParallel)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AttentionSerial)->Arg(512)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AttentionParallel)->Arg(512)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SaForwardBanded)->Arg(512)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ReachabilitySerial)->Arg(512)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ReachabilityParallel)->Arg(512)->Arg(1024)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
