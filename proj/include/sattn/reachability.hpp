#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "sattn/masks.hpp"
#include "sattn/rng.hpp"

namespace sattn {

enum class RoutingMode { SWA, SA, Fused };

std::string_view to_string(RoutingMode m) noexcept;
RoutingMode parse_routing_mode(std::string_view s);

/// Per-layer key lists for one attention layer of the given routing mode.
/// Circular windows model the non-causal graph; the one-sided
/// convention applies the causal intersection to SA (and hence Fused).
KeyLists layer_key_lists(std::size_t n, const WindowSpec& spec, RoutingMode mode, const Permutation& sigma);

struct CoverageStats {
  double mean = 0;  ///< E|R_l(i)| / n over sources and seeds
  double min = 0;
  double median = 0;
  double max = 0;
};

/// Mean over seeds of mean_i(|R_{l+1}(i)| - bound(|R_l(i)|)), with its standard
/// error across seeds. A non-negative mean (up to noise) is what the expansion
/// bound predicts.
struct ExpansionSlack {
  double mean = 0;
  double std_error = 0;
};

/// Reachable-set coverage per layer. R_0(i) = {i};
/// R_{l+1}(i) = R_l(i) U { k : j in R_l(i), layer l+1 lets j attend to k }.
struct CoverageCurve {
  std::size_t n = 0;
  std::size_t w = 0;
  RoutingMode mode = RoutingMode::SA;
  WindowConvention convention = WindowConvention::SymmetricCircular;
  std::vector<CoverageStats> layers;                 ///< index l = 0..L
  std::vector<std::vector<double>> per_seed_mean;    ///< [seed][l]
  std::vector<ExpansionSlack> expansion;             ///< [l] for the l -> l+1 step; empty for SWA
};

/// Exact bitset propagation over all n sources. Layer l of seed s draws its
/// permutation from SeededRng(derive_seed(seeds[s], l, 0)). SWA is
/// deterministic and computed once for all seeds.
CoverageCurve simulate_reachability(std::size_t n, const WindowSpec& spec, std::size_t layers, RoutingMode mode,
                                    const std::vector<Seed>& seeds);

/// Same contract as simulate_reachability, computed one source at a time with
/// breadth-first set growth. Kept as the reference for tests and the benchmark.
CoverageCurve simulate_reachability_serial(std::size_t n, const WindowSpec& spec, std::size_t layers,
                                           RoutingMode mode, const std::vector<Seed>& seeds);

/// First layer whose mean coverage reaches `threshold`; nullopt if never.
std::optional<std::size_t> layers_to_coverage(const CoverageCurve& curve, double threshold);

/// The same per seed.
std::vector<std::optional<std::size_t>> layers_to_coverage_per_seed(const CoverageCurve& curve, double threshold);

/// r + (n - r) [1 - (1 - (w-1)/(n-1))^r]: lower bound on E|R_{l+1}| given |R_l| = r.
double expansion_lower_bound(std::size_t r, std::size_t n, std::size_t w);

/// Closed-form circular SWA coverage count after l layers: min(n, l (w-1) + 1).
std::size_t swa_circular_reach(std::size_t n, std::size_t w, std::size_t layers);

/// Smallest L with k^L >= n, i.e. ceil(log n / log k) in exact integer arithmetic.
std::size_t connectome_depth_prediction(std::uint64_t n, std::uint64_t k);

/// Seed list for "--seeds N": derive_seed(root, 0, s) for s = 0..N-1.
std::vector<Seed> derive_seed_list(Seed root, std::size_t count);

}  // namespace sattn
