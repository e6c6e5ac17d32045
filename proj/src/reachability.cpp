#include "sattn/reachability.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <string>

#include "sattn/error.hpp"
#include "sattn/parallel.hpp"

namespace sattn {

std::string_view to_string(RoutingMode m) noexcept {
  switch (m) {
    case RoutingMode::SWA:
      return "swa";
    case RoutingMode::SA:
      return "sa";
    case RoutingMode::Fused:
      return "fused";
  }
  return "?";
}

RoutingMode parse_routing_mode(std::string_view s) {
  if (s == "swa") return RoutingMode::SWA;
  if (s == "sa") return RoutingMode::SA;
  if (s == "fused" || s == "sa+swa") return RoutingMode::Fused;
  throw ConfigError("unknown routing mode '" + std::string(s) + "'");
}

KeyLists layer_key_lists(std::size_t n, const WindowSpec& spec, RoutingMode mode, const Permutation& sigma) {
  const bool causal = spec.convention == WindowConvention::CausalOneSided;
  if (mode == RoutingMode::SWA) return stochastic_key_lists(n, spec, Permutation::identity(n), causal);
  KeyLists sa = stochastic_key_lists(n, spec, sigma, causal);
  if (mode == RoutingMode::SA) return sa;
  const KeyLists swa = stochastic_key_lists(n, spec, Permutation::identity(n), causal);
  KeyLists fused(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::set_union(sa[i].begin(), sa[i].end(), swa[i].begin(), swa[i].end(), std::back_inserter(fused[i]));
  }
  return fused;
}

namespace {

using Counts = std::vector<std::uint32_t>;

struct SeedRun {
  std::vector<Counts> counts;  // [layer][source] = |R_l(source)|
};

Permutation layer_permutation(std::size_t n, Seed seed, std::size_t layer) {
  SeededRng rng(derive_seed(seed, layer, 0));
  return sample_permutation(n, rng);
}

// Transposed propagation. reached_by[k] is the bitset of sources i with
// k in R_l(i). Then reached_by'[k] = OR over queries j that attend to k of
// reached_by[j]; the diagonal keeps R_l inside R_{l+1}.
SeedRun run_bitset(std::size_t n, const WindowSpec& spec, std::size_t layers, RoutingMode mode, Seed seed) {
  const std::size_t words = (n + 63) / 64;
  std::vector<std::uint64_t> cur(n * words, 0), next(n * words, 0);
  for (std::size_t k = 0; k < n; ++k) cur[k * words + k / 64] |= std::uint64_t{1} << (k % 64);

  SeedRun run;
  run.counts.assign(layers + 1, Counts(n, 1));
  std::vector<std::vector<std::size_t>> attended_by(n);

  for (std::size_t l = 1; l <= layers; ++l) {
    const auto& prev = run.counts[l - 1];
    if (std::all_of(prev.begin(), prev.end(), [n](std::uint32_t c) { return c == n; })) {
      std::fill(run.counts[l].begin(), run.counts[l].end(), static_cast<std::uint32_t>(n));
      continue;
    }
    const Permutation sigma =
        mode == RoutingMode::SWA ? Permutation::identity(n) : layer_permutation(n, seed, l);
    const KeyLists keys = layer_key_lists(n, spec, mode, sigma);
    for (auto& a : attended_by) a.clear();
    for (std::size_t j = 0; j < n; ++j)
      for (auto k : keys[j]) attended_by[k].push_back(j);

    std::fill(next.begin(), next.end(), 0);
    for (std::size_t k = 0; k < n; ++k) {
      std::uint64_t* dst = next.data() + k * words;
      for (auto j : attended_by[k]) {
        const std::uint64_t* src = cur.data() + j * words;
        for (std::size_t t = 0; t < words; ++t) dst[t] |= src[t];
      }
    }
    cur.swap(next);

    auto& counts = run.counts[l];
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t k = 0; k < n; ++k) {
      const std::uint64_t* row = cur.data() + k * words;
      for (std::size_t t = 0; t < words; ++t) {
        std::uint64_t bits = row[t];
        while (bits) {
          const int b = std::countr_zero(bits);
          ++counts[t * 64 + static_cast<std::size_t>(b)];
          bits &= bits - 1;
        }
      }
    }
  }
  return run;
}

SeedRun run_serial(std::size_t n, const WindowSpec& spec, std::size_t layers, RoutingMode mode, Seed seed) {
  std::vector<KeyLists> layer_keys;
  for (std::size_t l = 1; l <= layers; ++l) {
    const Permutation sigma =
        mode == RoutingMode::SWA ? Permutation::identity(n) : layer_permutation(n, seed, l);
    layer_keys.push_back(layer_key_lists(n, spec, mode, sigma));
  }
  SeedRun run;
  run.counts.assign(layers + 1, Counts(n, 1));
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<char> reached(n, 0);
    std::vector<std::size_t> members{i};
    reached[i] = 1;
    for (std::size_t l = 1; l <= layers; ++l) {
      const auto frontier = members;
      for (auto j : frontier)
        for (auto k : layer_keys[l - 1][j])
          if (!reached[k]) {
            reached[k] = 1;
            members.push_back(k);
          }
      run.counts[l][i] = static_cast<std::uint32_t>(members.size());
    }
  }
  return run;
}

CoverageCurve aggregate(std::size_t n, const WindowSpec& spec, std::size_t layers, RoutingMode mode,
                        const std::vector<SeedRun>& runs) {
  CoverageCurve curve;
  curve.n = n;
  curve.w = spec.w;
  curve.mode = mode;
  curve.convention = spec.convention;
  const double dn = static_cast<double>(n);

  curve.per_seed_mean.assign(runs.size(), std::vector<double>(layers + 1));
  std::vector<std::uint32_t> pooled;
  for (std::size_t l = 0; l <= layers; ++l) {
    pooled.clear();
    std::uint64_t total = 0;
    for (std::size_t s = 0; s < runs.size(); ++s) {
      const auto& c = runs[s].counts[l];
      const std::uint64_t seed_total = std::accumulate(c.begin(), c.end(), std::uint64_t{0});
      curve.per_seed_mean[s][l] = static_cast<double>(seed_total) / (dn * dn);
      total += seed_total;
      pooled.insert(pooled.end(), c.begin(), c.end());
    }
    CoverageStats st;
    st.mean = static_cast<double>(total) / (dn * dn * static_cast<double>(runs.size()));
    std::sort(pooled.begin(), pooled.end());
    st.min = pooled.front() / dn;
    st.max = pooled.back() / dn;
    const std::size_t m = pooled.size();
    st.median = (m % 2 == 1) ? pooled[m / 2] / dn : 0.5 * (pooled[m / 2 - 1] + pooled[m / 2]) / dn;
    curve.layers.push_back(st);
  }

  if (mode != RoutingMode::SWA) {
    for (std::size_t l = 0; l < layers; ++l) {
      std::vector<double> per_seed;
      for (const auto& run : runs) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          acc += static_cast<double>(run.counts[l + 1][i]) - expansion_lower_bound(run.counts[l][i], n, spec.w);
        }
        per_seed.push_back(acc / dn);
      }
      ExpansionSlack slack;
      const double S = static_cast<double>(per_seed.size());
      slack.mean = std::accumulate(per_seed.begin(), per_seed.end(), 0.0) / S;
      if (per_seed.size() > 1) {
        double ss = 0.0;
        for (double x : per_seed) ss += (x - slack.mean) * (x - slack.mean);
        slack.std_error = std::sqrt(ss / (S - 1) / S);
      }
      curve.expansion.push_back(slack);
    }
  }
  return curve;
}

template <class Runner>
CoverageCurve simulate(std::size_t n, const WindowSpec& spec, std::size_t layers, RoutingMode mode,
                       const std::vector<Seed>& seeds, Runner runner, bool share_deterministic) {
  validate_window(n, spec);
  if (seeds.empty()) throw ConfigError("simulate_reachability: at least one seed is required");
  std::vector<SeedRun> runs(seeds.size());
  if (mode == RoutingMode::SWA && share_deterministic) {
    const SeedRun once = runner(n, spec, layers, mode, seeds.front());
    std::fill(runs.begin(), runs.end(), once);
  } else {
    const auto count = static_cast<std::ptrdiff_t>(seeds.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t s = 0; s < count; ++s) {
      runs[static_cast<std::size_t>(s)] = runner(n, spec, layers, mode, seeds[static_cast<std::size_t>(s)]);
    }
  }
  return aggregate(n, spec, layers, mode, runs);
}

}  // namespace

CoverageCurve simulate_reachability(std::size_t n, const WindowSpec& spec, std::size_t layers, RoutingMode mode,
                                    const std::vector<Seed>& seeds) {
  return simulate(n, spec, layers, mode, seeds, run_bitset, true);
}

CoverageCurve simulate_reachability_serial(std::size_t n, const WindowSpec& spec, std::size_t layers,
                                           RoutingMode mode, const std::vector<Seed>& seeds) {
  validate_window(n, spec);
  if (seeds.empty()) throw ConfigError("simulate_reachability: at least one seed is required");
  std::vector<SeedRun> runs;
  for (auto seed : seeds) runs.push_back(run_serial(n, spec, layers, mode, seed));
  return aggregate(n, spec, layers, mode, runs);
}

std::optional<std::size_t> layers_to_coverage(const CoverageCurve& curve, double threshold) {
  for (std::size_t l = 0; l < curve.layers.size(); ++l)
    if (curve.layers[l].mean >= threshold) return l;
  return std::nullopt;
}

std::vector<std::optional<std::size_t>> layers_to_coverage_per_seed(const CoverageCurve& curve, double threshold) {
  std::vector<std::optional<std::size_t>> out;
  for (const auto& seed_curve : curve.per_seed_mean) {
    std::optional<std::size_t> hit;
    for (std::size_t l = 0; l < seed_curve.size(); ++l)
      if (seed_curve[l] >= threshold) {
        hit = l;
        break;
      }
    out.push_back(hit);
  }
  return out;
}

double expansion_lower_bound(std::size_t r, std::size_t n, std::size_t w) {
  if (n == 0 || r < 1 || r > n) throw ConfigError("expansion_lower_bound: need 1 <= r <= n");
  if (n == 1) return 1.0;
  const double p = static_cast<double>(w - 1) / static_cast<double>(n - 1);
  const double miss = r * std::log1p(-p);  // log (1-p)^r
  const double hit = -std::expm1(miss);     // 1 - (1-p)^r
  return static_cast<double>(r) + static_cast<double>(n - r) * hit;
}

std::size_t swa_circular_reach(std::size_t n, std::size_t w, std::size_t layers) {
  return std::min(n, layers * (w - 1) + 1);
}

std::size_t connectome_depth_prediction(std::uint64_t n, std::uint64_t k) {
  if (k < 2 || n < 1) throw ConfigError("connectome_depth_prediction: need k >= 2 and n >= 1");
  std::size_t depth = 0;
  std::uint64_t reach = 1;
  while (reach < n) {
    reach = (reach > n / k) ? n : reach * k;
    ++depth;
  }
  return depth;
}

std::vector<Seed> derive_seed_list(Seed root, std::size_t count) {
  std::vector<Seed> seeds(count);
  for (std::size_t s = 0; s < count; ++s) seeds[s] = derive_seed(root, 0, s);
  return seeds;
}

}  // namespace sattn
