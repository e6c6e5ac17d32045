#pragma once

#include <cstddef>
#include <string_view>

namespace sattn {

enum class CostMode { Full, SWA, SA, Fused };

std::string_view to_string(CostMode m) noexcept;
CostMode parse_cost_mode(std::string_view s);

/// Analytic FLOP counts for one attention layer of width d = h * d_h.
///
/// With P scored query-key pairs per head (n^2 for full attention, n w for the
/// windowed mechanisms):
///   scores   2 P d        (q.k over all heads)
///   values   2 P d        (weighted sum of v)
///   softmax  4 P h        (max, subtract+exp, sum, divide per entry)
/// Fused runs SWA and SA side by side, so its attention part is exactly twice
/// SA's, plus the two sigmoid gates:
///   gates    4 n d^2 + 5 n d   (two d x d projections, two sigmoids,
///                               two gated products, one sum)
/// SA and Fused additionally move 4 n d values for the row gathers/scatter;
/// those are memory moves and are reported separately from FLOPs.
struct CostReport {
  CostMode mode = CostMode::Full;
  double n = 0, w = 0, d = 0, heads = 1;
  double score_flops = 0;
  double value_flops = 0;
  double softmax_flops = 0;
  double gate_flops = 0;
  double permute_moves = 0;

  double attention_flops() const noexcept { return score_flops + value_flops + softmax_flops; }
  double total_flops() const noexcept { return attention_flops() + gate_flops; }
};

/// Throws ConfigError on non-positive sizes or w > n for windowed modes.
CostReport cost_model(std::size_t n, std::size_t w, std::size_t d, CostMode mode, std::size_t heads = 1);

}  // namespace sattn
