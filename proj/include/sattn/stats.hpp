#pragma once

#include <cstddef>
#include <vector>

#include "sattn/attention.hpp"
#include "sattn/matrix.hpp"
#include "sattn/rng.hpp"

namespace sattn {

/// Every estimator here runs the non-causal circular window unless stated
/// otherwise, so each output is a mean over a uniformly random w-subset.

struct BiasPoint {
  std::size_t w = 0;
  /// RMS over tokens of ||mean_t SA(i) - mean(V)||.
  double deviation = 0.0;
  /// RMS over tokens of sqrt(tr Var[SA(i)] / trials): the MC noise floor of `deviation`.
  double std_error = 0.0;
  /// Same aggregate for the closed-form uniform-attention bias.
  double exact = 0.0;
};

struct BiasReport {
  std::size_t n = 0;
  std::size_t trials = 0;
  double temperature = 0.0;
  std::vector<BiasPoint> points;
};

/// Uniform-attention bias of token i:
///   E[SA(i)] - mean(V) = (V_i - mean(V)) (n - w) / (w (n - 1)),
/// since token i always sits in its own window. Returns the RMS norm over i.
double sa_bias_exact(const Matrix& v, std::size_t w);

/// Averages SA outputs (q = k = v) over `trials` fresh permutations for each
/// window size in `ws`. Temperature kUniformTemperature gives alpha = 1/w.
BiasReport sa_bias_mc(const Matrix& v, const std::vector<std::size_t>& ws, double temperature,
                      std::size_t trials, SeededRng& rng);

struct VarianceReport {
  std::size_t n = 0;
  std::size_t w = 0;
  std::size_t trials = 0;
  double sigma_v2 = 0.0;  ///< (1/n) sum ||V_j - mean(V)||^2
  double b_max = 0.0;     ///< max_j ||V_j||
  double exact = 0.0;     ///< (1/w) ((n - w)/(n - 1)) sigma_v2
  double bound = 0.0;     ///< 4 B^2 / w
  /// Trace variance of the output at a fixed slot of the permuted order.
  double mc = 0.0;
  double mc_std_error = 0.0;
  /// Per-token variance averaged over tokens. Each token is always in its own
  /// window, so only w - 1 of its w terms are random:
  ///   ((w - 1) / w^2) ((n - w) / (n - 2)) sigma_{-i}^2
  double token_exact = 0.0;
  double token_mc = 0.0;
};

/// Closed forms only (trials = 0). Throws ConfigError unless 1 <= w <= n.
VarianceReport sa_variance_exact(const Matrix& v, std::size_t w);

/// Closed forms plus the MC estimates. Throws ConfigError for trials < 2.
VarianceReport sa_variance_mc(const Matrix& v, std::size_t w, std::size_t trials, SeededRng& rng);

struct BVReport {
  std::size_t n = 0;
  std::size_t d = 0;
  std::size_t w = 0;
  std::size_t trials = 0;
  /// ||E[Y] - Y*||^2 summed over tokens.
  double bias2 = 0.0;
  /// ||g_sa * b_sa + g_swa * b_swa||^2; equals bias2 when g_sa + g_swa = 1.
  double bias2_gate_form = 0.0;
  /// ||b_swa||^2, exact.
  double swa_bias2 = 0.0;
  /// sum_i sum_k g_sa[i,k]^2 Var[Y_sa[i,k]].
  double variance = 0.0;
  /// sum_i ||g_sa[i]||^2 v_sa[i] / d, the per-dimension-uniform approximation.
  double variance_uniform_approx = 0.0;
  /// max_k / min_k of the per-dimension SA variance summed over tokens.
  double dim_variance_ratio = 1.0;
  double mse = 0.0;
  double mse_std_error = 0.0;
  double rhs_std_error = 0.0;
  double residual = 0.0;  ///< mse - (bias2 + variance)
  double combined_std_error = 0.0;
};

/// Gated SA + SWA fusion in the uniform-attention regime against Y* = uniform
/// full causal attention. The SA path is causal over the circular window and
/// its gate is sigmoid(V W_sa^T), a function of the layer input only, so it is
/// deterministic given the input. The MSE comes from one stream of
/// permutations; b_sa and Var[Y_sa] come from an independent second stream.
BVReport fusion_bv_decompose(const AttentionInputs& inputs, const GateParams& gates, std::size_t w,
                             std::size_t trials, SeededRng& rng);

}  // namespace sattn
