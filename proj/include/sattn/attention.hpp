#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "sattn/mask_matrix.hpp"
#include "sattn/masks.hpp"
#include "sattn/matrix.hpp"
#include "sattn/permutation.hpp"
#include "sattn/rng.hpp"

namespace sattn {

/// Single-head attention operands. Rows are tokens in original order.
struct AttentionInputs {
  Matrix q;
  Matrix k;
  Matrix v;
  /// Original token positions (RoPE input); 0..n-1 unless set explicitly.
  std::vector<std::size_t> positions;

  /// Fills positions with 0..n-1 and validates shapes.
  static AttentionInputs make(Matrix q, Matrix k, Matrix v);

  std::size_t n() const noexcept { return q.rows(); }
  std::size_t head_dim() const noexcept { return q.cols(); }

  /// Throws DimensionError unless q, k, v share a shape and positions has n entries.
  void validate() const;
};

/// Infinite temperature selects the uniform-attention regime: every unmasked
/// key gets weight 1 / (row degree).
inline constexpr double kUniformTemperature = std::numeric_limits<double>::infinity();

struct AttentionOptions {
  /// Scores are q.k / sqrt(d_h) / temperature.
  double temperature = 1.0;
  bool return_weights = false;
};

struct AttentionResult {
  Matrix y;
  std::optional<Matrix> weights;
};

/// softmax(q k^T / (sqrt(d_h) tau) restricted to mask) v, via the dense mask.
AttentionResult attention_forward(const AttentionInputs& inp, const MaskMatrix& mask,
                                  const AttentionOptions& opts = {});

/// Causal sliding-window attention (one-sided window of w keys) computed with
/// a banded O(n w) kernel.
Matrix swa_forward(const AttentionInputs& inp, std::size_t w, double temperature = 1.0);

/// Stochastic attention: permute q/k/v rows by p, run windowed attention in the
/// permuted order while only admitting keys whose original position does not
/// exceed the query's, then restore the original order. Equivalent to
/// attention_forward with intersect_causal(build_stochastic_mask(n, {w, convention}, p)).
Matrix sa_forward(const AttentionInputs& inp, std::size_t w, const Permutation& p,
                  WindowConvention convention = WindowConvention::SymmetricCircular,
                  double temperature = 1.0);

/// Permute -> windowed attention -> un-permute with an explicit window spec.
/// `causal` = false drops the original-order constraint, leaving every output a weighted
/// mean over a random window; sa_forward is the causal case.
Matrix stochastic_attention(const AttentionInputs& inp, const WindowSpec& spec, const Permutation& p, bool causal,
                            double temperature = 1.0);

/// Rotary embedding: pair (2k, 2k+1) of row r is rotated by
/// positions[r] * base^(-2k / d_h). Throws ConfigError for odd d_h.
Matrix rope_apply(const Matrix& x, const std::vector<std::size_t>& positions, double base = 10000.0);

struct GateParams {
  Matrix w_gate_swa;  // d x d
  Matrix w_gate_sa;   // d x d

  static GateParams zeros(std::size_t d) { return {Matrix(d, d), Matrix(d, d)}; }
};

/// sigmoid(y w^T), the row form of sigmoid(W Y^T)^T.
Matrix gate_values(const Matrix& y, const Matrix& w_gate);

/// sigmoid(y_sa w_sa^T) * y_sa + sigmoid(y_swa w_swa^T) * y_swa, elementwise.
Matrix gated_fusion(const Matrix& y_swa, const Matrix& y_sa, const GateParams& g);

struct AttentionGrads {
  Matrix dq;
  Matrix dk;
  Matrix dv;
};

/// Gradients of sum(upstream .* attention_forward(inp, mask, opts).y) with
/// respect to q, k and v.
AttentionGrads attention_backward(const AttentionInputs& inp, const MaskMatrix& mask,
                                  const Matrix& upstream, const AttentionOptions& opts = {});

struct LayerConfig {
  std::size_t d = 0;      ///< model width
  std::size_t heads = 1;  ///< h; head width is d / h
  std::size_t w = 1;      ///< window size shared by both paths
  bool use_rope = true;
  double rope_base = 10000.0;
  double temperature = 1.0;
  WindowConvention sa_convention = WindowConvention::SymmetricCircular;

  std::size_t head_dim() const noexcept { return heads == 0 ? 0 : d / heads; }
  /// Throws ConfigError on d != h * d_h, h = 0 or odd d_h with RoPE on.
  void validate() const;
};

/// Optional fixed Q/K/V projections (d x d). Absent means identity.
struct Projections {
  Matrix wq;
  Matrix wk;
  Matrix wv;
};

struct DualPathOutput {
  Matrix y;
  Matrix y_swa;
  Matrix y_sa;
  Permutation sigma;
};

/// One gated SA + SWA attention sub-layer. A single permutation is drawn from
/// `rng` and shared by every head.
DualPathOutput dual_path_layer(const Matrix& x, const LayerConfig& cfg, const GateParams& g,
                               SeededRng& rng, const std::optional<Projections>& proj = std::nullopt);

/// As above with a caller-chosen permutation.
DualPathOutput dual_path_layer(const Matrix& x, const LayerConfig& cfg, const GateParams& g,
                               const Permutation& sigma,
                               const std::optional<Projections>& proj = std::nullopt);

namespace serial {

/// Dense-mask forward pass on one thread; the reference for the kernels above.
AttentionResult attention_forward(const AttentionInputs& inp, const MaskMatrix& mask,
                                  const AttentionOptions& opts = {});

}  // namespace serial

}  // namespace sattn
