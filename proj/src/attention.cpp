#include "sattn/attention.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "sattn/error.hpp"
#include "sattn/numerics.hpp"

namespace sattn {

namespace {

double score_factor(std::size_t head_dim, double temperature) {
  if (!(temperature > 0.0)) throw ConfigError("attention: temperature must be > 0");
  if (std::isinf(temperature)) return 0.0;
  return 1.0 / std::sqrt(static_cast<double>(head_dim)) / temperature;
}

void check_mask(const AttentionInputs& inp, const MaskMatrix& mask) {
  inp.validate();
  if (mask.n() != inp.n()) {
    throw DimensionError("attention: mask size " + std::to_string(mask.n()) + " != n=" +
                         std::to_string(inp.n()));
  }
}

// Windowed attention in the permuted ("slot") order. Slot s attends to slots
// s + o for o in `offsets` (wrapped for the circular window, clipped at 0 for
// the one-sided one) whose tokens are not later than the query token in the
// original order (when `causal`). Returns output in slot order.
Matrix windowed_attention(const Matrix& q, const Matrix& k, const Matrix& v, const Permutation& p,
                          const WindowSpec& spec, bool causal, double factor) {
  const std::size_t n = q.rows();
  const std::size_t dv = v.cols();
  const auto offsets = window_offsets(spec);
  const auto sn = static_cast<std::ptrdiff_t>(n);
  const bool circular = spec.convention == WindowConvention::SymmetricCircular;
  Matrix y(n, dv);

#pragma omp parallel
  {
    std::vector<std::size_t> keys;
    std::vector<double> e;
    keys.reserve(offsets.size());
    e.reserve(offsets.size());
#pragma omp for schedule(static)
    for (std::ptrdiff_t s = 0; s < sn; ++s) {
      const std::size_t query_token = p.token_at(static_cast<std::size_t>(s));
      keys.clear();
      for (auto o : offsets) {
        std::ptrdiff_t t = s + o;
        if (circular) {
          t = ((t % sn) + sn) % sn;
        } else if (t < 0) {
          continue;
        }
        if (!causal || p.token_at(static_cast<std::size_t>(t)) <= query_token) {
          keys.push_back(static_cast<std::size_t>(t));
        }
      }
      auto qs = q.row(static_cast<std::size_t>(s));
      e.assign(keys.size(), 0.0);
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < keys.size(); ++a) {
        auto kt = k.row(keys[a]);
        double dot = 0.0;
        for (std::size_t c = 0; c < qs.size(); ++c) dot += qs[c] * kt[c];
        e[a] = dot * factor;
        mx = std::max(mx, e[a]);
      }
      double sum = 0.0;
      for (auto& x : e) {
        x = std::exp(x - mx);
        sum += x;
      }
      auto out = y.row(static_cast<std::size_t>(s));
      for (std::size_t a = 0; a < keys.size(); ++a) {
        const double alpha = e[a] / sum;
        auto vt = v.row(keys[a]);
        for (std::size_t c = 0; c < dv; ++c) out[c] += alpha * vt[c];
      }
    }
  }
  return y;
}

AttentionResult forward_from_weights(Matrix weights, const Matrix& v, bool keep, bool parallel) {
  AttentionResult r;
  r.y = parallel ? matmul(weights, v) : serial::matmul(weights, v);
  if (keep) r.weights = std::move(weights);
  return r;
}

}  // namespace

AttentionInputs AttentionInputs::make(Matrix q, Matrix k, Matrix v) {
  AttentionInputs in{std::move(q), std::move(k), std::move(v), {}};
  in.positions.resize(in.q.rows());
  std::iota(in.positions.begin(), in.positions.end(), std::size_t{0});
  in.validate();
  return in;
}

void AttentionInputs::validate() const {
  if (q.rows() != k.rows() || q.rows() != v.rows() || q.cols() != k.cols()) {
    throw DimensionError("AttentionInputs: q, k, v shapes disagree");
  }
  if (q.rows() == 0 || q.cols() == 0) throw DimensionError("AttentionInputs: empty operands");
  if (positions.size() != q.rows()) throw DimensionError("AttentionInputs: positions length != n");
}

AttentionResult attention_forward(const AttentionInputs& inp, const MaskMatrix& mask,
                                  const AttentionOptions& opts) {
  check_mask(inp, mask);
  const double factor = score_factor(inp.head_dim(), opts.temperature);
  Matrix scores = matmul_transposed(inp.q, inp.k);
  for (double& s : scores.data()) s *= factor;
  return forward_from_weights(masked_row_softmax(scores, mask), inp.v, opts.return_weights, true);
}

namespace serial {

AttentionResult attention_forward(const AttentionInputs& inp, const MaskMatrix& mask,
                                  const AttentionOptions& opts) {
  check_mask(inp, mask);
  const double factor = score_factor(inp.head_dim(), opts.temperature);
  const std::size_t n = inp.n();
  Matrix scores(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double dot = 0.0;
      for (std::size_t c = 0; c < inp.head_dim(); ++c) dot += inp.q(i, c) * inp.k(j, c);
      scores(i, j) = dot * factor;
    }
  return forward_from_weights(serial::masked_row_softmax(scores, mask), inp.v, opts.return_weights, false);
}

}  // namespace serial

Matrix swa_forward(const AttentionInputs& inp, std::size_t w, double temperature) {
  inp.validate();
  const WindowSpec spec{w, WindowConvention::CausalOneSided};
  validate_window(inp.n(), spec);
  return windowed_attention(inp.q, inp.k, inp.v, Permutation::identity(inp.n()), spec, true,
                            score_factor(inp.head_dim(), temperature));
}

Matrix sa_forward(const AttentionInputs& inp, std::size_t w, const Permutation& p,
                  WindowConvention convention, double temperature) {
  return stochastic_attention(inp, {w, convention}, p, true, temperature);
}

Matrix stochastic_attention(const AttentionInputs& inp, const WindowSpec& spec, const Permutation& p, bool causal,
                            double temperature) {
  inp.validate();
  validate_window(inp.n(), spec);
  if (p.size() != inp.n()) {
    throw DimensionError("sa_forward: permutation size " + std::to_string(p.size()) + " != n=" +
                         std::to_string(inp.n()));
  }
  const Matrix q = permute_rows(inp.q, p);
  const Matrix k = permute_rows(inp.k, p);
  const Matrix v = permute_rows(inp.v, p);
  const Matrix y_slots =
      windowed_attention(q, k, v, p, spec, causal, score_factor(inp.head_dim(), temperature));
  return permute_rows(y_slots, invert(p));
}

Matrix rope_apply(const Matrix& x, const std::vector<std::size_t>& positions, double base) {
  const std::size_t dh = x.cols();
  if (dh % 2 != 0) throw ConfigError("rope_apply: head dimension " + std::to_string(dh) + " is odd");
  if (positions.size() != x.rows()) throw DimensionError("rope_apply: positions length != rows");
  Matrix out = x;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const double pos = static_cast<double>(positions[r]);
    for (std::size_t pair = 0; pair < dh / 2; ++pair) {
      const double inv_freq = std::pow(base, -2.0 * static_cast<double>(pair) / static_cast<double>(dh));
      const double angle = pos * inv_freq;
      const double c = std::cos(angle);
      const double s = std::sin(angle);
      const double a = x(r, 2 * pair);
      const double b = x(r, 2 * pair + 1);
      out(r, 2 * pair) = a * c - b * s;
      out(r, 2 * pair + 1) = a * s + b * c;
    }
  }
  return out;
}

Matrix gate_values(const Matrix& y, const Matrix& w_gate) {
  if (w_gate.rows() != w_gate.cols() || w_gate.cols() != y.cols()) {
    throw DimensionError("gate_values: gate matrix must be d x d with d = " + std::to_string(y.cols()));
  }
  Matrix g = matmul_transposed(y, w_gate);
  for (double& v : g.data()) v = sigmoid(v);
  return g;
}

Matrix gated_fusion(const Matrix& y_swa, const Matrix& y_sa, const GateParams& g) {
  if (y_swa.rows() != y_sa.rows() || y_swa.cols() != y_sa.cols()) {
    throw DimensionError("gated_fusion: path outputs differ in shape");
  }
  const Matrix g_sa = gate_values(y_sa, g.w_gate_sa);
  const Matrix g_swa = gate_values(y_swa, g.w_gate_swa);
  Matrix y(y_sa.rows(), y_sa.cols());
  auto out = y.data();
  auto a = y_sa.data();
  auto b = y_swa.data();
  auto ga = g_sa.data();
  auto gb = g_swa.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = ga[i] * a[i] + gb[i] * b[i];
  return y;
}

AttentionGrads attention_backward(const AttentionInputs& inp, const MaskMatrix& mask, const Matrix& upstream,
                                  const AttentionOptions& opts) {
  check_mask(inp, mask);
  if (upstream.rows() != inp.n() || upstream.cols() != inp.v.cols()) {
    throw DimensionError("attention_backward: upstream gradient shape must match the output");
  }
  const double factor = score_factor(inp.head_dim(), opts.temperature);
  AttentionOptions fwd = opts;
  fwd.return_weights = true;
  const Matrix a = *attention_forward(inp, mask, fwd).weights;
  const std::size_t n = inp.n();

  AttentionGrads g;
  g.dv = matmul(a.transposed(), upstream);
  const Matrix da = matmul_transposed(upstream, inp.v);  // dL/dA = G V^T

  // dS_ij = A_ij (dA_ij - sum_k A_ik dA_ik); zero wherever A is masked.
  Matrix ds(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    double inner = 0.0;
    for (std::size_t j = 0; j < n; ++j) inner += a(i, j) * da(i, j);
    for (std::size_t j = 0; j < n; ++j) ds(i, j) = a(i, j) * (da(i, j) - inner) * factor;
  }
  g.dq = matmul(ds, inp.k);
  g.dk = matmul(ds.transposed(), inp.q);
  return g;
}

void LayerConfig::validate() const {
  if (heads == 0 || d == 0) throw ConfigError("LayerConfig: d and h must be positive");
  if (d % heads != 0) {
    throw ConfigError("LayerConfig: d=" + std::to_string(d) + " is not divisible by h=" + std::to_string(heads));
  }
  if (use_rope && head_dim() % 2 != 0) throw ConfigError("LayerConfig: RoPE needs an even head dimension");
  if (w == 0) throw ConfigError("LayerConfig: w must be >= 1");
}

DualPathOutput dual_path_layer(const Matrix& x, const LayerConfig& cfg, const GateParams& g, SeededRng& rng,
                               const std::optional<Projections>& proj) {
  if (x.rows() == 0) throw ConfigError("dual_path_layer: empty input");
  const Permutation sigma = sample_permutation(x.rows(), rng);
  return dual_path_layer(x, cfg, g, sigma, proj);
}

DualPathOutput dual_path_layer(const Matrix& x, const LayerConfig& cfg, const GateParams& g,
                               const Permutation& sigma, const std::optional<Projections>& proj) {
  cfg.validate();
  if (x.cols() != cfg.d) {
    throw ConfigError("dual_path_layer: input width " + std::to_string(x.cols()) + " != d=" + std::to_string(cfg.d));
  }
  const std::size_t n = x.rows();
  const Matrix q = proj ? matmul(x, proj->wq) : x;
  const Matrix k = proj ? matmul(x, proj->wk) : x;
  const Matrix v = proj ? matmul(x, proj->wv) : x;

  std::vector<std::size_t> positions(n);
  std::iota(positions.begin(), positions.end(), std::size_t{0});

  const std::size_t dh = cfg.head_dim();
  DualPathOutput out{Matrix(), Matrix(n, cfg.d), Matrix(n, cfg.d), sigma};
  for (std::size_t h = 0; h < cfg.heads; ++h) {
    Matrix qh = column_block(q, h * dh, dh);
    Matrix kh = column_block(k, h * dh, dh);
    if (cfg.use_rope) {
      // Original positions, before any shuffling.
      qh = rope_apply(qh, positions, cfg.rope_base);
      kh = rope_apply(kh, positions, cfg.rope_base);
    }
    AttentionInputs in{std::move(qh), std::move(kh), column_block(v, h * dh, dh), positions};
    set_column_block(out.y_swa, h * dh, swa_forward(in, cfg.w, cfg.temperature));
    set_column_block(out.y_sa, h * dh, sa_forward(in, cfg.w, sigma, cfg.sa_convention, cfg.temperature));
  }
  out.y = gated_fusion(out.y_swa, out.y_sa, g);
  return out;
}

}  // namespace sattn
