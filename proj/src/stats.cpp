#include "sattn/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sattn/error.hpp"
#include "sattn/numerics.hpp"
#include "sattn/parallel.hpp"
#include "sattn/permutation.hpp"

namespace sattn {

namespace {

constexpr WindowConvention kCircular = WindowConvention::SymmetricCircular;

std::vector<double> column_mean(const Matrix& v) {
  std::vector<double> m(v.cols(), 0.0);
  for (std::size_t r = 0; r < v.rows(); ++r)
    for (std::size_t c = 0; c < v.cols(); ++c) m[c] += v(r, c);
  for (double& x : m) x /= static_cast<double>(v.rows());
  return m;
}

double population_variance(const Matrix& v) {
  const auto mean = column_mean(v);
  double s = 0.0;
  for (std::size_t r = 0; r < v.rows(); ++r)
    for (std::size_t c = 0; c < v.cols(); ++c) s += (v(r, c) - mean[c]) * (v(r, c) - mean[c]);
  return s / static_cast<double>(v.rows());
}

void check_window(std::size_t n, std::size_t w, const char* who) {
  if (n == 0) throw DimensionError(std::string(who) + ": empty value matrix");
  if (w < 1 || w > n) {
    throw ConfigError(std::string(who) + ": need 1 <= w <= n, got w=" + std::to_string(w) + " n=" +
                      std::to_string(n));
  }
}

// One SA forward per trial under an independent permutation stream, reduced
// in trial order.
template <class Reduce>
void for_each_sa_sample(const AttentionInputs& inp, const WindowSpec& spec, bool causal, double temperature,
                        std::size_t trials, SeededRng& rng, Reduce&& reduce) {
  const Seed base = rng.next_u64();
  ordered_parallel_for(
      trials,
      [&](std::size_t t) {
        SeededRng local(derive_seed(base, 0, t));
        const Permutation p = sample_permutation(inp.n(), local);
        return stochastic_attention(inp, spec, p, causal, temperature);
      },
      reduce);
}

Matrix uniform_causal_mean(const Matrix& v) {
  Matrix y(v.rows(), v.cols());
  std::vector<double> run(v.cols(), 0.0);
  for (std::size_t i = 0; i < v.rows(); ++i) {
    for (std::size_t c = 0; c < v.cols(); ++c) {
      run[c] += v(i, c);
      y(i, c) = run[c] / static_cast<double>(i + 1);
    }
  }
  return y;
}

}  // namespace

double sa_bias_exact(const Matrix& v, std::size_t w) {
  const std::size_t n = v.rows();
  check_window(n, w, "sa_bias_exact");
  if (n == 1) return 0.0;
  const auto mean = column_mean(v);
  const double scale =
      static_cast<double>(n - w) / (static_cast<double>(w) * static_cast<double>(n - 1));
  double s = 0.0;
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < v.cols(); ++c) {
      const double b = (v(r, c) - mean[c]) * scale;
      s += b * b;
    }
  return std::sqrt(s / static_cast<double>(n));
}

BiasReport sa_bias_mc(const Matrix& v, const std::vector<std::size_t>& ws, double temperature,
                      std::size_t trials, SeededRng& rng) {
  if (trials < 1) throw ConfigError("sa_bias_mc: trials must be >= 1");
  const std::size_t n = v.rows();
  const std::size_t d = v.cols();
  const auto inp = AttentionInputs::make(v, v, v);
  const auto mean = column_mean(v);

  BiasReport rep;
  rep.n = n;
  rep.trials = trials;
  rep.temperature = temperature;
  for (std::size_t w : ws) {
    check_window(n, w, "sa_bias_mc");
    Matrix sum(n, d), sum_sq(n, d);
    for_each_sa_sample(inp, {w, kCircular}, false, temperature, trials, rng, [&](std::size_t, const Matrix& y) {
      for (std::size_t k = 0; k < y.data().size(); ++k) {
        sum.data()[k] += y.data()[k];
        sum_sq.data()[k] += y.data()[k] * y.data()[k];
      }
    });
    const double t = static_cast<double>(trials);
    double dev2 = 0.0, noise2 = 0.0;
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < d; ++c) {
        const double m = sum(r, c) / t;
        dev2 += (m - mean[c]) * (m - mean[c]);
        noise2 += std::max(0.0, sum_sq(r, c) / t - m * m) / t;
      }
    BiasPoint pt;
    pt.w = w;
    pt.deviation = std::sqrt(dev2 / static_cast<double>(n));
    pt.std_error = std::sqrt(noise2 / static_cast<double>(n));
    pt.exact = sa_bias_exact(v, w);
    rep.points.push_back(pt);
  }
  return rep;
}

VarianceReport sa_variance_exact(const Matrix& v, std::size_t w) {
  const std::size_t n = v.rows();
  check_window(n, w, "sa_variance_exact");
  VarianceReport rep;
  rep.n = n;
  rep.w = w;
  rep.sigma_v2 = population_variance(v);
  for (std::size_t r = 0; r < n; ++r) {
    double norm2 = 0.0;
    for (double x : v.row(r)) norm2 += x * x;
    rep.b_max = std::max(rep.b_max, std::sqrt(norm2));
  }
  const double dn = static_cast<double>(n);
  const double dw = static_cast<double>(w);
  rep.exact = n == 1 ? 0.0 : (1.0 / dw) * ((dn - dw) / (dn - 1.0)) * rep.sigma_v2;
  rep.bound = 4.0 * rep.b_max * rep.b_max / dw;

  if (n > 2 && w > 1 && w < n) {
    // sigma_{-i}^2 from the full-population moments with row i removed.
    const auto mean = column_mean(v);
    double total_ss = rep.sigma_v2 * dn;
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double dist2 = 0.0;
      for (std::size_t c = 0; c < v.cols(); ++c) dist2 += (v(i, c) - mean[c]) * (v(i, c) - mean[c]);
      const double ss_minus = total_ss - dist2 * dn / (dn - 1.0);
      const double sigma_minus = ss_minus / (dn - 1.0);
      acc += ((dw - 1.0) / (dw * dw)) * ((dn - dw) / (dn - 2.0)) * sigma_minus;
    }
    rep.token_exact = acc / dn;
  }
  return rep;
}

VarianceReport sa_variance_mc(const Matrix& v, std::size_t w, std::size_t trials, SeededRng& rng) {
  if (trials < 2) throw ConfigError("sa_variance_mc: trials must be >= 2");
  VarianceReport rep = sa_variance_exact(v, w);
  rep.trials = trials;
  const std::size_t n = v.rows();
  const std::size_t d = v.cols();
  const auto mean = column_mean(v);
  const auto inp = AttentionInputs::make(v, v, v);

  // A fixed slot sees a uniform w-subset, so its output has mean(V) as exact
  // mean; averaging the squared deviation over all n slots keeps it unbiased.
  double sum_z = 0.0, sum_z2 = 0.0;
  Matrix sum(n, d), sum_sq(n, d);
  for_each_sa_sample(inp, {w, kCircular}, false, kUniformTemperature, trials, rng,
                     [&](std::size_t, const Matrix& y) {
                       double z = 0.0;
                       for (std::size_t r = 0; r < n; ++r)
                         for (std::size_t c = 0; c < d; ++c) {
                           const double x = y(r, c);
                           z += (x - mean[c]) * (x - mean[c]);
                           sum(r, c) += x;
                           sum_sq(r, c) += x * x;
                         }
                       z /= static_cast<double>(n);
                       sum_z += z;
                       sum_z2 += z * z;
                     });
  const double t = static_cast<double>(trials);
  rep.mc = sum_z / t;
  rep.mc_std_error = std::sqrt(std::max(0.0, sum_z2 / t - rep.mc * rep.mc) / (t - 1.0));

  double token = 0.0;
  for (std::size_t k = 0; k < sum.data().size(); ++k) {
    const double m = sum.data()[k] / t;
    token += std::max(0.0, sum_sq.data()[k] - t * m * m) / (t - 1.0);
  }
  rep.token_mc = token / static_cast<double>(n);
  return rep;
}

BVReport fusion_bv_decompose(const AttentionInputs& inputs, const GateParams& gates, std::size_t w,
                             std::size_t trials, SeededRng& rng) {
  inputs.validate();
  if (trials < 2) throw ConfigError("fusion_bv_decompose: trials must be >= 2");
  const std::size_t n = inputs.n();
  const std::size_t d = inputs.v.cols();
  check_window(n, w, "fusion_bv_decompose");

  const Matrix y_star = uniform_causal_mean(inputs.v);
  const Matrix y_swa = swa_forward(inputs, w, kUniformTemperature);
  const Matrix g_swa = gate_values(y_swa, gates.w_gate_swa);
  const Matrix g_sa = gate_values(inputs.v, gates.w_gate_sa);
  const WindowSpec spec{w, kCircular};

  // Deterministic part of Y - Y*: g_swa * Y_swa - Y*.
  Matrix offset(n, d);
  for (std::size_t k = 0; k < offset.data().size(); ++k) {
    offset.data()[k] = g_swa.data()[k] * y_swa.data()[k] - y_star.data()[k];
  }

  BVReport rep;
  rep.n = n;
  rep.d = d;
  rep.w = w;
  rep.trials = trials;
  const double t = static_cast<double>(trials);

  // Stream A: direct MSE.
  double sum_l = 0.0, sum_l2 = 0.0;
  for_each_sa_sample(inputs, spec, true, kUniformTemperature, trials, rng, [&](std::size_t, const Matrix& y_sa) {
    double l = 0.0;
    for (std::size_t k = 0; k < y_sa.data().size(); ++k) {
      const double e = g_sa.data()[k] * y_sa.data()[k] + offset.data()[k];
      l += e * e;
    }
    sum_l += l;
    sum_l2 += l * l;
  });
  rep.mse = sum_l / t;
  rep.mse_std_error = std::sqrt(std::max(0.0, sum_l2 / t - rep.mse * rep.mse) / (t - 1.0));

  // Stream B: E[Y_sa] and per-entry variance (population, 1/T), two-pass so a
  // constant path gives exactly zero.
  Matrix sum(n, d);
  std::vector<Matrix> kept;
  kept.reserve(trials);
  for_each_sa_sample(inputs, spec, true, kUniformTemperature, trials, rng, [&](std::size_t, const Matrix& y_sa) {
    for (std::size_t k = 0; k < y_sa.data().size(); ++k) sum.data()[k] += y_sa.data()[k];
    kept.push_back(y_sa);
  });

  Matrix mean_sa(n, d), var_sa(n, d);
  for (std::size_t k = 0; k < sum.data().size(); ++k) mean_sa.data()[k] = sum.data()[k] / t;
  for (const Matrix& y_sa : kept)
    for (std::size_t k = 0; k < y_sa.data().size(); ++k) {
      const double e = y_sa.data()[k] - mean_sa.data()[k];
      var_sa.data()[k] += e * e / t;
    }

  std::vector<double> dim_var(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double g2 = 0.0, v_i = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      const double gs = g_sa(i, c);
      const double gw = g_swa(i, c);
      const double b_sa = mean_sa(i, c) - y_star(i, c);
      const double b_swa = y_swa(i, c) - y_star(i, c);
      const double full = gs * mean_sa(i, c) + offset(i, c);
      const double gate_form = gs * b_sa + gw * b_swa;
      rep.bias2 += full * full;
      rep.bias2_gate_form += gate_form * gate_form;
      rep.swa_bias2 += b_swa * b_swa;
      rep.variance += gs * gs * var_sa(i, c);
      g2 += gs * gs;
      v_i += var_sa(i, c);
      dim_var[c] += var_sa(i, c);
    }
    rep.variance_uniform_approx += g2 * v_i / static_cast<double>(d);
  }
  const auto [lo, hi] = std::minmax_element(dim_var.begin(), dim_var.end());
  rep.dim_variance_ratio = *lo > 0.0 ? *hi / *lo : (*hi > 0.0 ? std::numeric_limits<double>::infinity() : 1.0);

  // bias2 + variance is the stream-B mean of ||Y_t - Y*||^2; its spread gives
  // the RHS standard error.
  double sum_r = 0.0, sum_r2 = 0.0;
  for (const Matrix& y_sa : kept) {
    double r = 0.0;
    for (std::size_t k = 0; k < y_sa.data().size(); ++k) {
      const double e = g_sa.data()[k] * y_sa.data()[k] + offset.data()[k];
      r += e * e;
    }
    sum_r += r;
    sum_r2 += r * r;
  }
  const double rhs_mean = sum_r / t;
  rep.rhs_std_error = std::sqrt(std::max(0.0, sum_r2 / t - rhs_mean * rhs_mean) / (t - 1.0));
  rep.residual = rep.mse - (rep.bias2 + rep.variance);
  rep.combined_std_error = std::hypot(rep.mse_std_error, rep.rhs_std_error);
  return rep;
}

}  // namespace sattn
